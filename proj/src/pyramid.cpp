#include "glyphdesc/pyramid.hpp"

#include "glyphdesc/error.hpp"

namespace gd {

RegionSet regions(int width, int height) {
  if (width < 4 || height < 4) {
    throw Error(ErrorCode::ImageTooSmall, "pyramid regions need at least 4x4 pixels");
  }
  const int strip_h = (height + 1) / 2;
  const int strip_w = (width + 1) / 2;
  return RegionSet{{
      Rect{0, 0, height, width},
      Rect{0, 0, strip_h, width},
      Rect{height / 4, 0, strip_h, width},
      Rect{height - strip_h, 0, strip_h, width},
      Rect{0, 0, height, strip_w},
      Rect{0, width / 4, height, strip_w},
      Rect{0, width - strip_w, height, strip_w},
  }};
}

Descriptor describe7(const GrayImage& img, DescriptorKind kind) {
  const RegionSet rs = regions(img);
  const std::size_t dim = base_dimension(kind);
  std::vector<double> values;
  values.reserve(dim * kPyramidRegions);
  for (const Rect& r : rs) {
    const GrayImage sub = (r.width == img.width() && r.height == img.height())
                              ? img
                              : img.crop(r.left, r.top, r.width, r.height);
    const Descriptor d = gd::describe(sub, kind);
    values.insert(values.end(), d.values().begin(), d.values().end());
  }
  return Descriptor(kind, true, std::move(values));
}

Descriptor describe(const GrayImage& img, const DescriptorSpec& spec) {
  return spec.pyramid ? describe7(img, spec.kind) : describe(img, spec.kind);
}

}  // namespace gd
