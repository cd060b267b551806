#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "glyphdesc/error.hpp"
#include "glyphdesc/formproc.hpp"
#include "glyphdesc/harness.hpp"
#include "glyphdesc/pyramid.hpp"

namespace py = pybind11;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;

gd::GrayImage to_image(const Array2& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return gd::GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const gd::GrayImage& img) {
  py::array_t<double> out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

gd::DescriptorSpec spec_of(const std::string& name) {
  const auto s = gd::parse_descriptor_spec(name);
  if (!s) throw py::value_error("unknown descriptor '" + name + "'");
  return *s;
}

gd::ClassifierKind kind_of(const std::string& name) {
  const auto k = gd::parse_classifier_kind(name);
  if (!k) throw py::value_error("unknown classifier '" + name + "'");
  return *k;
}

py::dict params_dict(gd::ClassifierKind kind, const gd::Hyperparams& p) {
  py::dict d;
  if (kind == gd::ClassifierKind::LR || kind == gd::ClassifierKind::ANN) d["lambda"] = p.lambda;
  if (kind == gd::ClassifierKind::SvmLinear || kind == gd::ClassifierKind::SvmRbf) d["C"] = p.C;
  if (kind == gd::ClassifierKind::SvmRbf) d["gamma"] = p.gamma;
  return d;
}

std::array<gd::Point2, 4> quad(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() != 4) throw py::value_error("expected four (x, y) points");
  std::array<gd::Point2, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = {pts[i].first, pts[i].second};
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Window descriptors, spatial pyramids, classifiers and form preprocessing";

  static py::exception<gd::Error> error(m, "GlyphError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const gd::Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "describe", [](const Array2& image, const std::string& name) {
        const gd::Descriptor d = gd::describe(to_image(image), spec_of(name));
        return py::array_t<double>(static_cast<py::ssize_t>(d.size()), d.values().data());
      },
      py::arg("image"), py::arg("descriptor"), "Descriptor vector of a 2-D image in [0, 1], e.g. describe(img, 'SIFT7').");
  m.def(
      "descriptor_dimension", [](const std::string& name) { return spec_of(name).dimension(); }, py::arg("descriptor"));
  m.def("descriptor_names", [] {
    std::vector<std::string> out;
    for (const auto& d : gd::default_config().descriptors) out.push_back(d.name());
    return out;
  });

  m.def(
      "synth_glyphs",
      [](int per_class, std::uint64_t seed, std::optional<std::vector<int>> classes) {
        const auto samples = classes ? gd::synth_glyphs(per_class, seed, {}, *classes) : gd::synth_glyphs(per_class, seed);
        py::array_t<double> images({static_cast<py::ssize_t>(samples.size()), py::ssize_t{64}, py::ssize_t{64}});
        py::array_t<int> labels(static_cast<py::ssize_t>(samples.size()));
        double* dst = images.mutable_data();
        for (std::size_t i = 0; i < samples.size(); ++i) {
          std::copy(samples[i].image.pixels().begin(), samples[i].image.pixels().end(), dst + i * 64 * 64);
          labels.mutable_data()[i] = samples[i].label;
        }
        return py::make_tuple(images, labels);
      },
      py::arg("per_class"), py::arg("seed") = 7, py::arg("classes") = py::none(),
      "Returns (images[N, 64, 64], labels[N]).");

  m.def(
      "split",
      [](const std::vector<int>& labels, std::uint64_t seed, double train, double val, double test) {
        const gd::SplitIndices s = gd::split(labels, gd::SplitSpec{train, val, test, seed});
        return py::make_tuple(s.train, s.val, s.test);
      },
      py::arg("labels"), py::arg("seed") = 0, py::arg("train") = 0.70, py::arg("val") = 0.15, py::arg("test") = 0.15,
      "Stratified split; returns (train, val, test) index lists.");

  m.def(
      "evaluate",
      [](const Eigen::MatrixXd& Xtr, const std::vector<int>& ytr, const Eigen::MatrixXd& Xva, const std::vector<int>& yva,
         const Eigen::MatrixXd& Xte, const std::vector<int>& yte, const std::string& classifier) {
        int K = 0;
        for (const auto* y : {&ytr, &yva, &yte})
          for (int v : *y) K = std::max(K, v + 1);
        const gd::LabeledSet train(Xtr, ytr, K), val(Xva, yva, K), test(Xte, yte, K);
        const gd::ClassifierKind kind = kind_of(classifier);
        gd::GridResult g;
        gd::RefitResult r;
        {
          py::gil_scoped_release release;
          g = gd::grid_search(train, val, kind, gd::ParamGrid{});
          r = gd::refit_and_test(train, val, test, kind, g.best);
        }
        py::dict out;
        out["accuracy"] = r.accuracy;
        out["val_accuracy"] = g.val_accuracy;
        out["params"] = params_dict(kind, g.best);
        out["predictions"] = r.predictions;
        return out;
      },
      py::arg("X_train"), py::arg("y_train"), py::arg("X_val"), py::arg("y_val"), py::arg("X_test"), py::arg("y_test"),
      py::arg("classifier"), "Grid-search on val, refit on train+val, score on test.");

  m.def(
      "confusion",
      [](const std::vector<int>& pred, const std::vector<int>& truth, int K) { return gd::confusion(pred, truth, K); },
      py::arg("predictions"), py::arg("labels"), py::arg("num_classes"));
  m.def("format_percent", &gd::format_percent, py::arg("value"));

  m.def(
      "run_experiment",
      [](const std::string& config_text) {
        std::istringstream in(config_text);
        const gd::ExperimentConfig cfg = gd::parse_config(in);
        gd::ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = gd::run_experiment(cfg);
        }
        const gd::RenderedReport r = gd::report_render(report);
        py::dict out;
        out["table"] = r.table;
        out["csv"] = r.csv;
        out["deltas_csv"] = gd::render_deltas(gd::pyramid_deltas(report)).csv;
        out["failed_cells"] = report.failed_cells();
        return out;
      },
      py::arg("config"), "Runs the matrix described by key = value config text.");

  m.def(
      "harris",
      [](const Array2& image, double k) {
        std::vector<std::tuple<double, double, double>> out;
        for (const gd::Corner& c : gd::harris(to_image(image), k)) out.emplace_back(c.x, c.y, c.response);
        return out;
      },
      py::arg("image"), py::arg("k") = gd::kHarrisK, "Corners as (x, y, response), strongest first.");
  m.def(
      "estimate_homography",
      [](const std::vector<std::pair<double, double>>& src, const std::vector<std::pair<double, double>>& dst) {
        const auto& a = gd::estimate_homography(quad(src), quad(dst)).matrix();
        py::array_t<double> out({3, 3});
        std::copy(a.begin(), a.end(), out.mutable_data());
        return out;
      },
      py::arg("src"), py::arg("dst"));
  m.def(
      "process_form",
      [](const Array2& page, int rows, int cols, int width, int height, int margin) {
        const gd::FormCells cells = gd::process_form(to_image(page), gd::GridSpec{rows, cols, width, height, margin});
        py::list images;
        std::vector<std::string> flags;
        for (std::size_t i = 0; i < cells.cells.size(); ++i) {
          images.append(to_array(cells.cells[i]));
          flags.push_back(gd::format_flags(cells.flags[i]));
        }
        return py::make_tuple(images, flags);
      },
      py::arg("page"), py::arg("rows"), py::arg("cols"), py::arg("width") = 256, py::arg("height") = 256,
      py::arg("margin") = 0, "Deskews a form page; returns (cell images, QA flag strings) in row-major order.");
}
