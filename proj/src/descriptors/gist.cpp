#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "glyphdesc/descriptors.hpp"
#include "glyphdesc/error.hpp"
#include "internal.hpp"

namespace gd {

Kernel make_gabor_kernel(double wavelength, double orientation, double sigma, double aspect) {
  int size = static_cast<int>(std::lround(4.0 * sigma)) + 1;
  if (size % 2 == 0) ++size;
  const int r = size / 2;
  Kernel k;
  k.width = size;
  k.height = size;
  k.taps.resize(static_cast<std::size_t>(size * size));
  const double c = std::cos(orientation);
  const double s = std::sin(orientation);
  double mean = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double xr = x * c + y * s;
      const double yr = -x * s + y * c;
      const double env = std::exp(-(xr * xr + aspect * aspect * yr * yr) / (2.0 * sigma * sigma));
      const double v = env * std::cos(2.0 * std::numbers::pi * xr / wavelength);
      k.taps[static_cast<std::size_t>((y + r) * size + (x + r))] = v;
      mean += v;
    }
  }
  mean /= static_cast<double>(k.taps.size());
  double energy = 0.0;
  for (double& t : k.taps) {
    t -= mean;
    energy += t * t;
  }
  // Unit L2 norm keeps the scales comparable; larger kernels would otherwise
  // dominate purely by their support size.
  const double norm = std::sqrt(energy);
  for (double& t : k.taps) t /= norm;
  return k;
}

namespace detail {

namespace {
// The FFTW planner is not thread-safe; execution with new-array calls is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

// Kernel spectra on a fixed padded grid. The window is reflect-101 padded by
// the largest kernel radius, so circular correlation on the grid never wraps.
struct GaborSpectra {
  int pad = 0;
  int side = 0;
  int freq_cols = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<std::vector<std::complex<double>>> kernels;

  GaborSpectra(const GaborSpectra&) = delete;
  GaborSpectra& operator=(const GaborSpectra&) = delete;

  explicit GaborSpectra(std::span<const GaborFilter> filters) {
    for (const auto& f : filters) pad = std::max(pad, f.kernel.width / 2);
    side = kWindowSize + 2 * pad;
    freq_cols = side / 2 + 1;
    const auto n_real = static_cast<std::size_t>(side * side);
    const auto n_freq = static_cast<std::size_t>(side * freq_cols);
    std::vector<double> real(n_real, 0.0);
    std::vector<std::complex<double>> freq(n_freq);
    {
      std::lock_guard lock(fftw_planner_mutex());
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      forward = fftw_plan_dft_r2c_2d(side, side, real.data(), reinterpret_cast<fftw_complex*>(freq.data()), flags);
      backward = fftw_plan_dft_c2r_2d(side, side, reinterpret_cast<fftw_complex*>(freq.data()), real.data(),
                                      flags | FFTW_DESTROY_INPUT);
    }
    for (const auto& f : filters) {
      std::fill(real.begin(), real.end(), 0.0);
      const int r = f.kernel.width / 2;
      for (int v = -r; v <= r; ++v) {
        for (int u = -r; u <= r; ++u) {
          const int row = (v + side) % side;
          const int col = (u + side) % side;
          real[static_cast<std::size_t>(row * side + col)] = f.kernel(u + r, v + r);
        }
      }
      fftw_execute_dft_r2c(forward, real.data(), reinterpret_cast<fftw_complex*>(freq.data()));
      // Correlation = product with the conjugate spectrum; fold in the 1/N of the inverse.
      const double scale = 1.0 / static_cast<double>(n_real);
      for (auto& z : freq) z = std::conj(z) * scale;
      kernels.push_back(freq);
    }
  }

  ~GaborSpectra() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
};

}  // namespace detail

GaborBank::GaborBank(std::vector<GaborFilter> filters)
    : filters_(std::move(filters)), spectra_(std::make_shared<const detail::GaborSpectra>(filters_)) {}
GaborBank::~GaborBank() = default;
GaborBank::GaborBank(const GaborBank&) = default;
GaborBank& GaborBank::operator=(const GaborBank&) = default;
GaborBank::GaborBank(GaborBank&&) noexcept = default;
GaborBank& GaborBank::operator=(GaborBank&&) noexcept = default;

std::vector<GrayImage> GaborBank::responses(const GrayImage& window) const {
  detail::require_window(window, "gist");
  const auto& sp = *spectra_;
  const int side = sp.side;
  const auto n_real = static_cast<std::size_t>(side * side);
  std::vector<double> real(n_real);
  // The kernels are zero-sum, so removing the window mean changes the
  // responses only by rounding and makes flat windows respond with exact zeros.
  double mean = 0.0;
  for (double v : window.pixels()) mean += v;
  mean /= static_cast<double>(window.size());
  for (int y = 0; y < side; ++y) {
    const int sy = reflect101(y - sp.pad, kWindowSize);
    for (int x = 0; x < side; ++x) {
      real[static_cast<std::size_t>(y * side + x)] = window(reflect101(x - sp.pad, kWindowSize), sy) - mean;
    }
  }
  std::vector<std::complex<double>> image_freq(static_cast<std::size_t>(side * sp.freq_cols));
  fftw_execute_dft_r2c(sp.forward, real.data(), reinterpret_cast<fftw_complex*>(image_freq.data()));

  std::vector<GrayImage> out;
  out.reserve(filters_.size());
  std::vector<std::complex<double>> product(image_freq.size());
  for (const auto& spectrum : sp.kernels) {
    for (std::size_t i = 0; i < product.size(); ++i) product[i] = image_freq[i] * spectrum[i];
    fftw_execute_dft_c2r(sp.backward, reinterpret_cast<fftw_complex*>(product.data()), real.data());
    GrayImage resp(kWindowSize, kWindowSize);
    for (int y = 0; y < kWindowSize; ++y) {
      for (int x = 0; x < kWindowSize; ++x) {
        resp(x, y) = real[static_cast<std::size_t>((y + sp.pad) * side + (x + sp.pad))];
      }
    }
    out.push_back(std::move(resp));
  }
  return out;
}

GaborBank make_gabor_bank() {
  constexpr auto& cfg = kDescriptorConfig;
  std::vector<GaborFilter> filters;
  for (double wavelength : cfg.gist_wavelengths) {
    const double sigma = cfg.gist_sigma_per_wavelength * wavelength;
    for (int o = 0; o < cfg.gist_orientations; ++o) {
      const double theta = std::numbers::pi * o / cfg.gist_orientations;
      filters.push_back({wavelength, theta, sigma, cfg.gist_aspect,
                         make_gabor_kernel(wavelength, theta, sigma, cfg.gist_aspect)});
    }
  }
  return GaborBank(std::move(filters));
}

const GaborBank& default_gabor_bank() {
  static const GaborBank bank = make_gabor_bank();
  return bank;
}

Descriptor gist(const GrayImage& window, const GaborBank& bank) {
  const std::vector<GrayImage> responses = bank.responses(window);
  const int grid = kDescriptorConfig.gist_grid;
  const int cell = kWindowSize / grid;
  const double inv_area = 1.0 / (cell * cell);
  std::vector<double> out;
  out.reserve(responses.size() * static_cast<std::size_t>(grid * grid));
  for (const auto& resp : responses) {
    for (int cy = 0; cy < grid; ++cy) {
      for (int cx = 0; cx < grid; ++cx) {
        double acc = 0.0;
        for (int y = cy * cell; y < (cy + 1) * cell; ++y) {
          for (int x = cx * cell; x < (cx + 1) * cell; ++x) acc += std::abs(resp(x, y));
        }
        out.push_back(acc * inv_area);
      }
    }
  }
  if (out.size() != base_dimension(DescriptorKind::GIST)) {
    throw Error(ErrorCode::DimensionMismatch, "gist bank must hold 32 filters");
  }
  detail::l2_normalize(out, kDescriptorConfig.zero_norm);
  return Descriptor(DescriptorKind::GIST, false, std::move(out));
}

}  // namespace gd
