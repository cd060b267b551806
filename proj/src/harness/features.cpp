#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "glyphdesc/error.hpp"
#include "glyphdesc/harness.hpp"
#include "glyphdesc/pyramid.hpp"

namespace gd {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "cache files are little-endian");
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const fs::path& file) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(ErrorCode::FormatError, "feature cache truncated: " + file.string());
  }
  return v;
}

}  // namespace

std::uint64_t dataset_hash(const std::vector<Sample>& samples) {
  std::uint64_t h = kFnvOffset;
  fnv(h, samples.size());
  for (const Sample& s : samples) {
    fnv(h, static_cast<std::uint64_t>(s.label));
    fnv(h, static_cast<std::uint64_t>(s.image.width()));
    fnv(h, static_cast<std::uint64_t>(s.image.height()));
    for (double v : s.image.pixels()) fnv(h, std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

Eigen::MatrixXd FeatureMatrix::gather(const std::vector<std::size_t>& idx) const {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= rows) throw Error(ErrorCode::InvalidArgument, "FeatureMatrix::gather: row out of range");
    const float* src = values.data() + idx[r] * cols;
    for (std::size_t j = 0; j < cols; ++j) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = src[j];
  }
  return X;
}

FeatureMatrix extract_features(const std::vector<Sample>& samples, const DescriptorSpec& spec, int workers) {
  FeatureMatrix m;
  m.spec = spec;
  m.rows = samples.size();
  m.cols = spec.dimension();
  m.values.resize(m.rows * m.cols);
  m.labels.resize(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (samples[i].label < 0 || samples[i].label > 0xffff) throw Error(ErrorCode::BadLabel, "label does not fit 16 bits");
    m.labels[i] = static_cast<std::uint16_t>(samples[i].label);
  }

  // Rows are claimed from a shared counter; each row is written by exactly one
  // thread, so the result does not depend on scheduling.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= m.rows) return;
      try {
        const Descriptor d = describe(samples[i].image, spec);
        float* dst = m.values.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) dst[j] = static_cast<float>(d[j]);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_lock);
        if (!failure) failure = std::current_exception();
        next = m.rows;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(m.rows)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return m;
}

void write_feature_cache(const fs::path& file, const FeatureMatrix& m) {
  if (m.values.size() != m.rows * m.cols || m.labels.size() != m.rows) {
    throw Error(ErrorCode::DimensionMismatch, "write_feature_cache: inconsistent matrix");
  }
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  // Write to a sibling and rename so a crash never leaves a torn cache entry.
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write("GDC1", 4);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(m.spec.kind));
    put<std::uint8_t>(out, m.spec.pyramid ? 1 : 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols));
    out.write(reinterpret_cast<const char*>(m.values.data()), static_cast<std::streamsize>(m.values.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(m.labels.data()),
              static_cast<std::streamsize>(m.labels.size() * sizeof(std::uint16_t)));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, file);
}

FeatureMatrix read_feature_cache(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "GDC1", 4) != 0) {
    throw Error(ErrorCode::FormatError, "not a GDC1 feature cache: " + file.string());
  }
  const auto kind = get<std::uint8_t>(in, file);
  const auto pyramid = get<std::uint8_t>(in, file);
  if (kind > static_cast<std::uint8_t>(DescriptorKind::GIST) || pyramid > 1) {
    throw Error(ErrorCode::FormatError, "bad descriptor header in " + file.string());
  }
  FeatureMatrix m;
  m.spec = {static_cast<DescriptorKind>(kind), pyramid == 1};
  m.rows = get<std::uint32_t>(in, file);
  m.cols = get<std::uint32_t>(in, file);
  if (m.cols != m.spec.dimension()) {
    throw Error(ErrorCode::FormatError, "cache dimension " + std::to_string(m.cols) + " does not match " +
                                            m.spec.name() + " (" + std::to_string(m.spec.dimension()) + ")");
  }
  m.values.resize(m.rows * m.cols);
  m.labels.resize(m.rows);
  if (!in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(m.values.size() * sizeof(float))) ||
      !in.read(reinterpret_cast<char*>(m.labels.data()),
               static_cast<std::streamsize>(m.labels.size() * sizeof(std::uint16_t)))) {
    throw Error(ErrorCode::FormatError, "feature cache truncated: " + file.string());
  }
  return m;
}

fs::path cache_path(const fs::path& dir, std::uint64_t hash, const DescriptorSpec& spec) {
  std::ostringstream name;
  name << std::hex << std::setw(16) << std::setfill('0') << hash << '_' << spec.name() << ".gdc";
  return dir / name.str();
}

FeatureMatrix cached_features(const std::vector<Sample>& samples, const DescriptorSpec& spec, const fs::path& cache_dir,
                              int workers, bool* hit) {
  if (hit) *hit = false;
  if (cache_dir.empty()) return extract_features(samples, spec, workers);
  const fs::path file = cache_path(cache_dir, dataset_hash(samples), spec);
  std::error_code ec;
  if (fs::exists(file, ec)) {
    FeatureMatrix m = read_feature_cache(file);
    bool labels_match = m.rows == samples.size();
    for (std::size_t i = 0; labels_match && i < m.rows; ++i) labels_match = m.labels[i] == samples[i].label;
    if (m.spec == spec && labels_match) {
      if (hit) *hit = true;
      return m;
    }
  }
  FeatureMatrix m = extract_features(samples, spec, workers);
  write_feature_cache(file, m);
  return m;
}

}  // namespace gd
