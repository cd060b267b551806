#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glyphdesc/classifiers.hpp"
#include "glyphdesc/dataset.hpp"
#include "glyphdesc/descriptors.hpp"

namespace gd {

// ---- configuration ---------------------------------------------------------

struct DatasetSource {
  enum class Kind { Synthetic, Directory };
  Kind kind = Kind::Synthetic;
  std::filesystem::path directory;
  std::uint64_t seed = 7;
  int per_class = 50;
  std::vector<int> classes;  // synthetic subset; empty means all 28
  GlyphParams glyph;
};

struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<DescriptorSpec> descriptors;
  std::vector<ClassifierKind> classifiers;
  ParamGrid grid;
  std::uint64_t split_seed = 0;
  std::filesystem::path output_dir = "results";
  std::filesystem::path cache_dir;  // empty disables the descriptor cache
  int workers = 1;

  /// Throws InvalidArgument for empty descriptor/classifier lists or bad values.
  void validate() const;
};

/// All ten table rows (HOG, HOG7, SIFT, ...) and all four classifiers.
[[nodiscard]] ExperimentConfig default_config();

/// Flat "key = value" lines; '#' starts a comment. Unknown keys are errors.
/// Keys: dataset (synthetic | directory path), synthetic.seed, synthetic.per_class,
/// synthetic.classes, synthetic.rotation, synthetic.shift, synthetic.noise,
/// descriptors, classifiers, grid.lambda, grid.C, grid.gamma, split.seed,
/// output, cache, workers.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = default_config());
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& file);
/// Applies one "key=value" override.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Canonical text form; parse_config(render_config(c)) == c.
[[nodiscard]] std::string render_config(const ExperimentConfig& cfg);

// ---- data and features -----------------------------------------------------

struct LoadedData {
  std::vector<Sample> samples;
  std::vector<IngestWarning> warnings;
};

[[nodiscard]] LoadedData load_dataset(const DatasetSource& src);

/// FNV-1a over sample count, labels and pixel bit patterns.
[[nodiscard]] std::uint64_t dataset_hash(const std::vector<Sample>& samples);

/// Descriptor matrix as stored in the cache: float32 values, row-major.
struct FeatureMatrix {
  DescriptorSpec spec;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;
  std::vector<std::uint16_t> labels;

  [[nodiscard]] Eigen::MatrixXd gather(const std::vector<std::size_t>& idx) const;
  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// Extracts every sample with `workers` threads. Values are rounded to
/// float32 so a fresh extraction and a cache hit are the same numbers.
[[nodiscard]] FeatureMatrix extract_features(const std::vector<Sample>& samples, const DescriptorSpec& spec,
                                             int workers = 1);

/// "GDC1" file: kind byte, pyramid byte, u32 N, u32 D, N*D f32, N u16 labels.
void write_feature_cache(const std::filesystem::path& file, const FeatureMatrix& m);
/// Throws FormatError on a bad header or a dimension that breaks the descriptor contract.
[[nodiscard]] FeatureMatrix read_feature_cache(const std::filesystem::path& file);
[[nodiscard]] std::filesystem::path cache_path(const std::filesystem::path& dir, std::uint64_t hash,
                                               const DescriptorSpec& spec);

/// Reads the cache entry when present, otherwise extracts and writes it.
[[nodiscard]] FeatureMatrix cached_features(const std::vector<Sample>& samples, const DescriptorSpec& spec,
                                            const std::filesystem::path& cache_dir, int workers,
                                            bool* hit = nullptr);

/// Train/val/test sets with labels compacted to 0..K'-1 over the classes
/// present; original[k] maps a compact label back.
struct SplitSets {
  LabeledSet train;
  LabeledSet val;
  LabeledSet test;
  std::vector<int> original;
};

[[nodiscard]] SplitSets make_split_sets(const FeatureMatrix& features, const std::vector<Sample>& samples,
                                        const SplitIndices& parts);

// ---- results ---------------------------------------------------------------

using ConfusionMatrix = std::vector<std::vector<int>>;

/// (i, j) counts true i predicted j. Throws LengthMismatch, BadLabel.
[[nodiscard]] ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& labels, int K);

struct CellResult {
  DescriptorSpec descriptor;
  ClassifierKind classifier = ClassifierKind::LR;
  bool ok = false;
  std::string error;
  Hyperparams params;
  double val_accuracy = 0.0;
  std::size_t test_count = 0;
  std::size_t errors = 0;
  std::vector<int> predictions;  // aligned with ExperimentReport::test_samples

  /// 100 * (1 - errors / test_count).
  [[nodiscard]] double accuracy() const noexcept;
};

struct ExperimentReport {
  std::vector<DescriptorSpec> descriptors;
  std::vector<ClassifierKind> classifiers;
  std::vector<CellResult> cells;  // descriptor-major
  int num_classes = kAlphabetClasses;
  std::vector<Sample> test_samples;

  [[nodiscard]] const CellResult* cell(const DescriptorSpec& d, ClassifierKind c) const;
  [[nodiscard]] std::size_t failed_cells() const;
  /// Highest test accuracy among successful cells, first in table order on ties.
  [[nodiscard]] const CellResult* best_cell() const;
  [[nodiscard]] ConfusionMatrix confusion_for(const CellResult& c) const;
};

using ProgressFn = std::function<void(const std::string&)>;

[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// Runs the matrix on data that is already loaded and split.
[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::vector<Sample>& samples,
                                              const SplitIndices& parts, const ProgressFn& progress = {});

// ---- rendering -------------------------------------------------------------

/// Two decimals and a percent sign: 94.28%.
[[nodiscard]] std::string format_percent(double value);

struct RenderedReport {
  std::string table;  // descriptors as rows, classifiers as columns
  std::string csv;    // descriptor,pyramid,classifier,params,accuracy,status
};

[[nodiscard]] RenderedReport report_render(const ExperimentReport& report);

struct PyramidDelta {
  DescriptorKind kind = DescriptorKind::SIFT;
  ClassifierKind classifier = ClassifierKind::LR;
  double base = 0.0;
  double pyramid = 0.0;
  [[nodiscard]] double delta() const noexcept { return pyramid - base; }
};

/// X7 minus X for every classifier where both cells succeeded.
[[nodiscard]] std::vector<PyramidDelta> pyramid_deltas(const ExperimentReport& report);
/// Text lines plus CSV (descriptor,classifier,base,pyramid,delta); deltas as "+26.76".
[[nodiscard]] RenderedReport render_deltas(const std::vector<PyramidDelta>& deltas);
[[nodiscard]] std::string render_confusion(const ConfusionMatrix& m);

/// Writes true<T>_pred<P>_<id>.pgm per error in `cell` plus index.csv
/// (file,true,predicted,id, no header). Returns the number of images.
std::size_t dump_misclassified(const ExperimentReport& report, const CellResult& cell,
                               const std::filesystem::path& out_dir);
/// Same for the best cell; an empty index when there is none.
std::size_t dump_misclassified(const ExperimentReport& report, const std::filesystem::path& out_dir);

/// report.txt, report.csv, deltas.csv, confusion.txt and misclassified/ under out_dir.
void write_report_files(const ExperimentReport& report, const std::filesystem::path& out_dir);

}  // namespace gd
