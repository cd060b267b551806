#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glyphdesc/image.hpp"

namespace gd {

inline constexpr int kAlphabetClasses = 28;

enum class Gender : std::uint8_t { Female, Male, Unknown };

[[nodiscard]] std::string_view to_string(Gender g) noexcept;
/// "female"/"f" and "male"/"m", case-insensitive; anything else is Unknown.
[[nodiscard]] Gender parse_gender(std::string_view s) noexcept;

struct Sample {
  GrayImage image;
  int label = 0;
  std::string writer_id;
  Gender gender = Gender::Unknown;
  std::string id;  // relative path for ingested samples, synthetic name otherwise
};

struct IngestWarning {
  std::string path;
  std::string message;
};

struct IngestResult {
  std::vector<Sample> samples;
  std::vector<IngestWarning> warnings;
};

/// Loads root/<class_id>/<writer>_<rep>.pgm, resizing to 64x64, and joins an
/// optional root/metadata.csv (header "writer_id,gender"). Samples come back
/// sorted by (class, writer, rep). Unreadable files become warnings.
[[nodiscard]] IngestResult ingest(const std::filesystem::path& root, int num_classes = kAlphabetClasses);

struct SplitSpec {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  std::uint64_t seed = 0;
};

/// Sample indices per split, each ascending.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Stratified split. Every class gets floor(share * n) per split plus at most
/// one of its leftover samples per split, so each split is within one sample
/// of its exact share. Leftovers go to whichever split is furthest below its
/// global target (floor(0.70 N), floor(0.15 N), remainder).
[[nodiscard]] SplitIndices split(const std::vector<int>& labels, const SplitSpec& spec);
[[nodiscard]] SplitIndices split(const std::vector<Sample>& samples, const SplitSpec& spec);

/// Writes "sample_path,split" rows.
void write_split_manifest(const std::filesystem::path& file, const std::vector<Sample>& samples,
                          const SplitIndices& parts);

struct GenderCounts {
  std::size_t female = 0;
  std::size_t male = 0;
  std::size_t unknown = 0;
};
[[nodiscard]] GenderCounts count_genders(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx);

/// Jitter ranges for the synthetic glyph generator.
struct GlyphParams {
  double max_rotation_deg = 8.0;
  double max_shift_px = 4.0;
  double min_stroke_px = 2.0;
  double max_stroke_px = 4.0;
  double noise_sigma = 0.03;
};

/// Classes whose prototypes share a skeleton and differ only in dots.
[[nodiscard]] const std::vector<std::vector<int>>& confusable_groups();

/// n_per_class jittered renderings of each of the 28 prototypes, class-major.
[[nodiscard]] std::vector<Sample> synth_glyphs(int n_per_class, std::uint64_t seed, const GlyphParams& params = {});

/// Same generator restricted to the given classes; labels are kept as-is.
[[nodiscard]] std::vector<Sample> synth_glyphs(int n_per_class, std::uint64_t seed, const GlyphParams& params,
                                               const std::vector<int>& classes);

}  // namespace gd
