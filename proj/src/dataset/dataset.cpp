#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "glyphdesc/dataset.hpp"
#include "glyphdesc/error.hpp"
#include "glyphdesc/pgm.hpp"
#include "glyphdesc/random.hpp"

namespace gd {

namespace fs = std::filesystem;

std::string_view to_string(Gender g) noexcept {
  switch (g) {
    case Gender::Female: return "female";
    case Gender::Male: return "male";
    case Gender::Unknown: break;
  }
  return "unknown";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_int(std::string_view s, long& out) {
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && !s.empty();
}

struct FileKey {
  int label;
  std::string writer;
  long rep_num;
  std::string rep;
  fs::path path;
};

// Splits "<writer>_<rep>" at the last underscore; without one the whole stem
// is the writer.
std::pair<std::string, std::string> writer_and_rep(const std::string& stem) {
  const auto cut = stem.rfind('_');
  if (cut == std::string::npos) return {stem, ""};
  return {stem.substr(0, cut), stem.substr(cut + 1)};
}

std::map<std::string, Gender> read_metadata(const fs::path& file, std::vector<IngestWarning>& warnings) {
  std::map<std::string, Gender> out;
  std::ifstream in(file);
  if (!in) {
    warnings.push_back({file.string(), "metadata file unreadable"});
    return out;
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (line_no == 1) {
      if (comma != std::string_view::npos && lower(trim(row.substr(0, comma))) == "writer_id") continue;
    }
    if (comma == std::string_view::npos) {
      warnings.push_back({file.string(), "line " + std::to_string(line_no) + ": expected writer_id,gender"});
      continue;
    }
    const std::string writer(trim(row.substr(0, comma)));
    out[writer] = parse_gender(trim(row.substr(comma + 1)));
  }
  return out;
}

}  // namespace

Gender parse_gender(std::string_view s) noexcept {
  const std::string v = lower(trim(s));
  if (v == "female" || v == "f") return Gender::Female;
  if (v == "male" || v == "m") return Gender::Male;
  return Gender::Unknown;
}

IngestResult ingest(const fs::path& root, int num_classes) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::IoError, "ingest: not a directory: " + root.string());

  IngestResult result;
  std::vector<FileKey> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    long label = -1;
    if (!parse_int(name, label) || label < 0 || label >= num_classes) {
      throw Error(ErrorCode::BadLabel, "ingest: class directory '" + name + "' is not an integer in [0, " +
                                           std::to_string(num_classes) + ")");
    }
    for (const auto& f : fs::directory_iterator(entry.path())) {
      if (!f.is_regular_file()) continue;
      const auto [writer, rep] = writer_and_rep(f.path().stem().string());
      long rep_num = 0;
      if (!parse_int(rep, rep_num)) rep_num = -1;
      files.push_back({static_cast<int>(label), writer, rep_num, rep, f.path()});
    }
  }
  std::sort(files.begin(), files.end(), [](const FileKey& a, const FileKey& b) {
    return std::tie(a.label, a.writer, a.rep_num, a.rep) < std::tie(b.label, b.writer, b.rep_num, b.rep);
  });

  std::map<std::string, Gender> genders;
  const fs::path meta = root / "metadata.csv";
  if (fs::exists(meta, ec)) genders = read_metadata(meta, result.warnings);

  for (const FileKey& f : files) {
    const std::string rel = fs::relative(f.path, root, ec).generic_string();
    try {
      GrayImage img = read_pgm(f.path);
      if (img.width() != kWindowSize || img.height() != kWindowSize) {
        img = resize_bilinear(img, kWindowSize, kWindowSize);
      }
      Sample s;
      s.image = std::move(img);
      s.label = f.label;
      s.writer_id = f.writer;
      const auto g = genders.find(f.writer);
      s.gender = g == genders.end() ? Gender::Unknown : g->second;
      s.id = rel.empty() ? f.path.string() : rel;
      result.samples.push_back(std::move(s));
    } catch (const Error& e) {
      result.warnings.push_back({f.path.string(), e.what()});
    }
  }
  if (result.samples.empty()) throw Error(ErrorCode::EmptyDataset, "ingest: no readable samples under " + root.string());
  return result;
}

SplitIndices split(const std::vector<int>& labels, const SplitSpec& spec) {
  const std::array<double, 3> ratio{spec.train, spec.val, spec.test};
  for (double r : ratio) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "split: ratios must be non-negative");
  }
  if (std::abs(ratio[0] + ratio[1] + ratio[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split: ratios must sum to 1");
  }
  if (labels.empty()) throw Error(ErrorCode::EmptyDataset, "split: no samples");

  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  for (const auto& [label, idx] : members) {
    if (idx.size() < 3) {
      throw Error(ErrorCode::ClassTooSmall,
                  "split: class " + std::to_string(label) + " has " + std::to_string(idx.size()) + " samples, need 3");
    }
  }

  // The epsilon keeps exact products such as 0.7 * 100 from flooring to 69.
  auto share = [](double r, std::size_t n) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
  };
  const std::size_t total = labels.size();
  std::array<long, 3> deficit{};
  deficit[0] = static_cast<long>(share(ratio[0], total));
  deficit[1] = static_cast<long>(share(ratio[1], total));
  deficit[2] = static_cast<long>(total) - deficit[0] - deficit[1];

  std::vector<std::array<std::size_t, 3>> counts;
  for (const auto& [label, idx] : members) {
    std::array<std::size_t, 3> c{};
    for (int p = 0; p < 3; ++p) c[p] = share(ratio[p], idx.size());
    for (int p = 0; p < 3; ++p) deficit[p] -= static_cast<long>(c[p]);
    counts.push_back(c);
  }
  // Leftovers (at most two per class) go one per split, to the split that is
  // furthest below its global target; ties favour test, then val.
  std::size_t ci = 0;
  for (const auto& [label, idx] : members) {
    std::array<std::size_t, 3>& c = counts[ci++];
    std::size_t left = idx.size() - c[0] - c[1] - c[2];
    std::array<bool, 3> used{};
    while (left > 0) {
      int best = -1;
      for (int p = 2; p >= 0; --p) {
        if (used[p]) continue;
        if (best < 0 || deficit[p] > deficit[best]) best = p;
      }
      used[best] = true;
      ++c[best];
      --deficit[best];
      --left;
    }
  }

  Rng rng(spec.seed);
  SplitIndices out;
  ci = 0;
  for (auto& [label, idx] : members) {
    const auto& c = counts[ci++];
    shuffle(idx, rng);
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<long>(c[0]));
    out.val.insert(out.val.end(), idx.begin() + static_cast<long>(c[0]), idx.begin() + static_cast<long>(c[0] + c[1]));
    out.test.insert(out.test.end(), idx.begin() + static_cast<long>(c[0] + c[1]), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitIndices split(const std::vector<Sample>& samples, const SplitSpec& spec) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const Sample& s : samples) labels.push_back(s.label);
  return split(labels, spec);
}

void write_split_manifest(const fs::path& file, const std::vector<Sample>& samples, const SplitIndices& parts) {
  std::vector<std::string_view> tag(samples.size());
  auto mark = [&](const std::vector<std::size_t>& idx, std::string_view name) {
    for (std::size_t i : idx) {
      if (i >= samples.size()) throw Error(ErrorCode::InvalidArgument, "write_split_manifest: index out of range");
      tag[i] = name;
    }
  };
  mark(parts.train, "train");
  mark(parts.val, "val");
  mark(parts.test, "test");
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "write_split_manifest: cannot open " + file.string());
  out << "sample_path,split\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (tag[i].empty()) continue;
    out << samples[i].id << ',' << tag[i] << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write_split_manifest: write failed for " + file.string());
}

GenderCounts count_genders(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx) {
  GenderCounts c;
  for (std::size_t i : idx) {
    switch (samples.at(i).gender) {
      case Gender::Female: ++c.female; break;
      case Gender::Male: ++c.male; break;
      case Gender::Unknown: ++c.unknown; break;
    }
  }
  return c;
}

}  // namespace gd
