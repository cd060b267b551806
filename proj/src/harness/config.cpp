#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "glyphdesc/error.hpp"
#include "glyphdesc/harness.hpp"

namespace gd {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::InvalidArgument, "config: " + key + " = '" + value + "': " + why);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, value, "not a number");
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) out.push_back(parse_number<double>(key, item));
  if (out.empty()) bad(key, value, "empty list");
  return out;
}

// Shortest text that parses back to the same double.
std::string number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + number(x);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (descriptors.empty()) throw Error(ErrorCode::InvalidArgument, "config: no descriptors");
  if (classifiers.empty()) throw Error(ErrorCode::InvalidArgument, "config: no classifiers");
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "config: workers must be >= 1");
  if (dataset.kind == DatasetSource::Kind::Synthetic && dataset.per_class < 3) {
    throw Error(ErrorCode::InvalidArgument, "config: synthetic.per_class must be >= 3 for a three-way split");
  }
  if (dataset.kind == DatasetSource::Kind::Directory && dataset.directory.empty()) {
    throw Error(ErrorCode::InvalidArgument, "config: dataset directory is empty");
  }
  for (ClassifierKind k : classifiers) {
    if (grid.candidates(k).empty()) throw Error(ErrorCode::InvalidArgument, "config: empty grid for a classifier");
  }
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  for (DescriptorKind k : kAllDescriptorKinds) {
    c.descriptors.push_back({k, false});
    c.descriptors.push_back({k, true});
  }
  c.classifiers.assign(kAllClassifierKinds.begin(), kAllClassifierKinds.end());
  return c;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "dataset") {
    if (value == "synthetic") {
      c.dataset.kind = DatasetSource::Kind::Synthetic;
    } else {
      c.dataset.kind = DatasetSource::Kind::Directory;
      c.dataset.directory = value;
    }
  } else if (key == "synthetic.seed") {
    c.dataset.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "synthetic.per_class") {
    c.dataset.per_class = parse_number<int>(key, value);
  } else if (key == "synthetic.classes") {
    c.dataset.classes.clear();
    if (value != "all") {
      for (const std::string& item : split_list(value)) {
        const int k = parse_number<int>(key, item);
        if (k < 0 || k >= kAlphabetClasses) bad(key, value, "class out of range");
        c.dataset.classes.push_back(k);
      }
    }
  } else if (key == "synthetic.rotation") {
    c.dataset.glyph.max_rotation_deg = parse_number<double>(key, value);
  } else if (key == "synthetic.shift") {
    c.dataset.glyph.max_shift_px = parse_number<double>(key, value);
  } else if (key == "synthetic.noise") {
    c.dataset.glyph.noise_sigma = parse_number<double>(key, value);
  } else if (key == "descriptors") {
    c.descriptors.clear();
    if (value == "all") {
      c.descriptors = default_config().descriptors;
    } else {
      for (const std::string& item : split_list(value)) {
        const auto spec = parse_descriptor_spec(item);
        if (!spec) bad(key, value, "unknown descriptor '" + item + "'");
        c.descriptors.push_back(*spec);
      }
    }
  } else if (key == "classifiers") {
    c.classifiers.clear();
    if (value == "all") {
      c.classifiers.assign(kAllClassifierKinds.begin(), kAllClassifierKinds.end());
    } else {
      for (const std::string& item : split_list(value)) {
        const auto kind = parse_classifier_kind(item);
        if (!kind) bad(key, value, "unknown classifier '" + item + "'");
        c.classifiers.push_back(*kind);
      }
    }
  } else if (key == "grid.lambda") {
    c.grid.lambda = parse_doubles(key, value);
  } else if (key == "grid.C") {
    c.grid.C = parse_doubles(key, value);
  } else if (key == "grid.gamma") {
    c.grid.gamma = parse_doubles(key, value);
  } else if (key == "split.seed") {
    c.split_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "output") {
    c.output_dir = value;
  } else if (key == "cache") {
    c.cache_dir = value;
  } else if (key == "workers") {
    c.workers = parse_number<int>(key, value);
  } else {
    throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig c) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + file.string());
  return parse_config(in);
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream out;
  if (c.dataset.kind == DatasetSource::Kind::Synthetic) {
    out << "dataset = synthetic\n";
  } else {
    out << "dataset = " << c.dataset.directory.string() << "\n";
  }
  out << "synthetic.seed = " << c.dataset.seed << "\n";
  out << "synthetic.per_class = " << c.dataset.per_class << "\n";
  std::string classes;
  for (int k : c.dataset.classes) classes += (classes.empty() ? "" : ",") + std::to_string(k);
  out << "synthetic.classes = " << (classes.empty() ? "all" : classes) << "\n";
  out << "synthetic.rotation = " << number(c.dataset.glyph.max_rotation_deg) << "\n";
  out << "synthetic.shift = " << number(c.dataset.glyph.max_shift_px) << "\n";
  out << "synthetic.noise = " << number(c.dataset.glyph.noise_sigma) << "\n";
  std::string descs;
  for (const auto& d : c.descriptors) descs += (descs.empty() ? "" : ",") + d.name();
  out << "descriptors = " << descs << "\n";
  std::string clfs;
  for (ClassifierKind k : c.classifiers) clfs += (clfs.empty() ? "" : ",") + std::string(to_string(k));
  out << "classifiers = " << clfs << "\n";
  out << "grid.lambda = " << join_numbers(c.grid.lambda) << "\n";
  out << "grid.C = " << join_numbers(c.grid.C) << "\n";
  out << "grid.gamma = " << join_numbers(c.grid.gamma) << "\n";
  out << "split.seed = " << c.split_seed << "\n";
  out << "output = " << c.output_dir.string() << "\n";
  if (!c.cache_dir.empty()) out << "cache = " << c.cache_dir.string() << "\n";
  out << "workers = " << c.workers << "\n";
  return out.str();
}

}  // namespace gd
