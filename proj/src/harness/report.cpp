#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "glyphdesc/error.hpp"
#include "glyphdesc/harness.hpp"
#include "glyphdesc/pgm.hpp"

namespace gd {

namespace fs = std::filesystem;

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", value);
  return buf;
}

namespace {

std::string fixed2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string signed2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f", value);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string file_safe(const std::string& id) {
  std::string out = id;
  if (out.size() > 4 && out.compare(out.size() - 4, 4, ".pgm") == 0) out.resize(out.size() - 4);
  for (char& c : out) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
    if (!keep) c = '-';
  }
  return out;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + file.string());
}

}  // namespace

RenderedReport report_render(const ExperimentReport& report) {
  std::size_t first = std::string("Descriptor").size();
  for (const auto& d : report.descriptors) first = std::max(first, d.name().size());
  first += 2;
  std::vector<std::size_t> widths;
  for (ClassifierKind k : report.classifiers) widths.push_back(std::max<std::size_t>(display_name(k).size(), 7) + 2);

  std::ostringstream table;
  std::string header = pad("Descriptor", first);
  for (std::size_t c = 0; c < report.classifiers.size(); ++c) {
    header += pad(std::string(display_name(report.classifiers[c])), widths[c]);
  }
  while (!header.empty() && header.back() == ' ') header.pop_back();
  table << header << '\n';

  std::ostringstream csv;
  csv << "descriptor,pyramid,classifier,params,accuracy,status\n";
  for (const DescriptorSpec& d : report.descriptors) {
    std::string line = pad(d.name(), first);
    for (std::size_t c = 0; c < report.classifiers.size(); ++c) {
      const CellResult* cell = report.cell(d, report.classifiers[c]);
      const std::string text = !cell ? "-" : cell->ok ? format_percent(cell->accuracy()) : "failed";
      line += pad(text, widths[c]);
      if (!cell) continue;
      csv << to_string(d.kind) << ',' << (d.pyramid ? 1 : 0) << ',' << to_string(cell->classifier) << ',';
      if (cell->ok) {
        csv << format_params(cell->classifier, cell->params) << ',' << fixed2(cell->accuracy()) << ",ok\n";
      } else {
        csv << ",,failed\n";
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    table << line << '\n';
  }
  return {table.str(), csv.str()};
}

std::vector<PyramidDelta> pyramid_deltas(const ExperimentReport& report) {
  std::vector<PyramidDelta> out;
  for (const DescriptorSpec& d : report.descriptors) {
    if (d.pyramid) continue;
    const DescriptorSpec x7{d.kind, true};
    if (std::find(report.descriptors.begin(), report.descriptors.end(), x7) == report.descriptors.end()) continue;
    for (ClassifierKind k : report.classifiers) {
      const CellResult* base = report.cell(d, k);
      const CellResult* pyr = report.cell(x7, k);
      if (!base || !pyr || !base->ok || !pyr->ok) continue;
      out.push_back({d.kind, k, base->accuracy(), pyr->accuracy()});
    }
  }
  return out;
}

RenderedReport render_deltas(const std::vector<PyramidDelta>& deltas) {
  std::ostringstream text;
  std::ostringstream csv;
  csv << "descriptor,classifier,base,pyramid,delta\n";
  for (const PyramidDelta& d : deltas) {
    const std::string name(to_string(d.kind));
    // Rounding both sides first keeps the delta consistent with the table.
    const double base = std::stod(fixed2(d.base));
    const double pyr = std::stod(fixed2(d.pyramid));
    text << pad(name + " -> " + name + "7", 16) << pad(std::string(display_name(d.classifier)), 14)
         << pad(format_percent(base), 9) << "-> " << pad(format_percent(pyr), 9) << signed2(pyr - base) << '\n';
    csv << name << ',' << to_string(d.classifier) << ',' << fixed2(base) << ',' << fixed2(pyr) << ','
        << signed2(pyr - base) << '\n';
  }
  return {text.str(), csv.str()};
}

std::string render_confusion(const ConfusionMatrix& m) {
  std::ostringstream out;
  out << "true\\pred";
  for (std::size_t j = 0; j < m.size(); ++j) out << ' ' << j;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << i;
    for (int v : m[i]) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

std::size_t dump_misclassified(const ExperimentReport& report, const CellResult& cell, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  if (cell.predictions.size() != report.test_samples.size()) {
    throw Error(ErrorCode::LengthMismatch, "dump_misclassified: predictions do not match the test set");
  }
  std::ostringstream index;
  std::size_t written = 0;
  for (std::size_t i = 0; i < cell.predictions.size(); ++i) {
    const Sample& s = report.test_samples[i];
    if (cell.predictions[i] == s.label) continue;
    const std::string name = "true" + std::to_string(s.label) + "_pred" + std::to_string(cell.predictions[i]) + "_" +
                             file_safe(s.id) + ".pgm";
    write_pgm(out_dir / name, s.image);
    index << name << ',' << s.label << ',' << cell.predictions[i] << ',' << s.id << '\n';
    ++written;
  }
  write_text(out_dir / "index.csv", index.str());
  return written;
}

std::size_t dump_misclassified(const ExperimentReport& report, const fs::path& out_dir) {
  if (const CellResult* best = report.best_cell()) return dump_misclassified(report, *best, out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_text(out_dir / "index.csv", "");
  return 0;
}

void write_report_files(const ExperimentReport& report, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  const RenderedReport main = report_render(report);
  const RenderedReport deltas = render_deltas(pyramid_deltas(report));
  std::string text = main.table;
  if (!deltas.table.empty()) text += "\nPyramid improvement (X7 - X):\n" + deltas.table;
  const CellResult* best = report.best_cell();
  if (best) {
    text += "\nBest cell: " + best->descriptor.name() + " / " + std::string(display_name(best->classifier)) + " " +
            format_percent(best->accuracy()) + " (" + std::to_string(best->errors) + " of " +
            std::to_string(best->test_count) + " misclassified)\n";
  }
  for (const CellResult& c : report.cells) {
    if (!c.ok) text += "failed: " + c.descriptor.name() + " / " + std::string(display_name(c.classifier)) + ": " + c.error + "\n";
  }
  write_text(out_dir / "report.txt", text);
  write_text(out_dir / "report.csv", main.csv);
  write_text(out_dir / "deltas.csv", deltas.csv);
  if (best) write_text(out_dir / "confusion.txt", render_confusion(report.confusion_for(*best)));
  dump_misclassified(report, out_dir / "misclassified");
}

}  // namespace gd
