#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "glyphdesc/error.hpp"
#include "glyphdesc/formproc.hpp"
#include "glyphdesc/harness.hpp"
#include "glyphdesc/pgm.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
  int workers = 0;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("-c,--config", a.file, "Config file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", a.sets, "Override one setting, e.g. --set synthetic.per_class=20");
  cmd->add_option("-j,--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
}

gd::ExperimentConfig resolve_config(const ConfigArgs& a) {
  gd::ExperimentConfig cfg = a.file.empty() ? gd::default_config() : gd::load_config(a.file);
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw gd::Error(gd::ErrorCode::InvalidArgument, "--set expects key=value, got '" + kv + "'");
    gd::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.workers > 0) cfg.workers = a.workers;
  cfg.validate();
  return cfg;
}

gd::DescriptorSpec descriptor_arg(const std::string& text) {
  const auto d = gd::parse_descriptor_spec(text);
  if (!d) throw gd::Error(gd::ErrorCode::InvalidArgument, "unknown descriptor '" + text + "'");
  return *d;
}

gd::ClassifierKind classifier_arg(const std::string& text) {
  const auto k = gd::parse_classifier_kind(text);
  if (!k) throw gd::Error(gd::ErrorCode::InvalidArgument, "unknown classifier '" + text + "'");
  return *k;
}

std::pair<int, int> parse_pair(const std::string& text, char sep, const char* what) {
  const auto at = text.find(sep);
  try {
    if (at == std::string::npos) throw std::invalid_argument(what);
    std::size_t used = 0;
    const int a = std::stoi(text.substr(0, at), &used);
    if (used != at) throw std::invalid_argument(what);
    const std::string rest = text.substr(at + 1);
    const int b = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(what);
    return {a, b};
  } catch (const std::exception&) {
    throw gd::Error(gd::ErrorCode::InvalidArgument, std::string(what) + " must look like A" + sep + "B, got '" + text + "'");
  }
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

struct Loaded {
  gd::LoadedData data;
  gd::SplitIndices parts;
};

Loaded load_and_split(const gd::ExperimentConfig& cfg) {
  Loaded l{gd::load_dataset(cfg.dataset), {}};
  for (const auto& w : l.data.warnings) log_line("warning: " + w.path + ": " + w.message);
  l.parts = gd::split(l.data.samples, gd::SplitSpec{0.70, 0.15, 0.15, cfg.split_seed});
  std::cerr << "dataset: " << l.data.samples.size() << " samples (train " << l.parts.train.size() << ", val "
            << l.parts.val.size() << ", test " << l.parts.test.size() << ")\n";
  return l;
}

int cmd_synth(const fs::path& out, int per_class, std::uint64_t seed, const std::vector<int>& classes) {
  const auto samples = classes.empty() ? gd::synth_glyphs(per_class, seed) : gd::synth_glyphs(per_class, seed, {}, classes);
  fs::create_directories(out);
  std::ofstream meta(out / "metadata.csv");
  meta << "writer_id,gender\n";
  std::set<std::string> writers;
  for (const gd::Sample& s : samples) {
    const fs::path dir = out / std::to_string(s.label);
    fs::create_directories(dir);
    gd::write_pgm(dir / (s.writer_id + "_0.pgm"), s.image);
    if (writers.insert(s.writer_id).second) meta << s.writer_id << ',' << gd::to_string(s.gender) << '\n';
  }
  std::cout << "wrote " << samples.size() << " glyphs under " << out.string() << '\n';
  return kExitOk;
}

int cmd_synth_form(const fs::path& out, const std::string& grid, std::uint64_t seed) {
  const auto [rows, cols] = parse_pair(grid, 'x', "--grid");
  gd::GridSpec spec{rows, cols, 64 * cols, 64 * rows, 0};
  spec.validate();
  const auto glyphs = gd::synth_glyphs(1, seed);
  std::vector<gd::GrayImage> images;
  for (int i = 0; i < rows * cols; ++i) images.push_back(glyphs[static_cast<std::size_t>(i) % glyphs.size()].image);
  const gd::SyntheticForm form = gd::synth_form(spec, images, 24);
  // A mild perspective skew, as from a hand-held scan.
  const gd::Homography skew({0.97, 0.06, 20, -0.05, 1.02, 16, 0.8e-4, -0.6e-4, 1});
  gd::write_pgm(out, gd::warp_projective(form.page, skew, form.page.width() + 50, form.page.height() + 50));
  std::cout << "wrote a skewed " << rows << "x" << cols << " form page to " << out.string() << '\n';
  return kExitOk;
}

int cmd_extract(const gd::ExperimentConfig& cfg, const std::vector<std::string>& names, const fs::path& out_dir) {
  const Loaded l = load_and_split(cfg);
  const std::vector<gd::DescriptorSpec> specs = [&] {
    std::vector<gd::DescriptorSpec> v;
    for (const auto& n : names) v.push_back(descriptor_arg(n));
    return v.empty() ? cfg.descriptors : v;
  }();
  const fs::path dir = out_dir.empty() ? (cfg.cache_dir.empty() ? fs::path("cache") : cfg.cache_dir) : out_dir;
  const std::uint64_t hash = gd::dataset_hash(l.data.samples);
  for (const auto& spec : specs) {
    bool hit = false;
    const gd::FeatureMatrix m = gd::cached_features(l.data.samples, spec, dir, cfg.workers, &hit);
    std::cout << spec.name() << ": " << m.rows << " x " << m.cols << (hit ? " (cached) " : " ")
              << gd::cache_path(dir, hash, spec).string() << '\n';
  }
  return kExitOk;
}

int cmd_tune(const gd::ExperimentConfig& cfg, const std::string& desc, const std::string& clf) {
  const gd::DescriptorSpec spec = descriptor_arg(desc);
  const gd::ClassifierKind kind = classifier_arg(clf);
  const Loaded l = load_and_split(cfg);
  const gd::FeatureMatrix f = gd::cached_features(l.data.samples, spec, cfg.cache_dir, cfg.workers);
  const gd::SplitSets sets = gd::make_split_sets(f, l.data.samples, l.parts);
  const gd::GridResult g = gd::grid_search(sets.train, sets.val, kind, cfg.grid);
  std::cout << "params,val_accuracy\n";
  for (const gd::GridPoint& p : g.evaluated) {
    std::cout << gd::format_params(kind, p.params) << ',' << gd::format_percent(p.val_accuracy) << '\n';
  }
  std::cout << "best: " << gd::format_params(kind, g.best) << " (" << gd::format_percent(g.val_accuracy) << ")\n";
  return kExitOk;
}

int cmd_evaluate(gd::ExperimentConfig cfg, const std::string& desc, const std::string& clf, const std::string& model) {
  cfg.descriptors = {descriptor_arg(desc)};
  cfg.classifiers = {classifier_arg(clf)};
  const Loaded l = load_and_split(cfg);
  const gd::FeatureMatrix f = gd::cached_features(l.data.samples, cfg.descriptors[0], cfg.cache_dir, cfg.workers);
  const gd::SplitSets sets = gd::make_split_sets(f, l.data.samples, l.parts);
  const gd::GridResult g = gd::grid_search(sets.train, sets.val, cfg.classifiers[0], cfg.grid);
  const gd::RefitResult r = gd::refit_and_test(sets.train, sets.val, sets.test, cfg.classifiers[0], g.best);
  if (!model.empty()) gd::save_pipeline(r.pipeline, model);

  gd::ExperimentReport report;
  report.descriptors = cfg.descriptors;
  report.classifiers = cfg.classifiers;
  for (std::size_t i : l.parts.test) report.test_samples.push_back(l.data.samples[i]);
  gd::CellResult cell;
  cell.descriptor = cfg.descriptors[0];
  cell.classifier = cfg.classifiers[0];
  cell.ok = true;
  cell.params = g.best;
  cell.val_accuracy = g.val_accuracy;
  cell.test_count = l.parts.test.size();
  for (std::size_t i = 0; i < r.predictions.size(); ++i) {
    const int p = sets.original[static_cast<std::size_t>(r.predictions[i])];
    cell.predictions.push_back(p);
    if (p != report.test_samples[i].label) ++cell.errors;
  }
  report.cells.push_back(cell);
  gd::write_report_files(report, cfg.output_dir);
  std::cout << cell.descriptor.name() << " / " << gd::display_name(cell.classifier) << ": "
            << gd::format_percent(cell.accuracy()) << " (" << cell.errors << " of " << cell.test_count
            << " misclassified; " << gd::format_params(cell.classifier, cell.params) << ")\n";
  return kExitOk;
}

int cmd_run(const gd::ExperimentConfig& cfg) {
  const gd::ExperimentReport report = gd::run_experiment(cfg, log_line);
  gd::write_report_files(report, cfg.output_dir);
  std::cout << gd::report_render(report).table;
  const auto deltas = gd::render_deltas(gd::pyramid_deltas(report));
  if (!deltas.table.empty()) std::cout << "\nPyramid improvement (X7 - X):\n" << deltas.table;
  std::cout << "\nreports written to " << cfg.output_dir.string() << '\n';
  if (report.failed_cells() > 0) {
    std::cerr << report.failed_cells() << " of " << report.cells.size() << " cells failed\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_preprocess_form(const fs::path& input, const std::string& grid, const std::string& canonical, int margin,
                        const fs::path& out) {
  const auto [rows, cols] = parse_pair(grid, 'x', "--grid");
  const auto [w, h] = parse_pair(canonical, 'x', "--canonical");
  const gd::GridSpec spec{rows, cols, w, h, margin};
  spec.validate();
  const gd::FormCells cells = gd::process_form(gd::read_pgm(input), spec);
  fs::create_directories(out);
  std::ofstream qa(out / "qa.csv");
  if (!qa) throw gd::Error(gd::ErrorCode::IoError, "cannot write " + (out / "qa.csv").string());
  qa << "cell,flags\n";
  std::size_t flagged = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const auto i = static_cast<std::size_t>(r * cols + c);
      const std::string name = "r" + std::to_string(r) + "c" + std::to_string(c);
      gd::write_pgm(out / (name + ".pgm"), cells.cells[i]);
      qa << name << ',' << gd::format_flags(cells.flags[i]) << '\n';
      flagged += !cells.flags[i].empty();
    }
  std::cout << "wrote " << cells.cells.size() << " cells to " << out.string() << " (" << flagged << " flagged)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Window descriptors and classifiers for handwritten glyph recognition"};
  app.require_subcommand(1);

  ConfigArgs extract_cfg, tune_cfg, eval_cfg, run_cfg;

  auto* synth = app.add_subcommand("synth", "Write a synthetic glyph set (class/writer_rep.pgm) or a form page");
  fs::path synth_out;
  int per_class = 50;
  std::uint64_t synth_seed = 7;
  std::vector<int> synth_classes;
  std::string form_grid;
  synth->add_option("-o,--out", synth_out, "Output directory, or page file with --form")->required();
  synth->add_option("-n,--per-class", per_class, "Samples per class")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--classes", synth_classes, "Class subset")->delimiter(',')->check(CLI::Range(0, gd::kAlphabetClasses - 1));
  synth->add_option("--form", form_grid, "Write a warped RxC form page instead of a glyph set");

  auto* extract = app.add_subcommand("extract", "Extract descriptors into the feature cache");
  std::vector<std::string> extract_desc;
  fs::path extract_out;
  add_config_options(extract, extract_cfg);
  extract->add_option("-d,--descriptor", extract_desc, "Descriptors (default: those in the config)")->delimiter(',');
  extract->add_option("-o,--out", extract_out, "Cache directory (default: config cache or ./cache)");

  auto* tune = app.add_subcommand("tune", "Grid-search one descriptor/classifier pair on the validation split");
  std::string tune_desc, tune_clf;
  add_config_options(tune, tune_cfg);
  tune->add_option("-d,--descriptor", tune_desc, "Descriptor, e.g. SIFT7")->required();
  tune->add_option("-k,--classifier", tune_clf, "lr, ann, svm-linear or svm-rbf")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Tune, refit on train+val and test one cell");
  std::string eval_desc, eval_clf, eval_model;
  add_config_options(evaluate, eval_cfg);
  evaluate->add_option("-d,--descriptor", eval_desc, "Descriptor, e.g. SIFT7")->required();
  evaluate->add_option("-k,--classifier", eval_clf, "lr, ann, svm-linear or svm-rbf")->required();
  evaluate->add_option("--save-model", eval_model, "Write the refitted pipeline (GDM1)");

  auto* run = app.add_subcommand("run", "Run the full descriptor x classifier matrix and write reports");
  add_config_options(run, run_cfg);

  auto* form = app.add_subcommand("preprocess-form", "Deskew a scanned form and crop its grid cells");
  fs::path form_in, form_out;
  std::string grid = "1x1", canonical = "256x256";
  int margin = 0;
  form->add_option("input", form_in, "Form page (PGM)")->required()->check(CLI::ExistingFile);
  form->add_option("--grid", grid, "Rows x columns, e.g. 7x4")->required();
  form->add_option("--canonical", canonical, "Canonical form size WxH");
  form->add_option("--margin", margin, "Pixels trimmed from every cell side")->check(CLI::NonNegativeNumber);
  form->add_option("-o,--out", form_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*synth) {
      return form_grid.empty() ? cmd_synth(synth_out, per_class, synth_seed, synth_classes)
                               : cmd_synth_form(synth_out, form_grid, synth_seed);
    }
    if (*extract) return cmd_extract(resolve_config(extract_cfg), extract_desc, extract_out);
    if (*tune) return cmd_tune(resolve_config(tune_cfg), tune_desc, tune_clf);
    if (*evaluate) return cmd_evaluate(resolve_config(eval_cfg), eval_desc, eval_clf, eval_model);
    if (*run) return cmd_run(resolve_config(run_cfg));
    if (*form) return cmd_preprocess_form(form_in, grid, canonical, margin, form_out);
  } catch (const gd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}
