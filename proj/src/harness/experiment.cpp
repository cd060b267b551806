#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "glyphdesc/error.hpp"
#include "glyphdesc/harness.hpp"

namespace gd {

LoadedData load_dataset(const DatasetSource& src) {
  LoadedData d;
  if (src.kind == DatasetSource::Kind::Directory) {
    IngestResult r = ingest(src.directory);
    d.samples = std::move(r.samples);
    d.warnings = std::move(r.warnings);
  } else if (src.classes.empty()) {
    d.samples = synth_glyphs(src.per_class, src.seed, src.glyph);
  } else {
    d.samples = synth_glyphs(src.per_class, src.seed, src.glyph, src.classes);
  }
  return d;
}

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& labels, int K) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "confusion: " + std::to_string(predictions.size()) + " predictions for " +
                                               std::to_string(labels.size()) + " labels");
  }
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "confusion: K must be >= 1");
  ConfusionMatrix m(static_cast<std::size_t>(K), std::vector<int>(static_cast<std::size_t>(K), 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i];
    const int p = predictions[i];
    if (t < 0 || t >= K || p < 0 || p >= K) throw Error(ErrorCode::BadLabel, "confusion: label outside [0, K)");
    ++m[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return m;
}

double CellResult::accuracy() const noexcept {
  if (test_count == 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(errors) / static_cast<double>(test_count));
}

const CellResult* ExperimentReport::cell(const DescriptorSpec& d, ClassifierKind c) const {
  for (const CellResult& r : cells) {
    if (r.descriptor == d && r.classifier == c) return &r;
  }
  return nullptr;
}

std::size_t ExperimentReport::failed_cells() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; }));
}

const CellResult* ExperimentReport::best_cell() const {
  const CellResult* best = nullptr;
  for (const CellResult& c : cells) {
    if (c.ok && (!best || c.accuracy() > best->accuracy())) best = &c;
  }
  return best;
}

ConfusionMatrix ExperimentReport::confusion_for(const CellResult& c) const {
  std::vector<int> truth;
  truth.reserve(test_samples.size());
  for (const Sample& s : test_samples) truth.push_back(s.label);
  return confusion(c.predictions, truth, num_classes);
}

SplitSets make_split_sets(const FeatureMatrix& features, const std::vector<Sample>& samples,
                          const SplitIndices& parts) {
  if (features.rows != samples.size()) {
    throw Error(ErrorCode::LengthMismatch, "make_split_sets: feature rows do not match samples");
  }
  // Classifiers see compact labels so classes absent from the data cost nothing.
  std::map<int, int> compact;
  for (const Sample& s : samples) compact.emplace(s.label, 0);
  SplitSets out;
  for (auto& [label, idx] : compact) {
    idx = static_cast<int>(out.original.size());
    out.original.push_back(label);
  }
  const int K = static_cast<int>(out.original.size());
  auto labels_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<int> y;
    y.reserve(idx.size());
    for (std::size_t i : idx) y.push_back(compact.at(samples.at(i).label));
    return y;
  };
  out.train = LabeledSet(features.gather(parts.train), labels_of(parts.train), K);
  out.val = LabeledSet(features.gather(parts.val), labels_of(parts.val), K);
  out.test = LabeledSet(features.gather(parts.test), labels_of(parts.test), K);
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const LoadedData data = load_dataset(cfg.dataset);
  if (progress) {
    for (const IngestWarning& w : data.warnings) progress("warning: " + w.path + ": " + w.message);
    progress("dataset: " + std::to_string(data.samples.size()) + " samples");
  }
  const SplitIndices parts = split(data.samples, SplitSpec{0.70, 0.15, 0.15, cfg.split_seed});
  return run_experiment(cfg, data.samples, parts, progress);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::vector<Sample>& samples,
                                const SplitIndices& parts, const ProgressFn& progress) {
  cfg.validate();
  ExperimentReport report;
  report.descriptors = cfg.descriptors;
  report.classifiers = cfg.classifiers;
  int max_label = 0;
  for (const Sample& s : samples) max_label = std::max(max_label, s.label);
  report.num_classes = std::max(kAlphabetClasses, max_label + 1);
  for (std::size_t i : parts.test) report.test_samples.push_back(samples.at(i));

  for (const DescriptorSpec& d : cfg.descriptors) {
    bool hit = false;
    FeatureMatrix features;
    std::string failure;
    try {
      features = cached_features(samples, d, cfg.cache_dir, cfg.workers, &hit);
    } catch (const std::exception& e) {
      failure = std::string("feature extraction failed: ") + e.what();
    }
    if (progress) progress(d.name() + (failure.empty() ? (hit ? ": features from cache" : ": features extracted") : ": " + failure));

    std::vector<CellResult> row(cfg.classifiers.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c].descriptor = d;
      row[c].classifier = cfg.classifiers[c];
      row[c].test_count = parts.test.size();
      row[c].error = failure;
    }
    if (failure.empty()) {
      const SplitSets sets = make_split_sets(features, samples, parts);

      std::atomic<std::size_t> next{0};
      std::mutex log_lock;
      auto work = [&] {
        for (;;) {
          const std::size_t c = next.fetch_add(1);
          if (c >= row.size()) return;
          CellResult& cell = row[c];
          try {
            const GridResult g = grid_search(sets.train, sets.val, cell.classifier, cfg.grid);
            const RefitResult r = refit_and_test(sets.train, sets.val, sets.test, cell.classifier, g.best);
            cell.params = g.best;
            cell.val_accuracy = g.val_accuracy;
            cell.predictions.reserve(r.predictions.size());
            for (std::size_t i = 0; i < r.predictions.size(); ++i) {
              const int p = sets.original[static_cast<std::size_t>(r.predictions[i])];
              cell.predictions.push_back(p);
              if (p != samples[parts.test[i]].label) ++cell.errors;
            }
            cell.ok = true;
          } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
          }
          if (progress) {
            const std::lock_guard<std::mutex> lock(log_lock);
            progress("  " + d.name() + " / " + std::string(display_name(cell.classifier)) + ": " +
                     (cell.ok ? format_percent(cell.accuracy()) + " (" + format_params(cell.classifier, cell.params) + ")"
                              : "FAILED " + cell.error));
          }
        }
      };
      const int n_threads = std::max(1, std::min<int>(cfg.workers, static_cast<int>(row.size())));
      std::vector<std::thread> pool;
      for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
      work();
      for (auto& t : pool) t.join();
    }
    for (CellResult& c : row) report.cells.push_back(std::move(c));
  }
  return report;
}

}  // namespace gd
