#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "glyphdesc/classifiers.hpp"
#include "glyphdesc/error.hpp"

namespace gd {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view display_name(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::LR: return "LR";
    case ClassifierKind::ANN: return "ANN";
    case ClassifierKind::SvmLinear: return "SVM (Linear)";
    case ClassifierKind::SvmRbf: return "SVM (RBF)";
  }
  return "?";
}

std::string_view to_string(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::LR: return "lr";
    case ClassifierKind::ANN: return "ann";
    case ClassifierKind::SvmLinear: return "svm-linear";
    case ClassifierKind::SvmRbf: return "svm-rbf";
  }
  return "?";
}

std::optional<ClassifierKind> parse_classifier_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "lr") return ClassifierKind::LR;
  if (s == "ann") return ClassifierKind::ANN;
  if (s == "svm-linear" || s == "linear") return ClassifierKind::SvmLinear;
  if (s == "svm-rbf" || s == "rbf") return ClassifierKind::SvmRbf;
  return std::nullopt;
}

LabeledSet::LabeledSet(MatrixXd x, std::vector<int> labels, int classes)
    : X(std::move(x)), y(std::move(labels)), K(classes) {
  validate();
}

void LabeledSet::validate() const {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "labeled set needs K >= 1");
  if (X.rows() < 1) throw Error(ErrorCode::EmptyDataset, "labeled set is empty");
  if (static_cast<Index>(y.size()) != X.rows()) throw Error(ErrorCode::LengthMismatch, "one label per row required");
  for (int v : y) {
    if (v < 0 || v >= K) throw Error(ErrorCode::BadLabel, "label outside [0, K)");
  }
}

LabeledSet concat(const LabeledSet& a, const LabeledSet& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "concat: dimensions differ");
  LabeledSet out;
  out.K = std::max(a.K, b.K);
  out.X.resize(a.size() + b.size(), a.dim());
  out.X.topRows(a.size()) = a.X;
  out.X.bottomRows(b.size()) = b.X;
  out.y = a.y;
  out.y.insert(out.y.end(), b.y.begin(), b.y.end());
  return out;
}

Standardizer Standardizer::fit(const MatrixXd& X) {
  if (X.rows() < 1) throw Error(ErrorCode::EmptyDataset, "standardizer needs data");
  Standardizer s;
  s.mean = X.colwise().mean();
  s.scale.resize(X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - s.mean(j)).square().mean();
    const double sd = std::sqrt(var);
    s.scale(j) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

MatrixXd Standardizer::apply(const MatrixXd& X) const {
  if (empty()) return X;
  if (X.cols() != mean.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer: dimension differs");
  return (X.rowwise() - mean).array().rowwise() / scale.array();
}

LabeledSet Standardizer::apply(const LabeledSet& s) const {
  LabeledSet out;
  out.X = apply(s.X);
  out.y = s.y;
  out.K = s.K;
  return out;
}

namespace {

std::string number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string format_params(ClassifierKind kind, const Hyperparams& p) {
  switch (kind) {
    case ClassifierKind::LR:
    case ClassifierKind::ANN: return "lambda=" + number(p.lambda);
    case ClassifierKind::SvmLinear: return "C=" + number(p.C);
    case ClassifierKind::SvmRbf: return "C=" + number(p.C) + ";gamma=" + number(p.gamma);
  }
  return {};
}

std::vector<Hyperparams> ParamGrid::candidates(ClassifierKind kind) const {
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<Hyperparams> out;
  switch (kind) {
    case ClassifierKind::LR:
    case ClassifierKind::ANN:
      for (double l : sorted(lambda)) out.push_back({l, 1.0, 0.0});
      break;
    case ClassifierKind::SvmLinear:
      for (double c : sorted(C)) out.push_back({0.0, c, 0.0});
      break;
    case ClassifierKind::SvmRbf:
      for (double c : sorted(C))
        for (double g : sorted(gamma)) out.push_back({0.0, c, g});
      break;
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "parameter grid is empty");
  return out;
}

ClassifierKind model_kind(const Model& m) noexcept {
  if (std::holds_alternative<LogRegModel>(m)) return ClassifierKind::LR;
  if (std::holds_alternative<AnnModel>(m)) return ClassifierKind::ANN;
  return std::get<SvmModel>(m).kernel == SvmKernel::Linear ? ClassifierKind::SvmLinear : ClassifierKind::SvmRbf;
}

int model_dim(const Model& m) noexcept {
  if (const auto* lr = std::get_if<LogRegModel>(&m)) return static_cast<int>(lr->W.cols() - 1);
  if (const auto* ann = std::get_if<AnnModel>(&m)) return static_cast<int>(ann->W1.cols() - 1);
  return static_cast<int>(std::get<SvmModel>(m).support.cols());
}

int model_classes(const Model& m) noexcept {
  if (const auto* lr = std::get_if<LogRegModel>(&m)) return static_cast<int>(lr->W.rows());
  if (const auto* ann = std::get_if<AnnModel>(&m)) return static_cast<int>(ann->W2.rows());
  return static_cast<int>(std::get<SvmModel>(m).machines.size());
}

namespace {

// Softmax over columns of a K x N score matrix, returned as N x K.
MatrixXd softmax_rows(const MatrixXd& S) {
  MatrixXd P(S.cols(), S.rows());
  for (Index n = 0; n < S.cols(); ++n) {
    const double m = S.col(n).maxCoeff();
    double z = 0.0;
    for (Index k = 0; k < S.rows(); ++k) z += std::exp(S(k, n) - m);
    for (Index k = 0; k < S.rows(); ++k) P(n, k) = std::exp(S(k, n) - m) / z;
  }
  return P;
}

MatrixXd svm_scores_from_kernel(const SvmModel& m, const MatrixXd& k_sv) {
  MatrixXd out(k_sv.rows(), static_cast<Index>(m.machines.size()));
  for (std::size_t c = 0; c < m.machines.size(); ++c) {
    out.col(static_cast<Index>(c)) = (k_sv * m.machines[c].coef).array() + m.machines[c].b;
  }
  return out;
}

}  // namespace

MatrixXd class_scores(const Model& m, const MatrixXd& X) {
  if (X.cols() != model_dim(m)) throw Error(ErrorCode::DimensionMismatch, "predict: descriptor length differs");
  if (const auto* lr = std::get_if<LogRegModel>(&m)) {
    const Index D = X.cols();
    MatrixXd S = lr->W.rightCols(D) * X.transpose();
    S.colwise() += lr->W.col(0);
    return softmax_rows(S);
  }
  if (const auto* ann = std::get_if<AnnModel>(&m)) {
    const Index D = X.cols();
    MatrixXd A = ann->W1.rightCols(D) * X.transpose();
    A.colwise() += ann->W1.col(0);
    const MatrixXd H = A.unaryExpr([](double a) { return 1.0 / (1.0 + std::exp(-a)); });
    MatrixXd S = ann->W2.rightCols(kAnnHidden) * H;
    S.colwise() += ann->W2.col(0);
    return softmax_rows(S);
  }
  const auto& svm = std::get<SvmModel>(m);
  return svm_scores_from_kernel(svm, kernel_matrix(X, svm.support, svm.kernel, svm.gamma));
}

std::vector<int> argmax_rows(const MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Index n = 0; n < scores.rows(); ++n) {
    Index best = 0;
    for (Index k = 1; k < scores.cols(); ++k) {
      if (scores(n, k) > scores(n, best)) best = k;
    }
    out[static_cast<std::size_t>(n)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const Model& m, const MatrixXd& X) { return argmax_rows(class_scores(m, X)); }

int predict_one(const Model& m, const VectorXd& x) { return predict(m, MatrixXd(x.transpose())).front(); }

Model train(const FitContext& ctx, ClassifierKind kind, const Hyperparams& p) {
  switch (kind) {
    case ClassifierKind::LR: return train_logreg(ctx, p.lambda);
    case ClassifierKind::ANN: return train_ann(ctx, p.lambda);
    case ClassifierKind::SvmLinear: return train_svm(ctx, SvmKernel::Linear, p.C);
    case ClassifierKind::SvmRbf: return train_svm(ctx, SvmKernel::Rbf, p.C, p.gamma);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown classifier kind");
}

Model train(const LabeledSet& set, ClassifierKind kind, const Hyperparams& p) {
  const FitContext ctx(set);
  return train(ctx, kind, p);
}

double accuracy_percent(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "accuracy: lengths differ");
  if (truth.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
}

std::vector<int> Pipeline::predict(const MatrixXd& raw) const { return gd::predict(model, scaler.apply(raw)); }

GridResult grid_search(const LabeledSet& train_raw, const LabeledSet& val_raw, ClassifierKind kind,
                       const ParamGrid& grid) {
  train_raw.validate();
  val_raw.validate();
  if (train_raw.dim() != val_raw.dim()) throw Error(ErrorCode::DimensionMismatch, "grid_search: dimensions differ");
  const auto candidates = grid.candidates(kind);
  const Standardizer scaler = Standardizer::fit(train_raw.X);
  const LabeledSet train = scaler.apply(train_raw);
  const MatrixXd val = scaler.apply(val_raw.X);
  const FitContext ctx(train);

  // SVM candidates share one validation-by-train product.
  MatrixXd cross;
  VectorXd val_norms;
  const bool svm = kind == ClassifierKind::SvmLinear || kind == ClassifierKind::SvmRbf;
  if (svm) {
    cross = val * train.X.transpose();
    val_norms = val.rowwise().squaredNorm();
  }

  GridResult result;
  bool first = true;
  for (const Hyperparams& p : candidates) {
    const Model model = gd::train(ctx, kind, p);
    std::vector<int> pred;
    if (svm) {
      const auto& m = std::get<SvmModel>(model);
      MatrixXd k_sv(cross.rows(), static_cast<Index>(m.support_index.size()));
      for (std::size_t j = 0; j < m.support_index.size(); ++j) {
        const Index t = m.support_index[j];
        for (Index i = 0; i < cross.rows(); ++i) {
          k_sv(i, static_cast<Index>(j)) =
              m.kernel == SvmKernel::Linear
                  ? cross(i, t)
                  : std::exp(-m.gamma * std::max(0.0, val_norms(i) + ctx.squared_norms()(t) - 2.0 * cross(i, t)));
        }
      }
      pred = argmax_rows(svm_scores_from_kernel(m, k_sv));
    } else {
      pred = predict(model, val);
    }
    const double acc = accuracy_percent(pred, val_raw.y);
    result.evaluated.push_back({p, acc});
    if (first || acc > result.val_accuracy) {
      result.best = p;
      result.val_accuracy = acc;
      first = false;
    }
  }
  return result;
}

RefitResult refit_and_test(const LabeledSet& train, const LabeledSet& val, const LabeledSet& test,
                           ClassifierKind kind, const Hyperparams& params) {
  const LabeledSet both = concat(train, val);
  both.validate();
  test.validate();
  RefitResult r;
  r.pipeline.scaler = Standardizer::fit(both.X);
  const LabeledSet scaled = r.pipeline.scaler.apply(both);
  r.pipeline.model = gd::train(scaled, kind, params);
  r.predictions = r.pipeline.predict(test.X);
  r.accuracy = accuracy_percent(r.predictions, test.y);
  return r;
}

// ---- GDM1 container -------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'G', 'D', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void matrix(const MatrixXd& m) {
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint8_t u8() {
    const int c = in_.get();
    if (c == std::char_traits<char>::eof()) throw Error(ErrorCode::FormatError, "model file truncated");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return std::bit_cast<double>(v);
  }
  MatrixXd matrix(Index rows, Index cols) {
    MatrixXd m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = f64();
    return m;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_pipeline(const Pipeline& p, std::ostream& out) {
  Writer w(out);
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kVersion);
  const ClassifierKind kind = model_kind(p.model);
  const auto D = static_cast<std::uint32_t>(model_dim(p.model));
  const auto K = static_cast<std::uint32_t>(model_classes(p.model));
  w.u8(static_cast<std::uint8_t>(kind));
  w.u32(D);
  w.u32(K);
  double lambda = 0.0, C = 0.0, gamma = 0.0;
  if (const auto* lr = std::get_if<LogRegModel>(&p.model)) lambda = lr->lambda;
  if (const auto* ann = std::get_if<AnnModel>(&p.model)) lambda = ann->lambda;
  if (const auto* svm = std::get_if<SvmModel>(&p.model)) {
    C = svm->C;
    gamma = svm->gamma;
  }
  w.f64(lambda);
  w.f64(C);
  w.f64(gamma);
  w.u8(p.scaler.empty() ? 0 : 1);
  if (!p.scaler.empty()) {
    if (static_cast<std::uint32_t>(p.scaler.mean.size()) != D) {
      throw Error(ErrorCode::DimensionMismatch, "scaler and model dimensions differ");
    }
    w.matrix(p.scaler.mean);
    w.matrix(p.scaler.scale);
  }
  if (const auto* lr = std::get_if<LogRegModel>(&p.model)) {
    w.matrix(lr->W);
  } else if (const auto* ann = std::get_if<AnnModel>(&p.model)) {
    w.matrix(ann->W1);
    w.matrix(ann->W2);
  } else {
    const auto& svm = std::get<SvmModel>(p.model);
    w.u32(static_cast<std::uint32_t>(svm.support.rows()));
    w.matrix(svm.support);
    for (const auto& m : svm.machines) {
      w.f64(m.b);
      w.matrix(m.coef.transpose());
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing model");
}

Pipeline load_pipeline(std::istream& in) {
  Reader r(in);
  for (char c : kMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) throw Error(ErrorCode::FormatError, "not a GDM1 model file");
  }
  if (r.u32() != kVersion) throw Error(ErrorCode::FormatError, "unsupported model version");
  const std::uint8_t kind_byte = r.u8();
  if (kind_byte > 3) throw Error(ErrorCode::FormatError, "unknown classifier kind in model file");
  const auto kind = static_cast<ClassifierKind>(kind_byte);
  const Index D = r.u32();
  const Index K = r.u32();
  const double lambda = r.f64();
  const double C = r.f64();
  const double gamma = r.f64();
  Pipeline p;
  if (r.u8() != 0) {
    p.scaler.mean = r.matrix(1, D);
    p.scaler.scale = r.matrix(1, D);
  }
  switch (kind) {
    case ClassifierKind::LR: {
      LogRegModel m;
      m.lambda = lambda;
      m.W = r.matrix(K, D + 1);
      p.model = std::move(m);
      break;
    }
    case ClassifierKind::ANN: {
      AnnModel m;
      m.lambda = lambda;
      m.W1 = r.matrix(kAnnHidden, D + 1);
      m.W2 = r.matrix(K, kAnnHidden + 1);
      p.model = std::move(m);
      break;
    }
    case ClassifierKind::SvmLinear:
    case ClassifierKind::SvmRbf: {
      SvmModel m;
      m.kernel = kind == ClassifierKind::SvmLinear ? SvmKernel::Linear : SvmKernel::Rbf;
      m.C = C;
      m.gamma = gamma;
      const Index n_sv = r.u32();
      m.support = r.matrix(n_sv, D);
      for (Index k = 0; k < K; ++k) {
        BinarySvm b;
        b.b = r.f64();
        b.coef = r.matrix(1, n_sv).transpose();
        m.machines.push_back(std::move(b));
      }
      p.model = std::move(m);
      break;
    }
  }
  return p;
}

void save_pipeline(const Pipeline& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  save_pipeline(p, out);
}

Pipeline load_pipeline(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return load_pipeline(in);
}

}  // namespace gd
