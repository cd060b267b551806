#include <cmath>

#include "glyphdesc/classifiers.hpp"
#include "glyphdesc/error.hpp"
#include "glyphdesc/random.hpp"
#include "optimizer.hpp"

namespace gd {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void require_trainable(const LabeledSet& s, double lambda, const char* what) {
  s.validate();
  if (s.size() < s.K) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": needs at least K samples");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": lambda must be finite and >= 0");
  }
}

// (P - Y) / N in place.
void residual(MatrixXd& P, const std::vector<int>& y) {
  const double inv_n = 1.0 / static_cast<double>(P.cols());
  for (Index n = 0; n < P.cols(); ++n) P(y[static_cast<std::size_t>(n)], n) -= 1.0;
  P *= inv_n;
}

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Multinomial logistic regression on features F (N x d). Parameters are
// [vec(W) (K x d, column-major), b (K)].
class LogRegProblem final : public detail::SmoothProblem {
 public:
  LogRegProblem(const MatrixXd& F, const std::vector<int>& y, int K, double lambda, const MatrixXd* V)
      : F_(F), y_(y), K_(K), d_(F.cols()), lambda_(lambda), V_(V) {
    set_params(VectorXd::Zero(K_ * d_ + K_));
  }

  void set_params(const VectorXd& theta) {
    theta_ = theta;
    S_.noalias() = W() * F_.transpose();
    S_.colwise() += b();
    loss_ = detail::softmax_xent(S_, y_, nullptr) + reg_scale() * W().squaredNorm();
    refresh_gradient();
  }

  double loss() const override { return loss_; }
  const VectorXd& gradient() const override { return grad_; }

  bool gradient_below(double tol) const override {
    const Map<const MatrixXd> gw(grad_.data(), K_, d_);
    const double gb = grad_.tail(K_).cwiseAbs().maxCoeff();
    if (V_) return detail::reduced_gradient_below(gw, *V_, gb, tol);
    return grad_.cwiseAbs().maxCoeff() < tol;
  }

  void set_direction(const VectorXd& d) override {
    dir_ = d;
    const Map<const MatrixXd> dw(dir_.data(), K_, d_);
    DS_.noalias() = dw * F_.transpose();
    DS_.colwise() += dir_.tail(K_);
    ww_ = W().squaredNorm();
    wd_ = (W().array() * dw.array()).sum();
    dd_ = dw.squaredNorm();
  }

  double trial(double eta) override {
    eta_ = eta;
    St_ = S_ - eta * DS_;
    trial_loss_ = detail::softmax_xent(St_, y_, nullptr) + reg_scale() * (ww_ - 2 * eta * wd_ + eta * eta * dd_);
    return trial_loss_;
  }

  void accept() override {
    theta_ -= eta_ * dir_;
    S_.swap(St_);
    loss_ = trial_loss_;
    refresh_gradient();
  }

  Map<const MatrixXd> W() const { return {theta_.data(), K_, d_}; }
  Map<const VectorXd> b() const { return {theta_.data() + K_ * d_, K_}; }

 private:
  double reg_scale() const { return lambda_ / (2.0 * static_cast<double>(F_.rows())); }

  void refresh_gradient() {
    detail::softmax_xent(S_, y_, &P_);
    residual(P_, y_);
    grad_.resize(theta_.size());
    Map<MatrixXd> gw(grad_.data(), K_, d_);
    gw.noalias() = P_ * F_;
    gw += (lambda_ / static_cast<double>(F_.rows())) * W();
    grad_.tail(K_) = P_.rowwise().sum();
  }

  const MatrixXd& F_;
  const std::vector<int>& y_;
  Index K_;
  Index d_;
  double lambda_;
  const MatrixXd* V_;
  VectorXd theta_, grad_, dir_;
  MatrixXd S_, St_, DS_, P_;
  double loss_ = 0, trial_loss_ = 0, eta_ = 0, ww_ = 0, wd_ = 0, dd_ = 0;
};

// One hidden sigmoid layer of H units with softmax output. Parameters are
// [vec(W1) (H x d), b1 (H), vec(W2) (K x H), b2 (K), t?]. The optional t is
// the coordinate of the initial weights outside the row space of X: it never
// touches the data term and only decays under the penalty.
class AnnProblem final : public detail::SmoothProblem {
 public:
  AnnProblem(const MatrixXd& F, const std::vector<int>& y, int K, double lambda, const MatrixXd* V,
             const MatrixXd* orth_unit)
      : F_(F), y_(y), K_(K), d_(F.cols()), lambda_(lambda), V_(V), orth_(orth_unit) {}

  Index size() const { return H * d_ + H + K_ * H + K_ + (orth_ ? 1 : 0); }

  void set_params(const VectorXd& theta) {
    theta_ = theta;
    A_.noalias() = W1() * F_.transpose();
    A_.colwise() += b1();
    Hh_ = A_.unaryExpr(&sigmoid);
    S_.noalias() = W2() * Hh_;
    S_.colwise() += b2();
    loss_ = detail::softmax_xent(S_, y_, nullptr) + reg_scale() * reg_norm(theta_);
    refresh_gradient();
  }

  double loss() const override { return loss_; }
  const VectorXd& gradient() const override { return grad_; }

  bool gradient_below(double tol) const override {
    if (!V_) return grad_.cwiseAbs().maxCoeff() < tol;
    const Map<const MatrixXd> g1(grad_.data(), H, d_);
    const double rest = grad_.segment(H * d_, H + K_ * H + K_).cwiseAbs().maxCoeff();
    const double gt = orth_ ? grad_(size() - 1) : 0.0;
    return detail::reduced_gradient_below(g1, *V_, rest, tol, orth_, gt);
  }

  void set_direction(const VectorXd& d) override {
    dir_ = d;
    const Map<const MatrixXd> dw1(dir_.data(), H, d_);
    DA_.noalias() = dw1 * F_.transpose();
    DA_.colwise() += dir_.segment(H * d_, H);
    ww_ = reg_norm(theta_);
    wd_ = reg_dot(theta_, dir_);
    dd_ = reg_norm(dir_);
  }

  double trial(double eta) override {
    eta_ = eta;
    At_ = A_ - eta * DA_;
    Ht_ = At_.unaryExpr(&sigmoid);
    const MatrixXd w2 = W2() - eta * Map<const MatrixXd>(dir_.data() + H * d_ + H, K_, H);
    St_.noalias() = w2 * Ht_;
    St_.colwise() += b2() - eta * dir_.segment(H * d_ + H + K_ * H, K_);
    trial_loss_ = detail::softmax_xent(St_, y_, nullptr) + reg_scale() * (ww_ - 2 * eta * wd_ + eta * eta * dd_);
    return trial_loss_;
  }

  void accept() override {
    theta_ -= eta_ * dir_;
    A_.swap(At_);
    Hh_.swap(Ht_);
    S_.swap(St_);
    loss_ = trial_loss_;
    refresh_gradient();
  }

  Map<const MatrixXd> W1() const { return {theta_.data(), H, d_}; }
  Map<const VectorXd> b1() const { return {theta_.data() + H * d_, H}; }
  Map<const MatrixXd> W2() const { return {theta_.data() + H * d_ + H, K_, H}; }
  Map<const VectorXd> b2() const { return {theta_.data() + H * d_ + H + K_ * H, K_}; }
  double t() const { return orth_ ? theta_(size() - 1) : 0.0; }

  static constexpr Index H = kAnnHidden;

 private:
  double reg_scale() const { return lambda_ / (2.0 * static_cast<double>(F_.rows())); }

  // Penalised coordinates: W1, W2 and t (biases excluded).
  double reg_dot(const VectorXd& a, const VectorXd& c) const {
    double s = a.head(H * d_).dot(c.head(H * d_));
    s += a.segment(H * d_ + H, K_ * H).dot(c.segment(H * d_ + H, K_ * H));
    if (orth_) s += a(size() - 1) * c(size() - 1);
    return s;
  }
  double reg_norm(const VectorXd& a) const { return reg_dot(a, a); }

  void refresh_gradient() {
    detail::softmax_xent(S_, y_, &P_);
    residual(P_, y_);
    const double shrink = lambda_ / static_cast<double>(F_.rows());
    grad_.resize(size());
    Map<MatrixXd> g2(grad_.data() + H * d_ + H, K_, H);
    g2.noalias() = P_ * Hh_.transpose();
    g2 += shrink * W2();
    grad_.segment(H * d_ + H + K_ * H, K_) = P_.rowwise().sum();
    MatrixXd delta = W2().transpose() * P_;
    delta.array() *= Hh_.array() * (1.0 - Hh_.array());
    Map<MatrixXd> g1(grad_.data(), H, d_);
    g1.noalias() = delta * F_;
    g1 += shrink * W1();
    grad_.segment(H * d_, H) = delta.rowwise().sum();
    if (orth_) grad_(size() - 1) = shrink * t();
  }

  const MatrixXd& F_;
  const std::vector<int>& y_;
  Index K_;
  Index d_;
  double lambda_;
  const MatrixXd* V_;
  const MatrixXd* orth_;
  VectorXd theta_, grad_, dir_;
  MatrixXd A_, Hh_, S_, At_, Ht_, St_, DA_, P_;
  double loss_ = 0, trial_loss_ = 0, eta_ = 0, ww_ = 0, wd_ = 0, dd_ = 0;
};

VectorXd pack_logreg(const MatrixXd& W) {
  const Index K = W.rows();
  const Index D = W.cols() - 1;
  VectorXd theta(K * D + K);
  Map<MatrixXd>(theta.data(), K, D) = W.rightCols(D);
  theta.tail(K) = W.col(0);
  return theta;
}

VectorXd pack_ann(const AnnModel& m) {
  const Index H = kAnnHidden;
  const Index D = m.W1.cols() - 1;
  const Index K = m.W2.rows();
  VectorXd theta(H * D + H + K * H + K);
  Map<MatrixXd>(theta.data(), H, D) = m.W1.rightCols(D);
  theta.segment(H * D, H) = m.W1.col(0);
  Map<MatrixXd>(theta.data() + H * D + H, K, H) = m.W2.rightCols(H);
  theta.segment(H * D + H + K * H, K) = m.W2.col(0);
  return theta;
}

AnnModel unpack_ann(const VectorXd& theta, Index D, Index K) {
  const Index H = kAnnHidden;
  AnnModel m;
  m.W1.resize(H, D + 1);
  m.W1.col(0) = theta.segment(H * D, H);
  m.W1.rightCols(D) = Map<const MatrixXd>(theta.data(), H, D);
  m.W2.resize(K, H + 1);
  m.W2.col(0) = theta.segment(H * D + H + K * H, K);
  m.W2.rightCols(H) = Map<const MatrixXd>(theta.data() + H * D + H, K, H);
  return m;
}

}  // namespace

FitContext::FitContext(const LabeledSet& train) : set_(train) { set_.validate(); }
FitContext::~FitContext() = default;

const MatrixXd& FitContext::gram() const {
  if (!gram_) {
    gram_ = std::make_unique<MatrixXd>(set_.size(), set_.size());
    gram_->noalias() = set_.X * set_.X.transpose();
  }
  return *gram_;
}

const VectorXd& FitContext::squared_norms() const {
  if (!norms_) norms_ = std::make_unique<VectorXd>(gram().diagonal());
  return *norms_;
}

const FitContext::RowSpace* FitContext::row_space() const {
  if (!rows_done_) {
    rows_done_ = true;
    const Index n = set_.size();
    const Index d = set_.dim();
    if (d > n) {
      // X^T = Q R, so X = R^T Q^T: coordinates R^T on the orthonormal basis Q.
      const Eigen::HouseholderQR<MatrixXd> qr(set_.X.transpose());
      rows_ = std::make_unique<RowSpace>();
      rows_->V = qr.householderQ() * MatrixXd::Identity(d, n);
      rows_->Z = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
    }
  }
  return rows_.get();
}

double logreg_objective(const LabeledSet& s, const MatrixXd& W, double lambda, MatrixXd* grad) {
  s.validate();
  if (W.rows() != s.K || W.cols() != s.dim() + 1) throw Error(ErrorCode::DimensionMismatch, "weights must be K x (D+1)");
  LogRegProblem p(s.X, s.y, s.K, lambda, nullptr);
  p.set_params(pack_logreg(W));
  if (grad) {
    const Index D = s.dim();
    grad->resize(s.K, D + 1);
    grad->col(0) = p.gradient().tail(s.K);
    grad->rightCols(D) = Map<const MatrixXd>(p.gradient().data(), s.K, D);
  }
  return p.loss();
}

double ann_objective(const LabeledSet& s, const AnnModel& m, double lambda, AnnModel* grad) {
  s.validate();
  if (m.W1.rows() != kAnnHidden || m.W1.cols() != s.dim() + 1 || m.W2.rows() != s.K || m.W2.cols() != kAnnHidden + 1) {
    throw Error(ErrorCode::DimensionMismatch, "ann weights must be 25 x (D+1) and K x 26");
  }
  AnnProblem p(s.X, s.y, s.K, lambda, nullptr, nullptr);
  p.set_params(pack_ann(m));
  if (grad) *grad = unpack_ann(p.gradient(), s.dim(), s.K);
  return p.loss();
}

LogRegModel train_logreg(const LabeledSet& train, double lambda, const GradientOptions& opt) {
  const FitContext ctx(train);
  return train_logreg(ctx, lambda, opt);
}

LogRegModel train_logreg(const FitContext& ctx, double lambda, const GradientOptions& opt) {
  const LabeledSet& s = ctx.set();
  require_trainable(s, lambda, "train_logreg");
  const auto* rs = opt.allow_reduction ? ctx.row_space() : nullptr;
  LogRegProblem p(rs ? rs->Z : s.X, s.y, s.K, lambda, rs ? &rs->V : nullptr);
  LogRegModel m;
  m.lambda = lambda;
  m.info = detail::minimize(p, opt);
  m.W.resize(s.K, s.dim() + 1);
  m.W.col(0) = p.b();
  if (rs) {
    m.W.rightCols(s.dim()).noalias() = p.W() * rs->V.transpose();
  } else {
    m.W.rightCols(s.dim()) = p.W();
  }
  return m;
}

AnnModel ann_initial_weights(int D, int K, std::uint64_t seed) {
  Rng rng(seed);
  AnnModel m;
  const double e1 = std::sqrt(6.0 / (D + kAnnHidden));
  const double e2 = std::sqrt(6.0 / (kAnnHidden + K));
  m.W1.resize(kAnnHidden, D + 1);
  for (Index i = 0; i < m.W1.size(); ++i) m.W1.data()[i] = uniform(rng, -e1, e1);
  m.W2.resize(K, kAnnHidden + 1);
  for (Index i = 0; i < m.W2.size(); ++i) m.W2.data()[i] = uniform(rng, -e2, e2);
  return m;
}

AnnModel train_ann(const LabeledSet& train, double lambda, std::uint64_t seed, const GradientOptions& opt) {
  const FitContext ctx(train);
  return train_ann(ctx, lambda, seed, opt);
}

AnnModel train_ann(const FitContext& ctx, double lambda, std::uint64_t seed, const GradientOptions& opt) {
  const LabeledSet& s = ctx.set();
  require_trainable(s, lambda, "train_ann");
  const Index D = s.dim();
  const AnnModel init = ann_initial_weights(s.dim(), s.K, seed);
  VectorXd theta = pack_ann(init);
  const auto* rs = opt.allow_reduction ? ctx.row_space() : nullptr;

  const Index H = kAnnHidden;
  auto extract = [&](const AnnProblem& p, const TrainInfo& info) {
    AnnModel m;
    m.lambda = lambda;
    m.info = info;
    m.W1.resize(H, D + 1);
    m.W1.col(0) = p.b1();
    m.W2.resize(s.K, H + 1);
    m.W2.col(0) = p.b2();
    m.W2.rightCols(H) = p.W2();
    return m;
  };

  if (!rs) {
    AnnProblem p(s.X, s.y, s.K, lambda, nullptr, nullptr);
    p.set_params(theta);
    AnnModel m = extract(p, detail::minimize(p, opt));
    m.W1.rightCols(D) = p.W1();
    return m;
  }

  // Split the first layer into its row-space coordinates and a fixed
  // orthogonal remainder scaled by t.
  const Index r = rs->Z.cols();
  const MatrixXd w1 = init.W1.rightCols(D);
  const MatrixXd w1_red = w1 * rs->V;
  MatrixXd orth = w1 - w1_red * rs->V.transpose();
  const double t0 = orth.norm();
  const bool use_orth = t0 > 0.0;
  if (use_orth) orth /= t0;

  VectorXd red(H * r + H + s.K * H + s.K + (use_orth ? 1 : 0));
  Map<MatrixXd>(red.data(), H, r) = w1_red;
  red.segment(H * r, H + s.K * H + s.K) = theta.segment(H * D, H + s.K * H + s.K);
  if (use_orth) red(red.size() - 1) = t0;

  AnnProblem p(rs->Z, s.y, s.K, lambda, &rs->V, use_orth ? &orth : nullptr);
  p.set_params(red);
  AnnModel m = extract(p, detail::minimize(p, opt));
  m.W1.rightCols(D).noalias() = p.W1() * rs->V.transpose();
  if (use_orth) m.W1.rightCols(D) += p.t() * orth;
  return m;
}

}  // namespace gd
