#include <algorithm>
#include <cmath>
#include <limits>

#include "glyphdesc/classifiers.hpp"
#include "glyphdesc/error.hpp"

namespace gd {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

SmoResult smo_solve(const MatrixXd& kernel, const std::vector<int>& y, double C, const SvmOptions& opt) {
  const Index n = kernel.rows();
  if (kernel.cols() != n || static_cast<Index>(y.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "smo_solve: kernel must be n x n with n labels");
  }
  if (!(C > 0.0)) throw Error(ErrorCode::InvalidArgument, "smo_solve: C must be positive");
  for (int v : y) {
    if (v != 1 && v != -1) throw Error(ErrorCode::BadLabel, "smo_solve: labels must be +1 or -1");
  }
  constexpr double tau = 1e-12;
  const double inf = std::numeric_limits<double>::infinity();

  // Dual in minimisation form: 1/2 a^T Q a - e^T a with Q_ij = y_i y_j K_ij.
  // G is its gradient, maintained incrementally.
  SmoResult res;
  res.alpha = VectorXd::Zero(n);
  VectorXd G = VectorXd::Constant(n, -1.0);
  VectorXd& a = res.alpha;
  auto in_up = [&](Index t) { return (y[t] == 1 && a(t) < C) || (y[t] == -1 && a(t) > 0); };
  auto in_low = [&](Index t) { return (y[t] == 1 && a(t) > 0) || (y[t] == -1 && a(t) < C); };

  double m_up = -inf;
  double m_low = inf;
  for (;;) {
    // Maximal violating pair: largest -y G over I_up against smallest over
    // I_low, i.e. the pair with the widest error gap.
    Index i = -1;
    Index j = -1;
    m_up = -inf;
    m_low = inf;
    for (Index t = 0; t < n; ++t) {
      const double v = -y[t] * G(t);
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || m_up - m_low <= opt.tol) {
      res.converged = true;
      break;
    }
    if (res.updates >= opt.max_updates) break;

    const double old_i = a(i);
    const double old_j = a(j);
    const double kii = kernel(i, i);
    const double kjj = kernel(j, j);
    const double kij = kernel(i, j);
    // Curvature along the feasible line; the same for both label cases.
    double quad = kii + kjj - 2.0 * kij;
    if (quad <= 0) quad = tau;
    if (y[i] != y[j]) {
      const double delta = (-G(i) - G(j)) / quad;
      const double diff = a(i) - a(j);
      a(i) += delta;
      a(j) += delta;
      if (diff > 0) {
        if (a(j) < 0) {
          a(j) = 0;
          a(i) = diff;
        }
      } else if (a(i) < 0) {
        a(i) = 0;
        a(j) = -diff;
      }
      if (diff > 0) {
        if (a(i) > C) {
          a(i) = C;
          a(j) = C - diff;
        }
      } else if (a(j) > C) {
        a(j) = C;
        a(i) = C + diff;
      }
    } else {
      const double delta = (G(i) - G(j)) / quad;
      const double sum = a(i) + a(j);
      a(i) -= delta;
      a(j) += delta;
      if (sum > C) {
        if (a(i) > C) {
          a(i) = C;
          a(j) = sum - C;
        }
      } else if (a(j) < 0) {
        a(j) = 0;
        a(i) = sum;
      }
      if (sum > C) {
        if (a(j) > C) {
          a(j) = C;
          a(i) = sum - C;
        }
      } else if (a(i) < 0) {
        a(i) = 0;
        a(j) = sum;
      }
    }
    const double di = (a(i) - old_i) * y[i];
    const double dj = (a(j) - old_j) * y[j];
    for (Index t = 0; t < n; ++t) G(t) += y[t] * (kernel(t, i) * di + kernel(t, j) * dj);
    ++res.updates;
  }
  res.kkt_gap = std::max(0.0, m_up - m_low);
  if (!std::isfinite(res.kkt_gap)) res.kkt_gap = 0.0;

  // Threshold: average of -y G over free vectors, else the middle of the
  // feasible interval. Decision values are sum a_i y_i K(x_i, x) + b.
  double free_sum = 0.0;
  int free_count = 0;
  for (Index t = 0; t < n; ++t) {
    if (a(t) > 0 && a(t) < C) {
      free_sum += -y[t] * G(t);
      ++free_count;
    }
  }
  if (free_count > 0) {
    res.b = free_sum / free_count;
  } else if (std::isfinite(m_up) && std::isfinite(m_low)) {
    res.b = 0.5 * (m_up + m_low);
  } else {
    res.b = std::isfinite(m_up) ? m_up : (std::isfinite(m_low) ? m_low : 0.0);
  }
  return res;
}

double svm_dual_objective(const MatrixXd& kernel, const std::vector<int>& y, const VectorXd& alpha) {
  VectorXd ay(alpha.size());
  for (Index i = 0; i < alpha.size(); ++i) ay(i) = alpha(i) * y[static_cast<std::size_t>(i)];
  return alpha.sum() - 0.5 * ay.dot(kernel * ay);
}

double rbf_kernel(const VectorXd& a, const VectorXd& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

namespace {

MatrixXd rbf_from_products(const MatrixXd& cross, const VectorXd& norms_a, const VectorXd& norms_b, double gamma) {
  MatrixXd k(cross.rows(), cross.cols());
  for (Index j = 0; j < cross.cols(); ++j) {
    for (Index i = 0; i < cross.rows(); ++i) {
      const double d2 = std::max(0.0, norms_a(i) + norms_b(j) - 2.0 * cross(i, j));
      k(i, j) = std::exp(-gamma * d2);
    }
  }
  return k;
}

void check_svm_params(SvmKernel kernel, double C, const std::optional<double>& gamma) {
  if (!(C > 0.0) || !std::isfinite(C)) throw Error(ErrorCode::InvalidArgument, "svm: C must be positive");
  if (kernel == SvmKernel::Rbf && (!gamma || !(*gamma > 0.0))) {
    throw Error(ErrorCode::InvalidArgument, "svm: rbf kernel needs gamma > 0");
  }
  if (kernel == SvmKernel::Linear && gamma) throw Error(ErrorCode::InvalidArgument, "svm: gamma only applies to rbf");
}

}  // namespace

MatrixXd kernel_matrix(const MatrixXd& A, const MatrixXd& B, SvmKernel kernel, double gamma) {
  if (A.cols() != B.cols()) throw Error(ErrorCode::DimensionMismatch, "kernel_matrix: column counts differ");
  MatrixXd cross = A * B.transpose();
  if (kernel == SvmKernel::Linear) return cross;
  return rbf_from_products(cross, A.rowwise().squaredNorm(), B.rowwise().squaredNorm(), gamma);
}

bool SvmModel::converged() const noexcept {
  return std::all_of(machines.begin(), machines.end(), [](const BinarySvm& m) { return m.converged; });
}

SvmModel train_svm(const LabeledSet& train, SvmKernel kernel, double C, std::optional<double> gamma,
                   const SvmOptions& opt) {
  const FitContext ctx(train);
  return train_svm(ctx, kernel, C, gamma, opt);
}

SvmModel train_svm(const FitContext& ctx, SvmKernel kernel, double C, std::optional<double> gamma,
                   const SvmOptions& opt) {
  check_svm_params(kernel, C, gamma);
  const LabeledSet& s = ctx.set();
  const Index n = s.size();
  const MatrixXd K = kernel == SvmKernel::Linear
                         ? ctx.gram()
                         : rbf_from_products(ctx.gram(), ctx.squared_norms(), ctx.squared_norms(), *gamma);

  std::vector<SmoResult> results;
  results.reserve(static_cast<std::size_t>(s.K));
  std::vector<int> yk(static_cast<std::size_t>(n));
  for (int k = 0; k < s.K; ++k) {
    for (Index i = 0; i < n; ++i) yk[static_cast<std::size_t>(i)] = s.y[static_cast<std::size_t>(i)] == k ? 1 : -1;
    results.push_back(smo_solve(K, yk, C, opt));
  }

  SvmModel m;
  m.kernel = kernel;
  m.C = C;
  m.gamma = gamma.value_or(0.0);
  for (Index i = 0; i < n; ++i) {
    const bool used = std::any_of(results.begin(), results.end(), [&](const SmoResult& r) { return r.alpha(i) > 0; });
    if (used) m.support_index.push_back(static_cast<int>(i));
  }
  const auto n_sv = static_cast<Index>(m.support_index.size());
  m.support.resize(n_sv, s.dim());
  for (Index r = 0; r < n_sv; ++r) m.support.row(r) = s.X.row(m.support_index[static_cast<std::size_t>(r)]);
  for (int k = 0; k < s.K; ++k) {
    const SmoResult& r = results[static_cast<std::size_t>(k)];
    BinarySvm b;
    b.coef.resize(n_sv);
    for (Index j = 0; j < n_sv; ++j) {
      const int i = m.support_index[static_cast<std::size_t>(j)];
      b.coef(j) = r.alpha(i) * (s.y[static_cast<std::size_t>(i)] == k ? 1.0 : -1.0);
    }
    b.b = r.b;
    b.updates = r.updates;
    b.converged = r.converged;
    b.kkt_gap = r.kkt_gap;
    m.machines.push_back(std::move(b));
  }
  return m;
}

}  // namespace gd
