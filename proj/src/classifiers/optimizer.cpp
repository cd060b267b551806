#include "optimizer.hpp"

#include <cmath>

#include "glyphdesc/error.hpp"

namespace gd::detail {

TrainInfo minimize(SmoothProblem& problem, const GradientOptions& opt) {
  constexpr double armijo = 1e-4;
  constexpr double min_step = 1e-20;
  constexpr double max_step = 1e12;
  constexpr int max_backtracks = 60;

  TrainInfo info;
  double f = problem.loss();
  if (!std::isfinite(f)) throw Error(ErrorCode::NonFiniteLoss, "initial loss is not finite");
  if (opt.keep_history) info.loss_history.push_back(f);

  Eigen::VectorXd g = problem.gradient();
  if (!g.allFinite()) throw Error(ErrorCode::NonFiniteLoss, "initial gradient is not finite");
  double eta = 1.0 / std::max(1.0, g.norm());

  for (int it = 0; it < opt.max_iter; ++it) {
    if (problem.gradient_below(opt.grad_tol)) {
      info.converged = true;
      break;
    }
    const double gg = g.squaredNorm();
    problem.set_direction(g);
    bool accepted = false;
    double ft = f;
    for (int k = 0; k < max_backtracks && eta > min_step; ++k) {
      ft = problem.trial(eta);
      if (std::isfinite(ft) && ft <= f - armijo * eta * gg) {
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;

    problem.accept();
    const Eigen::VectorXd& g_new = problem.gradient();
    if (!g_new.allFinite()) throw Error(ErrorCode::NonFiniteLoss, "gradient became non-finite");
    // BB1 trial step for the next iteration: s = -eta g, y = g_new - g.
    const double sy = -eta * (g_new - g).dot(g);
    const double next = sy > 0.0 ? eta * eta * gg / sy : 2.0 * eta;
    g = g_new;
    f = ft;
    eta = std::min(next, max_step);
    ++info.iterations;
    if (opt.keep_history) info.loss_history.push_back(f);
  }
  if (!info.converged && info.iterations == opt.max_iter) info.converged = problem.gradient_below(opt.grad_tol);
  info.final_loss = f;
  return info;
}

double softmax_xent(const Eigen::MatrixXd& S, const std::vector<int>& y, Eigen::MatrixXd* P) {
  const Eigen::Index N = S.cols();
  const Eigen::RowVectorXd m = S.colwise().maxCoeff();
  Eigen::MatrixXd local;
  Eigen::MatrixXd& E = P ? *P : local;
  E = S;
  E.rowwise() -= m;
  E.array() = E.array().exp();
  const Eigen::RowVectorXd z = E.colwise().sum();
  double total = 0.0;
  for (Eigen::Index n = 0; n < N; ++n) {
    total += m(n) + std::log(z(n)) - S(y[static_cast<std::size_t>(n)], n);
  }
  if (P) P->array().rowwise() /= z.array();
  return total / static_cast<double>(N);
}

bool reduced_gradient_below(const Eigen::MatrixXd& G_reduced, const Eigen::MatrixXd& V, double other_max, double tol,
                            const Eigen::MatrixXd* orth_unit, double orth_coef) {
  if (other_max >= tol) return false;
  const double frob = std::sqrt(G_reduced.squaredNorm() + orth_coef * orth_coef);
  if (frob < tol) return true;
  const double entries = static_cast<double>(G_reduced.rows()) * static_cast<double>(V.rows());
  if (frob / std::sqrt(entries) >= tol) return false;
  Eigen::MatrixXd full = G_reduced * V.transpose();
  if (orth_unit) full += orth_coef * *orth_unit;
  return full.cwiseAbs().maxCoeff() < tol;
}

}  // namespace gd::detail
