#pragma once

#include <Eigen/Dense>

#include "glyphdesc/classifiers.hpp"

namespace gd::detail {

// A smooth objective seen by the optimiser. Parameters live in whatever
// coordinates the problem chooses, provided Euclidean inner products there
// equal the ones in the full parameter space.
class SmoothProblem {
 public:
  virtual ~SmoothProblem() = default;
  [[nodiscard]] virtual double loss() const = 0;
  [[nodiscard]] virtual const Eigen::VectorXd& gradient() const = 0;
  /// Infinity norm of the full-space gradient below tol.
  [[nodiscard]] virtual bool gradient_below(double tol) const = 0;
  /// Fixes the search direction; trial(eta) then evaluates params - eta * d.
  virtual void set_direction(const Eigen::VectorXd& d) = 0;
  virtual double trial(double eta) = 0;
  /// Moves to the most recent trial point and refreshes the gradient.
  virtual void accept() = 0;
};

// Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking.
TrainInfo minimize(SmoothProblem& problem, const GradientOptions& opt);

// Row-wise softmax cross-entropy helpers on K x N score matrices.
// Fills P with probabilities and returns the mean negative log-likelihood.
double softmax_xent(const Eigen::MatrixXd& S, const std::vector<int>& y, Eigen::MatrixXd* P);

// Full-space infinity norm test for G_reduced * V^T (+ extra orthogonal term),
// using Frobenius bounds before paying for the product.
bool reduced_gradient_below(const Eigen::MatrixXd& G_reduced, const Eigen::MatrixXd& V, double other_max, double tol,
                            const Eigen::MatrixXd* orth_unit = nullptr, double orth_coef = 0.0);

}  // namespace gd::detail
