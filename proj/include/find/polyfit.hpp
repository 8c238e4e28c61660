#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "find/expr.hpp"

namespace find {

using MultiIndex = std::vector<int>;

/// Monomials of total degree ≤ n in s variables: graded, then lexicographically
/// descending within a degree (1, z1, z2, z1², z1z2, z2², ...).
std::vector<MultiIndex> monomials(std::size_t s, int degree);

struct PolynomialModel {
  int degree = 0;
  std::vector<MultiIndex> terms;
  std::vector<double> coefficients;      // raw latent units, aligned with terms
  std::vector<double> std_coefficients;  // on standardized latents
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  std::size_t latents() const { return static_cast<std::size_t>(mean.size()); }
  Eigen::VectorXd predict(const Eigen::MatrixXd& Z) const;
  double coefficient(const MultiIndex& k) const;

  /// Σ a_k Π z_i^{k_i}, zero coefficients omitted.
  Expr to_expr(const std::vector<Expr>& latents) const;
};

struct FitReport {
  double r2 = 0.0;
  bool rank_deficient = false;
  bool condition_warning = false;
  std::size_t rank = 0;
};

struct PolyFit {
  PolynomialModel model;
  FitReport report;
};

class PolyfitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least squares on standardized latents via complete orthogonal decomposition
/// (minimum-norm when rank-deficient).
PolyFit fit_poly(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, int degree = 5);

/// Throws PolyfitError when y is constant.
double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

}  // namespace find
