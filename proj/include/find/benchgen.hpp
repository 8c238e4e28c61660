#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "find/dataset.hpp"
#include "find/expr.hpp"
#include "find/structure.hpp"

namespace find {

struct SyntheticSpec {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  std::size_t p = 0;
  std::size_t s = 0;
  std::vector<std::vector<double>> W;  // s × p, disjoint supports
  std::vector<double> z_center;        // z_i at x = (1.5, …, 1.5)
  Expr f2;                             // over latent variables z1..zs (normalized)
  Expr y;                              // the composite over inputs x1..xp

  StructureGraph truth() const;
  std::vector<std::string> input_names() const;
};

/// Validates the structural and finiteness invariants; throws std::logic_error.
void validate_spec(const SyntheticSpec& spec);

std::vector<SyntheticSpec> generate_suite(std::size_t n, std::uint64_t seed);

/// Axis-aligned grid over [1,2]^p with round(1/Δx)+1 levels per axis, the
/// densest axes coarsened one level at a time until at most `cap` points remain.
Dataset sample_grid(const SyntheticSpec& spec, double dx, std::size_t cap = 20000);

std::vector<std::size_t> grid_levels(std::size_t p, double dx, std::size_t cap = 20000);

enum class RhoEstimator { BackwardDiff, LocalPolyfit, Analytic };

std::string estimator_name(RhoEstimator e);

/// ρ_j = x_j ∂y/∂x_j by forward-mode differentiation of the true expression.
Eigen::MatrixXd analytic_rho(const SyntheticSpec& spec, const Eigen::MatrixXd& X);

struct SpecResult {
  std::size_t spec_id = 0;
  StructureMetrics metrics;
  std::size_t points = 0;
};

struct SuiteReport {
  double dx = 0.0;
  RhoEstimator estimator = RhoEstimator::BackwardDiff;
  std::vector<SpecResult> results;
  StructureMetrics mean;
};

/// Structure identification on every spec, metrics averaged.
SuiteReport run_suite(const std::vector<SyntheticSpec>& suite, double dx, RhoEstimator estimator,
                      std::size_t cap = 20000);

/// Graph estimated for one spec on its grid.
StructureGraph identify_structure(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, RhoEstimator estimator,
                                  const SyntheticSpec* spec = nullptr);

/// CSV with header spec_id,dx,estimator,m1,m2,m3,m4.
std::string suite_csv(const std::vector<SuiteReport>& reports);

}  // namespace find
