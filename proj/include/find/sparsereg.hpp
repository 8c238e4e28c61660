#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "find/dataset.hpp"
#include "find/search.hpp"

namespace find {

class SeriesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Derivatives {
  Eigen::VectorXd d1;
  Eigen::VectorXd d2;
};

/// Sliding cubic least-squares fit over 7-point windows (one-sided at the ends),
/// differentiated analytically at each sample.
Derivatives numeric_derivatives(const Eigen::VectorXd& t, const Eigen::VectorXd& x);

struct BasisLibrary {
  std::vector<std::string> names;
  Eigen::MatrixXd phi;
};

/// {1, x, x'', x², x·x', x·x'', x'², x'·x'', x''²}.
BasisLibrary default_library(const Eigen::VectorXd& x, const Eigen::VectorXd& d1, const Eigen::VectorXd& d2);

struct SparseModel {
  Eigen::VectorXd xi;
  std::vector<std::size_t> active;
  bool zero_model = false;
  std::size_t iterations = 0;
  double threshold = 0.0;
};

struct StlsqOptions {
  std::size_t max_iters = 20;
  double rcond = 1e-3;  // singular values below rcond·σ_max are truncated
};

/// Sequential thresholded least squares on RMS-normalized columns.
SparseModel stlsq(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target, double threshold,
                  const StlsqOptions& options = {});

/// Restricted to `active` columns; used for idempotence checks.
SparseModel stlsq_on(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target, double threshold,
                     const std::vector<std::size_t>& active, const StlsqOptions& options = {});

/// 0.05·max|ξ| of the initial least-squares solution.
double default_threshold(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target,
                         const StlsqOptions& options = {});

struct SmdParams {
  double c = 0.5;
  double k = 2.0;
  double m = 1.0;
  double delta = 1.0;
};

struct Series {
  Eigen::VectorXd t;
  Eigen::VectorXd x;
};

/// RK4 for m·x'' + c·x' + k·x = 0 with x(0) = δ, x'(0) = 0.
Series simulate_smd(const SmdParams& p, double dt = 0.01, double t_end = 20.0);

Series series_from_dataset(const Dataset& ds);

struct SeriesFit {
  BasisLibrary library;
  SparseModel model;
};

/// Derivatives, default library and STLSQ with x' as target. threshold ≤ 0 selects the default.
SeriesFit identify_series(const Series& s, double threshold = 0.0);

struct MetaLaw {
  std::string output;
  CandidateFormula best;
  std::vector<CandidateFormula> ranked;
  SearchTrace trace;
};

/// DI-1 search per coefficient column with the parameter columns as inputs.
std::vector<MetaLaw> meta_discover(const Dataset& params, const std::vector<std::string>& inputs,
                                   const std::vector<std::string>& outputs, const SearchConfig& config);

}  // namespace find
