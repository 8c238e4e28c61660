#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace find {

enum class DerivativeMethod { BackwardDiff, LocalPolyfit };

/// For each input j, points sharing all other coordinates, sorted along x_j.
/// groups[j] is a list of runs of row indices.
std::vector<std::vector<std::vector<std::size_t>>> axis_groups(const Eigen::MatrixXd& X);

/// b×p matrix of ∂y/∂x_j; NaN where the estimator lacks support.
Eigen::MatrixXd estimate_partials(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  DerivativeMethod method);

/// ρ_j = x_j·∂y/∂x_j.
Eigen::MatrixXd rho_from_partials(const Eigen::MatrixXd& X, const Eigen::MatrixXd& partials);

/// Pairwise-complete Pearson. NaN when a pair has < 3 shared valid points or
/// either column's variance over them is < 1e-12.
Eigen::MatrixXd ppmcc(const Eigen::MatrixXd& rho);

struct WeightRatio {
  std::size_t j = 0;
  std::size_t k = 0;
  double ratio = 0.0;       // w_j / w_k
  double confidence = 0.0;  // |PPMCC(j,k)|
};

struct StructureGraph {
  std::size_t inputs = 0;
  std::vector<std::size_t> contributing;
  std::vector<std::vector<std::size_t>> latents;  // sorted cliques
  std::vector<std::vector<WeightRatio>> ratios;   // per clique, pairs j < k
  Eigen::MatrixXd correlation;                    // the PPMCC matrix used, if any

  const WeightRatio* ratio(std::size_t clique, std::size_t j, std::size_t k) const;
  /// sign(PPMCC(j,k)), 0 if undefined.
  int edge_sign(std::size_t j, std::size_t k) const;
};

/// Maximal cliques of the |PPMCC| ≥ threshold graph over contributing inputs.
StructureGraph cluster_latents(const Eigen::MatrixXd& m, double threshold = 0.95);

/// Fills ratios. Pairs inside a clique use the through-origin slope of ρ_j on ρ_k;
/// an input shared by several cliques is regressed jointly on one exclusive
/// member of each clique it belongs to.
StructureGraph weight_ratios(const Eigen::MatrixXd& rho, StructureGraph graph);

struct StructureMetrics {
  double contributing_tp_over_tp_fn = 0.0;
  double latent_count_ratio = 0.0;
  double connection_tp_over_tp_fn = 0.0;
  double ratio_accuracy = 0.0;
};

/// Four structure-accuracy metrics under the best clique-to-latent matching.
StructureMetrics evaluate_structure(const StructureGraph& truth, const StructureGraph& estimate);

/// Ground-truth graph from an exponent matrix (rows = latents).
StructureGraph graph_from_weights(const std::vector<std::vector<double>>& W, std::size_t inputs);

/// Fraction of points owning an axis neighbour (either side) in every input
/// that takes at least two distinct values.
double grid_coverage(const Eigen::MatrixXd& X);

}  // namespace find
