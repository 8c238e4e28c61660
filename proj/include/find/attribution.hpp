#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "find/dataset.hpp"

namespace find {

/// Distance-weighted k-nearest-neighbour regressor on standardized features.
class KnnSurrogate {
 public:
  KnnSurrogate() = default;
  KnnSurrogate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t k);

  double predict(const Eigen::VectorXd& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  std::size_t k() const { return k_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& scale() const { return scale_; }

 private:
  Eigen::MatrixXd Xs_;  // standardized, one row per training point
  Eigen::VectorXd y_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;  // 0 for constant features
  std::size_t k_ = 1;
};

/// k = min(10, b − 1). Throws DatasetError when b < 3.
KnnSurrogate fit_surrogate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

using BatchPredictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct ShapConfig {
  std::size_t background_size = 64;
  std::size_t n_permutations = 100;
  std::uint64_t seed = 0;
  std::size_t max_eval_rows = 256;  // evaluation rows subsampled beyond this
};

struct AttributionReport {
  std::vector<std::string> features;
  std::vector<double> mean_abs;     // per feature
  std::vector<std::size_t> ranking;  // feature indices, descending mean_abs
  std::vector<std::size_t> selected;
  std::vector<std::size_t> eval_rows;
  Eigen::MatrixXd phi;           // eval rows × features
  Eigen::VectorXd prediction;    // f(x) per eval row
  Eigen::VectorXd base_value;    // mean f(background) actually sampled, per eval row
};

/// Monte-Carlo permutation Shapley values. Each permutation sweeps from a
/// random background row to x, so Σ_j φ_j = f(x) − f(background) exactly per draw.
AttributionReport shapley_values(const BatchPredictor& model, const Eigen::MatrixXd& X,
                                 const ShapConfig& config,
                                 std::vector<std::string> feature_names = {});

AttributionReport shapley_values(const KnnSurrogate& model, const Eigen::MatrixXd& X,
                                 const ShapConfig& config,
                                 std::vector<std::string> feature_names = {});

struct SelectionPolicy {
  enum class Kind { TopK, CumThreshold };
  Kind kind = Kind::CumThreshold;
  std::size_t k = 0;
  double threshold = 0.95;
  std::size_t cap = 8;

  static SelectionPolicy top_k(std::size_t k) { return {Kind::TopK, k, 0.95, 8}; }
  static SelectionPolicy cumulative(double t = 0.95, std::size_t cap = 8) {
    return {Kind::CumThreshold, 0, t, cap};
  }
};

/// Returns selected feature indices in rank order; also stores them in report.selected.
std::vector<std::size_t> select_inputs(AttributionReport& report, const SelectionPolicy& policy);

enum class UnaryOp { Cos, Sin, Tan, Exp, Abs, Log, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div };

struct EnrichResult {
  Dataset dataset;
  std::vector<std::string> added;
  std::vector<std::string> skipped;  // "name: reason"
};

/// Derived columns from every column not listed in `exclude`. Binary ops use
/// unordered pairs (i < j) in column order.
EnrichResult enrich_features(const Dataset& ds, const std::vector<UnaryOp>& unary,
                             const std::vector<BinaryOp>& binary,
                             const std::vector<std::string>& exclude = {});

/// Parses "sin,cos,exp;+,*" style specs (unary list, ';', binary list).
void parse_enrich_spec(const std::string& spec, std::vector<UnaryOp>& unary,
                       std::vector<BinaryOp>& binary);

}  // namespace find
