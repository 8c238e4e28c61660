#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "find/dataset.hpp"
#include "find/dimension.hpp"
#include "find/expr.hpp"
#include "find/polyfit.hpp"
#include "find/structure.hpp"

namespace find {

enum class DIMode { DI1, DI2 };

struct LatentSpec {
  RationalVector w;
  DIMode mode = DIMode::DI1;
  RationalVector params;  // μ that produced w
  int clique = -1;        // structure clique index, if constrained

  std::string provenance() const;
};

struct SearchConfig {
  Rational range_lo = -2;
  Rational range_hi = 2;
  std::vector<Rational> steps = {Rational(1), Rational(1, 2), Rational(1, 5), Rational(1, 10)};
  std::size_t top_k = 10;
  DIMode mode = DIMode::DI1;
  bool dimensionless_latents = false;  // DI-1 with d replaced by 0
  std::size_t s_max = 3;
  std::size_t kappa1 = 0;  // 0 = unset
  std::size_t kappa2 = 0;
  double target_r2 = 0.999;
  double improvement_eps = 1e-4;
  int degree = 5;
  std::uint64_t seed = 0;
  double ratio_tolerance = 0.2;
  double tie_tolerance = 1e-9;

  void validate() const;
};

struct CandidateFormula {
  std::vector<LatentSpec> latents;
  PolynomialModel poly;
  double r2 = 0.0;
  std::size_t complexity = 0;
  std::vector<DimVector> constant_units;  // aligned with poly.terms (DI-2)
  Expr expression;
};

enum class RejectReason {
  NegativeBase,       // (a) non-integer exponent on a column with negatives
  ZeroDivisor,        // (b) negative exponent on a column with zeros
  Sparsity,           // (c) κ₁ / κ₂
  ZeroRow,            // (d)
  DuplicateRow,       // (d)
  ProportionalRow,    // (d)
  StructureSign,
  StructureRatio,
  UnintendedZero,     // zero exponent on a clique member
  NonFinite,
};

std::string_view reason_name(RejectReason r);

struct LevelLog {
  std::size_t latent = 0;
  int clique = -1;
  Rational step;
  std::size_t enumerated = 0;
  std::size_t scored = 0;
  double best_r2 = 0.0;
};

struct SearchTrace {
  std::size_t candidates_enumerated = 0;
  std::size_t candidates_scored = 0;
  std::size_t dedup_hits = 0;
  std::map<std::string, std::size_t> rejections;
  std::vector<LevelLog> levels;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  std::size_t rejected() const;
};

struct FilterContext {
  std::vector<ColumnStats> stats;
  std::size_t kappa1 = 0;
  std::size_t kappa2 = 0;
};

/// Constraints (a)-(c) and the within-matrix row checks of (d) on W (rows = latents).
std::optional<RejectReason> constraint_filter(const std::vector<RationalVector>& W, const FilterContext& ctx);

/// Sign pattern per row ('-', '0', '+'), rows sorted, joined by '|'.
std::string sign_code(const std::vector<RationalVector>& W);

/// Rows sorted lexicographically.
std::vector<RationalVector> canonical(const std::vector<RationalVector>& W);

class DedupTable {
 public:
  /// True when W (up to row permutation) was not present; inserts it.
  bool insert(const std::vector<RationalVector>& W);
  bool contains(const std::vector<RationalVector>& W) const;
  std::size_t size() const { return size_; }
  std::size_t buckets() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::vector<RationalVector>>> table_;
  std::size_t size_ = 0;
};

/// Data and dimensional context for a search.
struct SearchProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  DimMatrix D;
  DimVector d;
  std::vector<std::string> input_names;
  std::vector<ColumnStats> stats;
  std::string output_name = "y";

  static SearchProblem from_split(const XySplit& s);
};

/// Solution set for the configured DI mode (DI-2: E = I, e* = 0).
AffineSolutionSet search_space(const SearchProblem& prob, const SearchConfig& config);

struct SearchResult {
  std::vector<CandidateFormula> ranked;
  SearchTrace trace;
};

/// One latent level of coarse-to-fine search; `frozen` latents stay fixed and
/// enter the joint polynomial fit. With a graph, `clique` selects the member set.
SearchResult c2f_search(const SearchProblem& prob, const AffineSolutionSet& sol,
                        const StructureGraph* graph, const SearchConfig& config,
                        const std::vector<LatentSpec>& frozen = {}, int clique = -1,
                        DedupTable* shared_dedup = nullptr);

struct MultilevelResult {
  CandidateFormula best;
  std::vector<std::vector<CandidateFormula>> levels;  // ranked candidates per latent level
  SearchTrace trace;
};

MultilevelResult multilevel_search(const SearchProblem& prob, const AffineSolutionSet& sol,
                                   const SearchConfig& config, const StructureGraph* graph = nullptr);

/// z = Π x_j^{w_j} evaluated per row.
Eigen::VectorXd latent_values(const Eigen::MatrixXd& X, const RationalVector& w);

Expr latent_expr(const RationalVector& w, const std::vector<std::string>& names);

/// Fits, scores and renders a candidate from explicit latents.
CandidateFormula evaluate_candidate(const SearchProblem& prob, std::vector<LatentSpec> latents, int degree);

/// Unit of each polynomial coefficient: d − Σ k_i·dim(z_i).
CandidateFormula assign_constant_units(CandidateFormula cand, const DimVector& d,
                                       const std::vector<DimVector>& z_dims);
std::vector<DimVector> latent_dims(const CandidateFormula& cand, const DimMatrix& D);

std::string render_formula_text(const CandidateFormula& cand, const std::string& output, int digits = 6);
std::string render_formula_sexpr(const CandidateFormula& cand);

/// Strict ranking: R² (bucketed at the tie tolerance) desc, complexity asc, canonical W asc.
bool ranks_before(const CandidateFormula& a, const CandidateFormula& b, double tie_tolerance = 1e-9);

}  // namespace find
