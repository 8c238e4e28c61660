#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "find/dataset.hpp"
#include "find/rational.hpp"

namespace find {

class InfeasibleDimensions : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solutions of an affine rational system, x = particular + Σ basis[k]·t_k.
struct LinearSolution {
  RationalVector particular;
  std::vector<RationalVector> basis;  // each of length n
};

/// Exact Gauss-Jordan over rationals, pivot = first nonzero entry in the column.
/// `rows` are the equations (each of length n). Returns nullopt if inconsistent.
std::optional<LinearSolution> solve_linear(const std::vector<RationalVector>& rows,
                                           const RationalVector& rhs, std::size_t n);

std::size_t rank(const std::vector<RationalVector>& rows, std::size_t n);
std::size_t rank(const DimMatrix& D);

/// {W : D·Wᵀ = d} = {E·λ + e_star}.
struct AffineSolutionSet {
  std::size_t p = 0;
  std::vector<RationalVector> E;  // columns, each of length p
  RationalVector e_star;
  std::size_t rank = 0;

  std::size_t free_count() const { return E.size(); }
  RationalVector apply(const RationalVector& lambda) const;
};

/// All-zero rows of D are dropped before elimination. Throws InfeasibleDimensions.
AffineSolutionSet solve_affine(const DimMatrix& D, const DimVector& d);

/// λ = F·μ + f_star restricted so that W[zero_idx] = 0.
struct ZeroPatternSolution {
  std::vector<RationalVector> F;  // columns in λ-space
  RationalVector f_star;
  std::vector<std::size_t> zero_idx;
  std::vector<std::size_t> nonzero_idx;
  // Some μ makes every W[nonzero_idx] entry nonzero.
  bool nonzero_satisfiable = true;

  std::size_t free_count() const { return F.size(); }
};

ZeroPatternSolution refine_zero_pattern(const AffineSolutionSet& sol,
                                        const std::vector<std::size_t>& zero_idx);

RationalVector exponents_from_params(const RationalVector& mu, const ZeroPatternSolution& zps,
                                     const AffineSolutionSet& sol);

/// Unit a constant must carry so that a·z^k has unit d.
DimVector constant_unit(const DimVector& d, const DimVector& z_dim, const Rational& k);

/// Unit of Π x_j^{w_j}.
DimVector latent_unit(const DimMatrix& D, const RationalVector& w);

/// D·w for every base dimension.
bool satisfies(const DimMatrix& D, const DimVector& d, const RationalVector& w);

}  // namespace find
