#include "find/dimension.hpp"

#include <algorithm>
#include <numeric>

namespace find {

namespace {

struct Rref {
  std::vector<RationalVector> rows;  // reduced rows, length n + 1 (augmented)
  std::vector<std::size_t> pivots;   // pivot column for each retained row
};

Rref reduce(std::vector<RationalVector> m, std::size_t n) {
  Rref out;
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m.size(); ++c) {
    std::size_t piv = r;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[r], m[piv]);
    const Rational inv = Rational(1) / m[r][c];
    for (auto& v : m[r]) v *= inv;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Rational f = m[i][c];
      for (std::size_t k = c; k < m[i].size(); ++k) m[i][k] -= f * m[r][k];
    }
    out.pivots.push_back(c);
    ++r;
  }
  out.rows = std::move(m);
  return out;
}

}  // namespace

std::optional<LinearSolution> solve_linear(const std::vector<RationalVector>& rows,
                                           const RationalVector& rhs, std::size_t n) {
  std::vector<RationalVector> aug;
  aug.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    RationalVector row = rows[i];
    row.push_back(rhs[i]);
    aug.push_back(std::move(row));
  }
  Rref red = reduce(std::move(aug), n);
  const std::size_t rk = red.pivots.size();
  for (std::size_t i = rk; i < red.rows.size(); ++i) {
    if (red.rows[i][n] != 0) return std::nullopt;
  }
  std::vector<bool> is_pivot(n, false);
  for (auto c : red.pivots) is_pivot[c] = true;

  LinearSolution sol;
  sol.particular.assign(n, Rational(0));
  for (std::size_t i = 0; i < rk; ++i) sol.particular[red.pivots[i]] = red.rows[i][n];
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    RationalVector v(n, Rational(0));
    v[f] = 1;
    for (std::size_t i = 0; i < rk; ++i) v[red.pivots[i]] = -red.rows[i][f];
    sol.basis.push_back(std::move(v));
  }
  return sol;
}

std::size_t rank(const std::vector<RationalVector>& rows, std::size_t n) {
  std::vector<RationalVector> aug = rows;
  for (auto& r : aug) r.push_back(Rational(0));
  return reduce(std::move(aug), n).pivots.size();
}

std::size_t rank(const DimMatrix& D) { return rank(D.rows, D.inputs); }

RationalVector AffineSolutionSet::apply(const RationalVector& lambda) const {
  RationalVector w = e_star;
  for (std::size_t k = 0; k < E.size(); ++k) {
    if (lambda[k] == 0) continue;
    for (std::size_t j = 0; j < p; ++j) w[j] += E[k][j] * lambda[k];
  }
  return w;
}

AffineSolutionSet solve_affine(const DimMatrix& D, const DimVector& d) {
  std::vector<RationalVector> rows;
  RationalVector rhs;
  for (std::size_t r = 0; r < kBaseDims; ++r) {
    const bool zero_row = std::all_of(D.rows[r].begin(), D.rows[r].end(),
                                      [](const Rational& v) { return v == 0; });
    if (zero_row) {
      if (d[r] != 0) {
        throw InfeasibleDimensions("no input carries base dimension " +
                                   std::string(kBaseNames[r]) + " required by the output");
      }
      continue;
    }
    rows.push_back(D.rows[r]);
    rhs.push_back(d[r]);
  }
  auto sol = solve_linear(rows, rhs, D.inputs);
  if (!sol) {
    throw InfeasibleDimensions("output unit " + format_unit(d) +
                               " is not a power product of the input units");
  }
  AffineSolutionSet out;
  out.p = D.inputs;
  out.E = std::move(sol->basis);
  out.e_star = std::move(sol->particular);
  out.rank = out.p - out.E.size();
  return out;
}

ZeroPatternSolution refine_zero_pattern(const AffineSolutionSet& sol,
                                        const std::vector<std::size_t>& zero_idx) {
  const std::size_t c = sol.free_count();
  ZeroPatternSolution z;
  z.zero_idx = zero_idx;
  std::sort(z.zero_idx.begin(), z.zero_idx.end());
  z.zero_idx.erase(std::unique(z.zero_idx.begin(), z.zero_idx.end()), z.zero_idx.end());
  for (std::size_t j = 0; j < sol.p; ++j) {
    if (!std::binary_search(z.zero_idx.begin(), z.zero_idx.end(), j)) z.nonzero_idx.push_back(j);
  }

  // E[ξ]·λ = −e*[ξ]
  std::vector<RationalVector> rows;
  RationalVector rhs;
  for (auto j : z.zero_idx) {
    if (j >= sol.p) throw std::out_of_range("zero index out of range");
    RationalVector row(c);
    for (std::size_t k = 0; k < c; ++k) row[k] = sol.E[k][j];
    rows.push_back(std::move(row));
    rhs.push_back(-sol.e_star[j]);
  }
  auto lin = solve_linear(rows, rhs, c);
  if (!lin) throw InfeasibleDimensions("zero pattern contradicts the dimensional constraint");
  z.F = std::move(lin->basis);
  z.f_star = std::move(lin->particular);

  // Each W[τ] entry is affine in μ; a finite union of proper hyperplanes never
  // covers the space, so only identically-zero entries make τ unsatisfiable.
  for (auto j : z.nonzero_idx) {
    auto entry = [&](const RationalVector& lambda, bool affine) {
      Rational v = affine ? sol.e_star[j] : Rational(0);
      for (std::size_t k = 0; k < c; ++k) v += sol.E[k][j] * lambda[k];
      return v;
    };
    bool identically_zero = entry(z.f_star, true) == 0;
    for (const auto& col : z.F) identically_zero = identically_zero && entry(col, false) == 0;
    if (identically_zero) z.nonzero_satisfiable = false;
  }
  return z;
}

RationalVector exponents_from_params(const RationalVector& mu, const ZeroPatternSolution& zps,
                                     const AffineSolutionSet& sol) {
  RationalVector lambda = zps.f_star;
  for (std::size_t k = 0; k < zps.F.size(); ++k) {
    if (mu[k] == 0) continue;
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] += zps.F[k][i] * mu[k];
  }
  RationalVector w = sol.apply(lambda);
  return w;
}

DimVector constant_unit(const DimVector& d, const DimVector& z_dim, const Rational& k) {
  return d - z_dim * k;
}

DimVector latent_unit(const DimMatrix& D, const RationalVector& w) {
  DimVector u;
  for (std::size_t r = 0; r < kBaseDims; ++r) {
    Rational s = 0;
    for (std::size_t j = 0; j < D.inputs; ++j) s += D.rows[r][j] * w[j];
    u[r] = s;
  }
  return u;
}

bool satisfies(const DimMatrix& D, const DimVector& d, const RationalVector& w) {
  return latent_unit(D, w) == d;
}

}  // namespace find
