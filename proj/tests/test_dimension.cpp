#include <algorithm>
#include <set>

#include "doctest.h"

#include "find/bundled.hpp"
#include "find/dimension.hpp"
#include "find/rng.hpp"

using namespace find;

namespace {

RationalVector rv(std::initializer_list<Rational> v) { return RationalVector(v); }

DimMatrix planetary_D() { return split_xy(solar_system(), "m", {"d", "rho", "g", "v_e", "t_d"}).D; }
DimVector kg() { return DimVector::of({{BaseDim::M, 1}}); }

bool in_span(const std::vector<RationalVector>& cols, const RationalVector& v) {
  const std::size_t p = v.size();
  std::vector<RationalVector> rows(p, RationalVector(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (std::size_t j = 0; j < p; ++j) rows[j][k] = cols[k][j];
  }
  return solve_linear(rows, v, cols.size()).has_value();
}

RationalVector minus(const RationalVector& a, const RationalVector& b) {
  RationalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

// Equal affine spans: same dimension, each basis/offset representable in the other.
bool same_affine_span(const AffineSolutionSet& s, const std::vector<RationalVector>& E, const RationalVector& e) {
  if (s.E.size() != E.size()) return false;
  for (const auto& c : E) {
    if (!in_span(s.E, c)) return false;
  }
  for (const auto& c : s.E) {
    if (!in_span(E, c)) return false;
  }
  return in_span(s.E, minus(e, s.e_star));
}

DimMatrix random_D(Rng& rng, std::size_t rows, std::size_t p) {
  DimMatrix D = DimMatrix::zeros(p);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < p; ++j) {
      if (rng.uniform() < 0.35) continue;
      D.rows[r][j] = Rational(static_cast<std::int64_t>(rng.index(7)) - 3, 1 + static_cast<std::int64_t>(rng.index(2)));
    }
  }
  return D;
}

}  // namespace

TEST_CASE("planetary solution set matches the closed form") {
  const auto sol = solve_affine(planetary_D(), kg());
  CHECK(sol.rank == 3);
  CHECK(sol.free_count() == 2);
  const std::vector<RationalVector> E = {rv({Rational(-1, 2), 0, Rational(-1, 2), 1, 0}),
                                         rv({Rational(-1, 2), 0, Rational(1, 2), 0, 1})};
  CHECK(same_affine_span(sol, E, rv({3, 1, 0, 0, 0})));
  CHECK(sol.apply(rv({0, 0})) == rv({3, 1, 0, 0, 0}));
}

TEST_CASE("all-zero D gives the identity basis") {
  const auto sol = solve_affine(DimMatrix::zeros(4), DimVector{});
  REQUIRE(sol.free_count() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(sol.E[k][j] == Rational(j == k ? 1 : 0));
    CHECK(sol.e_star[k] == Rational(0));
  }
}

TEST_CASE("kg powers never produce metres") {
  const auto D = DimMatrix::from_units({kg()});
  CHECK_THROWS_AS(solve_affine(D, DimVector::of({{BaseDim::L, 1}})), InfeasibleDimensions);
  const auto D2 = DimMatrix::from_units({kg(), kg() * 2});
  CHECK_THROWS_AS(solve_affine(D2, DimVector::of({{BaseDim::M, 1}, {BaseDim::T, 1}})), InfeasibleDimensions);
}

TEST_CASE("refine_zero_pattern") {
  const auto sol = solve_affine(planetary_D(), kg());
  SUBCASE("empty pattern is the identity") {
    const auto z = refine_zero_pattern(sol, {});
    REQUIRE(z.free_count() == 2);
    CHECK(z.F[0] == rv({1, 0}));
    CHECK(z.F[1] == rv({0, 1}));
    CHECK(z.f_star == rv({0, 0}));
  }
  SUBCASE("keeping only v_e and t_d cannot carry mass") {
    CHECK_THROWS_AS(refine_zero_pattern(sol, {0, 1, 2}), InfeasibleDimensions);
  }
  SUBCASE("dimensionless output over v_e and t_d collapses to W = 0") {
    const auto s0 = solve_affine(planetary_D(), DimVector{});
    const auto z = refine_zero_pattern(s0, {0, 1, 2});
    CHECK(z.free_count() == 0);
    CHECK_FALSE(z.nonzero_satisfiable);
  }
  SUBCASE("zeroing every carrier of the output unit is infeasible") {
    CHECK_THROWS_AS(refine_zero_pattern(sol, {0, 1, 2, 3, 4}), InfeasibleDimensions);
  }
}

TEST_CASE("zero pattern with a velocity-pair output") {
  // Output unit m^2/s^4 = v_e^2/t_d^2 exactly; keeping (v_e, t_d) leaves a unique solution.
  const auto D = planetary_D();
  const DimVector d = DimVector::of({{BaseDim::L, 2}, {BaseDim::T, -4}});
  const auto sol = solve_affine(D, d);
  const auto z = refine_zero_pattern(sol, {0, 1, 2});
  const auto w = exponents_from_params(RationalVector(z.free_count()), z, sol);
  CHECK(w == rv({0, 0, 0, 2, -2}));
  CHECK(z.nonzero_satisfiable);
}

TEST_CASE("planetary lattice points all satisfy D w = d") {
  const auto D = planetary_D();
  const auto sol = solve_affine(D, kg());
  const auto z = refine_zero_pattern(sol, {});
  CHECK(exponents_from_params(rv({0, 0}), z, sol) == rv({3, 1, 0, 0, 0}));
  for (int a = -20; a <= 20; ++a) {
    for (int b = -20; b <= 20; ++b) {
      const auto w = exponents_from_params(rv({Rational(a, 10), Rational(b, 10)}), z, sol);
      REQUIRE(satisfies(D, kg(), w));
    }
  }
}

TEST_CASE("constant_unit") {
  const DimVector z = DimVector::of({{BaseDim::L, 2}, {BaseDim::T, -4}});
  CHECK(constant_unit(kg(), z, 1) == DimVector::of({{BaseDim::M, 1}, {BaseDim::L, -2}, {BaseDim::T, 4}}));
  CHECK(constant_unit(kg(), z, 0) == kg());
  CHECK(constant_unit(kg(), DimVector{}, 3) == kg());
}

TEST_CASE("500 random feasible systems: exactness and rank-nullity") {
  Rng rng(5);
  int checked = 0;
  while (checked < 500) {
    const std::size_t p = 2 + rng.index(5);
    const std::size_t rows = 1 + rng.index(4);
    const DimMatrix D = random_D(rng, rows, p);
    // Feasible target: d = D·w0 for a random rational w0.
    RationalVector w0(p);
    for (auto& v : w0) v = Rational(static_cast<std::int64_t>(rng.index(9)) - 4, 2);
    const DimVector d = latent_unit(D, w0);
    const auto sol = solve_affine(D, d);
    REQUIRE(sol.free_count() == p - rank(D));
    for (const auto& col : sol.E) REQUIRE(latent_unit(D, col).dimensionless());
    REQUIRE(satisfies(D, d, sol.e_star));
    REQUIRE(in_span(sol.E, minus(w0, sol.e_star)));
    for (int s = 0; s < 5; ++s) {
      RationalVector lam(sol.free_count());
      for (auto& v : lam) v = Rational(static_cast<std::int64_t>(rng.index(21)) - 10, 1 + static_cast<std::int64_t>(rng.index(5)));
      REQUIRE(satisfies(D, d, sol.apply(lam)));
    }
    // Random zero pattern composed with the parametrization.
    std::vector<std::size_t> zero;
    for (std::size_t j = 0; j < p; ++j) {
      if (rng.uniform() < 0.3) zero.push_back(j);
    }
    try {
      const auto z = refine_zero_pattern(sol, zero);
      RationalVector mu(z.free_count());
      for (auto& v : mu) v = Rational(static_cast<std::int64_t>(rng.index(9)) - 4, 2);
      const auto w = exponents_from_params(mu, z, sol);
      for (auto j : zero) REQUIRE(w[j] == Rational(0));
      REQUIRE(satisfies(D, d, w));
    } catch (const InfeasibleDimensions&) {
    }
    ++checked;
  }
}

TEST_CASE("affine span equals a brute-force grid oracle on random 3x4 systems") {
  Rng rng(99);
  const std::vector<Rational> grid = {-2, Rational(-3, 2), -1, Rational(-1, 2), 0, Rational(1, 2), 1, Rational(3, 2), 2};
  for (int trial = 0; trial < 40; ++trial) {
    const DimMatrix D = random_D(rng, 3, 4);
    RationalVector w0(4);
    for (auto& v : w0) v = grid[rng.index(grid.size())];
    const DimVector d = latent_unit(D, w0);
    const auto sol = solve_affine(D, d);
    std::set<RationalVector> oracle;
    RationalVector w(4);
    for (const auto& a : grid)
      for (const auto& b : grid)
        for (const auto& c : grid)
          for (const auto& e : grid) {
            w = {a, b, c, e};
            if (satisfies(D, d, w)) oracle.insert(w);
          }
    // Oracle ⊆ parametrization.
    for (const auto& v : oracle) REQUIRE(in_span(sol.E, minus(v, sol.e_star)));
    // Parametrization ∩ grid ⊆ oracle: reuse oracle points as λ sources through a different path.
    for (int s = 0; s < 30; ++s) {
      RationalVector lam(sol.free_count());
      for (auto& v : lam) v = grid[rng.index(grid.size())];
      const auto p = sol.apply(lam);
      const bool on_grid = std::all_of(p.begin(), p.end(), [&](const Rational& x) {
        return std::find(grid.begin(), grid.end(), x) != grid.end();
      });
      if (on_grid) REQUIRE(oracle.count(p) == 1);
    }
  }
}
