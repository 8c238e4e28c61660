#include <cmath>

#include "doctest.h"

#include "find/polyfit.hpp"
#include "find/rng.hpp"

using namespace find;

TEST_CASE("monomial enumeration order and count") {
  const auto m = monomials(2, 2);
  const std::vector<MultiIndex> expect = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  CHECK(m == expect);
  // C(s+n, n)
  CHECK(monomials(3, 5).size() == 56);
  CHECK(monomials(1, 5).size() == 6);
}

TEST_CASE("exact recovery of a known polynomial") {
  Rng rng(3);
  Eigen::MatrixXd Z(60, 2);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) {
    Z(i, 0) = rng.uniform(1, 5);
    Z(i, 1) = rng.uniform(-2, 2);
    y(i) = 3.0 - 2.0 * Z(i, 0) + 0.5 * Z(i, 0) * Z(i, 1) + 4.0 * Z(i, 1) * Z(i, 1);
  }
  const auto f = fit_poly(Z, y, 2);
  CHECK(f.report.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.model.coefficient({0, 0}) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(f.model.coefficient({1, 0}) == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(f.model.coefficient({1, 1}) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(f.model.coefficient({0, 2}) == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(std::fabs(f.model.coefficient({2, 0})) < 1e-8);
  const Eigen::VectorXd yh = f.model.predict(Z);
  CHECK((yh - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("raw coefficients hold across large latent scales") {
  Eigen::MatrixXd Z(30, 1);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    Z(i, 0) = 1e20 * (1.0 + i);
    y(i) = 6.8e-26 * Z(i, 0);
  }
  const auto f = fit_poly(Z, y, 1);
  CHECK(f.model.coefficient({1}) == doctest::Approx(6.8e-26).epsilon(1e-9));
}

TEST_CASE("degree-5 fit of sin on [-1, 1]") {
  const int n = 200;
  Eigen::MatrixXd Z(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    Z(i, 0) = -1.0 + 2.0 * i / (n - 1);
    y(i) = std::sin(Z(i, 0));
  }
  const auto f = fit_poly(Z, y, 5);
  const Eigen::VectorXd yh = f.model.predict(Z);
  CHECK((yh - y).cwiseAbs().maxCoeff() < 1e-3);
  CHECK(f.report.r2 > 0.9999);
}

TEST_CASE("rank deficient design is flagged") {
  Eigen::MatrixXd Z(20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    Z(i, 0) = i + 1.0;
    Z(i, 1) = 2.0 * (i + 1.0);
    y(i) = 1.0 + Z(i, 0);
  }
  const auto f = fit_poly(Z, y, 1);
  CHECK(f.report.rank_deficient);
  CHECK(f.report.r2 == doctest::Approx(1.0));
}

TEST_CASE("r_squared edge cases") {
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  CHECK(r_squared(y, y) == 1.0);
  Eigen::VectorXd mean = Eigen::VectorXd::Constant(4, 2.5);
  CHECK(r_squared(y, mean) == doctest::Approx(0.0));
  CHECK(r_squared(y, -y) < 0.0);
  CHECK_THROWS_AS(r_squared(Eigen::VectorXd::Constant(4, 3.0), y), PolyfitError);
}

TEST_CASE("to_expr omits zero terms") {
  Eigen::MatrixXd Z(10, 1);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    Z(i, 0) = i + 1.0;
    y(i) = 2.0 * Z(i, 0);
  }
  auto f = fit_poly(Z, y, 1);
  f.model.coefficients[0] = 0.0;
  const Expr e = f.model.to_expr({variable(0, "z1")});
  CHECK(render_text(e) == "2 * z1");
}

TEST_CASE("r_squared hand arithmetic") {
  Eigen::VectorXd y(3), yh(3);
  y << 1, 2, 3;
  yh << 1, 2, 4;
  CHECK(r_squared(y, yh) == doctest::Approx(0.5));
}

TEST_CASE("predictions are invariant under latent rescaling") {
  Rng rng(8);
  Eigen::MatrixXd Z(80, 2);
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) {
    Z(i, 0) = rng.uniform(1, 3);
    Z(i, 1) = rng.uniform(1, 3);
    y(i) = std::exp(Z(i, 0)) / Z(i, 1);
  }
  Eigen::MatrixXd Zc = Z;
  Zc.col(0) *= 1e6;
  Zc.col(1) *= 1e-4;
  const Eigen::VectorXd a = fit_poly(Z, y, 5).model.predict(Z);
  const Eigen::VectorXd b = fit_poly(Zc, y, 5).model.predict(Zc);
  CHECK(((a - b).cwiseAbs().array() / y.cwiseAbs().array()).maxCoeff() < 1e-9);
}

TEST_CASE("complexity counts nodes") {
  const Expr x1 = variable(0, "x1");
  CHECK(complexity(constant(2.0)) == 1);
  CHECK(complexity(mul(constant(0.3), pow(x1, constant(2)))) == 5);
  Eigen::MatrixXd Z(30, 1);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    Z(i, 0) = 1.0 + 0.1 * i;
    y(i) = std::log(Z(i, 0));
  }
  const auto f = fit_poly(Z, y, 5);
  CHECK(complexity(f.model.to_expr({pow(x1, constant(2))})) > 5);
}
