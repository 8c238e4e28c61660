#include <cmath>

#include "doctest.h"

#include "find/polyfit.hpp"
#include "find/rng.hpp"
#include "find/simplify.hpp"

using namespace find;

namespace {

Eigen::VectorXd grid(double a, double b, int n) { return Eigen::VectorXd::LinSpaced(n, a, b); }

}  // namespace

TEST_CASE("sin data simplifies to a*sin(b*z)") {
  const Eigen::VectorXd z = grid(0.1, 3.0, 200);
  const Eigen::VectorXd y = z.array().sin();
  const auto t = simplify(z, y, 0.9999);
  REQUIRE(t);
  CHECK(t->form == TemplateForm::Sin);
  CHECK(std::fabs(t->params[0] - 1.0) < 1e-3);
  CHECK(std::fabs(t->params[1] - 1.0) < 1e-3);
}

TEST_CASE("exact affine data picks a+b*z^q with q = 1") {
  const Eigen::VectorXd z = grid(1, 5, 50);
  const Eigen::VectorXd y = 2.0 + 3.0 * z.array();
  const auto t = simplify(z, y, 1.0);
  REQUIRE(t);
  CHECK(t->form == TemplateForm::AffinePower);
  CHECK(t->params[2] == doctest::Approx(1.0));
  CHECK(t->params[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(t->params[1] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("pure power data picks a*z^q and renders compactly") {
  const Eigen::VectorXd z = grid(1, 5, 50);
  const Eigen::VectorXd y = 0.49 * z.array();
  const Expr latent = mul(pow(variable(0, "d"), constant(3)), variable(1, "rho"));
  const auto t = simplify(z, y, 1.0, latent);
  REQUIRE(t);
  CHECK(t->form == TemplateForm::Power);
  CHECK(render(*t) == "y = 0.49 * d^3 * rho");
}

TEST_CASE("noise has no template") {
  Rng rng(13);
  const Eigen::VectorXd z = grid(1, 2, 100);
  Eigen::VectorXd y(100);
  for (auto& v : y) v = rng.normal();
  // Baseline of an overfitting degree-5 polynomial on pure noise.
  Eigen::MatrixXd Z = z;
  const double base = fit_poly(Z, y, 5).report.r2;
  CHECK(base > 0.0);
  CHECK_FALSE(simplify(z, y, base + 0.5).has_value());
}

TEST_CASE("selected templates never fall below the baseline tolerance") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd z = grid(0.5, 3.0, 80);
    const double a = rng.uniform(0.5, 3.0), b = rng.uniform(0.3, 1.5);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) {
      switch (t % 4) {
        case 0: y(i) = a * std::exp(b * z(i)); break;
        case 1: y(i) = a * std::atan(b * z(i)); break;
        case 2: y(i) = a * std::sqrt(b + z(i) * z(i)); break;
        default: y(i) = a * std::pow(z(i), -1.5); break;
      }
    }
    Eigen::MatrixXd Z = z;
    const auto poly = fit_poly(Z, y, 5);
    const auto s = simplify(z, y, poly.report.r2);
    REQUIRE(s);
    CHECK(s->r2 >= poly.report.r2 - 0.001);
    CHECK(s->complexity <= complexity(poly.model.to_expr({variable(0, "z")})));
    CHECK(parse_sexpr(render_sexpr(s->expression), {"z"}) == s->expression);
  }
}

TEST_CASE("fit_templates covers every form") {
  const Eigen::VectorXd z = grid(1, 2, 30);
  const auto all = fit_templates(z, z, variable(0, "z"));
  CHECK(all.size() == 8);
}

TEST_CASE("complexity ceiling") {
  const Eigen::VectorXd z = grid(0.1, 3.0, 100);
  const Eigen::VectorXd y = z.array().sin();
  SimplifyOptions o;
  o.max_complexity = 3;
  CHECK_FALSE(simplify(z, y, 0.9999, variable(0, "z"), o).has_value());
}
