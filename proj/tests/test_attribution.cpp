#include <cmath>

#include "doctest.h"

#include "find/attribution.hpp"
#include "find/bundled.hpp"
#include "find/rng.hpp"

using namespace find;

namespace {

Eigen::MatrixXd random_X(std::size_t b, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(b, p);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < p; ++j) X(i, j) = rng.uniform(-1, 1);
  }
  return X;
}

// Exact Shapley values of an additive model against a background set:
// φ_j(x) = f_j(x_j) − mean_bg f_j.
double additive_phi(double fx, const Eigen::VectorXd& f_bg) { return fx - f_bg.mean(); }

}  // namespace

TEST_CASE("surrogate basics") {
  const Eigen::MatrixXd X = random_X(40, 2, 1);
  SUBCASE("constant output") {
    const auto m = fit_surrogate(X, Eigen::VectorXd::Constant(40, 3.5));
    CHECK(m.predict(Eigen::VectorXd(Eigen::VectorXd::Zero(2))) == doctest::Approx(3.5));
  }
  SUBCASE("training points are reproduced") {
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) y(i) = X(i, 0) * 7 - X(i, 1);
    const auto m = fit_surrogate(X, y);
    for (int i = 0; i < 40; ++i) CHECK(m.predict(Eigen::VectorXd(X.row(i).transpose())) == y(i));
    CHECK(m.k() == 10);
  }
  SUBCASE("too few rows") {
    CHECK_THROWS_AS(fit_surrogate(X.topRows(2), Eigen::VectorXd::Zero(2)), DatasetError);
  }
}

TEST_CASE("surrogate interpolates a dense 1-D grid below the spacing") {
  const int n = 101;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = i * 0.01;
    y(i) = X(i, 0);
  }
  const auto m = fit_surrogate(X, y);
  for (int i = 5; i < n - 6; ++i) {
    const double mid = (i + 0.5) * 0.01;
    Eigen::VectorXd q(1);
    q << mid;
    CHECK(std::fabs(m.predict(q) - mid) < 0.01);
  }
}

TEST_CASE("Shapley dummy feature") {
  const Eigen::MatrixXd X = random_X(200, 3, 2);
  BatchPredictor f = [](const Eigen::MatrixXd& Q) -> Eigen::VectorXd {
    return (Q.col(0).array().square() + 2.0 * Q.col(1).array()).matrix();
  };
  ShapConfig cfg;
  cfg.n_permutations = 500;
  cfg.seed = 4;
  const auto r = shapley_values(f, X, cfg);
  const double mx = std::max(r.mean_abs[0], r.mean_abs[1]);
  CHECK(r.mean_abs[2] < 0.05 * mx);
  CHECK(r.ranking.front() == 1);
}

TEST_CASE("Shapley values of an additive model match exact enumeration") {
  const Eigen::MatrixXd X = random_X(100, 2, 5);
  auto f1 = [](double v) { return std::sin(2 * v); };
  auto f2 = [](double v) { return v * v * v; };
  BatchPredictor f = [&](const Eigen::MatrixXd& Q) -> Eigen::VectorXd {
    Eigen::VectorXd out(Q.rows());
    for (Eigen::Index i = 0; i < Q.rows(); ++i) out(i) = f1(Q(i, 0)) + f2(Q(i, 1));
    return out;
  };
  ShapConfig cfg;
  cfg.n_permutations = 1000;
  cfg.background_size = 100;
  cfg.seed = 9;
  const auto r = shapley_values(f, X, cfg);
  // Background = the whole table, so the exact values use the full-table means.
  Eigen::VectorXd g1(X.rows()), g2(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    g1(i) = f1(X(i, 0));
    g2(i) = f2(X(i, 1));
  }
  double err = 0.0;
  for (std::size_t e = 0; e < r.eval_rows.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(r.eval_rows[e]);
    err += std::fabs(r.phi(e, 0) - additive_phi(g1(i), g1));
    err += std::fabs(r.phi(e, 1) - additive_phi(g2(i), g2));
  }
  err /= 2.0 * static_cast<double>(r.eval_rows.size());
  // Monte-Carlo standard error ≈ sd(f_j)/√1000 ≈ 0.02.
  CHECK(err < 0.03);
}

TEST_CASE("Shapley efficiency holds per row") {
  const Eigen::MatrixXd X = random_X(80, 4, 6);
  BatchPredictor f = [](const Eigen::MatrixXd& Q) -> Eigen::VectorXd {
    return (Q.col(0).array() * Q.col(1).array() + Q.col(2).array().exp() - Q.col(3).array()).matrix();
  };
  ShapConfig cfg;
  cfg.n_permutations = 50;
  const auto r = shapley_values(f, X, cfg);
  for (Eigen::Index e = 0; e < r.phi.rows(); ++e) {
    CHECK(r.phi.row(e).sum() == doctest::Approx(r.prediction(e) - r.base_value(e)).epsilon(1e-9));
  }
}

TEST_CASE("Shapley symmetry for identical columns") {
  Eigen::MatrixXd X = random_X(150, 3, 7);
  X.col(1) = X.col(0);
  BatchPredictor f = [](const Eigen::MatrixXd& Q) -> Eigen::VectorXd {
    return (Q.col(0).array() + Q.col(1).array() + 0.3 * Q.col(2).array()).matrix();
  };
  ShapConfig cfg;
  cfg.n_permutations = 1000;
  cfg.seed = 12;
  const auto r = shapley_values(f, X, cfg);
  CHECK(std::fabs(r.mean_abs[0] - r.mean_abs[1]) / std::max(r.mean_abs[0], r.mean_abs[1]) < 0.10);
}

TEST_CASE("attribution is deterministic under a fixed seed") {
  const auto split = split_xy(solar_system(), "m");
  const auto model = fit_surrogate(split.X, split.y);
  ShapConfig cfg;
  cfg.seed = 42;
  const auto a = shapley_values(model, split.X, cfg, split.input_names);
  const auto b = shapley_values(model, split.X, cfg, split.input_names);
  CHECK(a.mean_abs == b.mean_abs);
  CHECK(a.ranking == b.ranking);
  CHECK((a.phi.array() == b.phi.array()).all());
}

TEST_CASE("planetary top five shares four published members") {
  const auto split = split_xy(solar_system(), "m");
  const auto model = fit_surrogate(split.X, split.y);
  ShapConfig cfg;
  auto r = shapley_values(model, split.X, cfg, split.input_names);
  const auto sel = select_inputs(r, SelectionPolicy::top_k(5));
  REQUIRE(sel.size() == 5);
  std::vector<std::string> names;
  for (auto j : sel) names.push_back(split.input_names[j]);
  for (const char* want : {"d", "rho", "g", "v_e"}) {
    CHECK_MESSAGE(std::find(names.begin(), names.end(), want) != names.end(), want);
  }
}

TEST_CASE("selection policies") {
  AttributionReport r;
  r.features = {"a", "b", "c"};
  r.mean_abs = {0.005, 0.99, 0.005};
  r.ranking = {1, 0, 2};
  CHECK(select_inputs(r, SelectionPolicy::cumulative(0.95)) == std::vector<std::size_t>{1});
  CHECK(r.selected == std::vector<std::size_t>{1});
  CHECK(select_inputs(r, SelectionPolicy::top_k(3)).size() == 3);
  CHECK(select_inputs(r, SelectionPolicy::top_k(2)) == std::vector<std::size_t>{1, 0});
  CHECK_THROWS(select_inputs(r, SelectionPolicy::top_k(4)));

  AttributionReport flat;
  flat.features.resize(12);
  flat.mean_abs.assign(12, 1.0);
  for (std::size_t i = 0; i < 12; ++i) flat.ranking.push_back(i);
  CHECK(select_inputs(flat, SelectionPolicy::cumulative(0.95)).size() == 8);
}

TEST_CASE("feature enrichment unit rules") {
  std::vector<Column> cols = {
      {"a", parse_unit("m"), {1, 2, 3, 4}},
      {"b", parse_unit("s"), {2, 3, 4, 5}},
      {"theta", {}, {0.1, 0.2, 0.3, 0.4}},
      {"z", {}, {0.0, 1.0, -1.0, 2.0}},
  };
  const Dataset ds(cols);
  auto has = [](const EnrichResult& r, const std::string& n) {
    return std::find(r.added.begin(), r.added.end(), n) != r.added.end();
  };
  SUBCASE("division") {
    const auto r = enrich_features(ds, {}, {BinaryOp::Div});
    REQUIRE(has(r, "a/b"));
    CHECK(r.dataset.column("a/b").unit == parse_unit("m/s"));
    CHECK_FALSE(has(r, "theta/z"));
  }
  SUBCASE("sin on dimensionless only") {
    const auto r = enrich_features(ds, {UnaryOp::Sin}, {});
    CHECK(has(r, "sin(theta)"));
    CHECK_FALSE(has(r, "sin(a)"));
  }
  SUBCASE("addition needs matching units") {
    const auto r = enrich_features(ds, {}, {BinaryOp::Add});
    CHECK_FALSE(has(r, "a+b"));
    CHECK(has(r, "theta+z"));
    CHECK(r.skipped.size() >= 1);
  }
  SUBCASE("sqrt halves, log skips non-positive") {
    const auto r = enrich_features(ds, {UnaryOp::Sqrt, UnaryOp::Log}, {});
    CHECK(r.dataset.column("sqrt(a)").unit == parse_unit("m^(1/2)"));
    CHECK(has(r, "log(theta)"));
    CHECK_FALSE(has(r, "log(z)"));
  }
  SUBCASE("no derived column is non-finite") {
    const auto r = enrich_features(ds, {UnaryOp::Cos, UnaryOp::Sin, UnaryOp::Tan, UnaryOp::Exp, UnaryOp::Abs,
                                        UnaryOp::Log, UnaryOp::Sqrt},
                                   {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div});
    for (const auto& c : r.dataset.columns()) {
      for (double v : c.values) REQUIRE(std::isfinite(v));
    }
  }
}
