#include <cmath>

#include "doctest.h"

#include "find/benchgen.hpp"

using namespace find;

TEST_CASE("suite generation is reproducible and valid") {
  const auto a = generate_suite(100, 1);
  const auto b = generate_suite(100, 1);
  REQUIRE(a.size() == 100);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].W == b[i].W);
    CHECK(render_sexpr(a[i].y) == render_sexpr(b[i].y));
    CHECK_NOTHROW(validate_spec(a[i]));
    CHECK(a[i].p >= 3);
    CHECK(a[i].p <= 8);
    CHECK(a[i].s >= 1);
    CHECK(a[i].s <= std::min<std::size_t>(a[i].p, 4));
    for (const auto& row : a[i].W) {
      for (double w : row) {
        const double m = std::fabs(w);
        CHECK((m == 0.0 || m == 0.5 || m == 1.0 || m == 1.5 || m == 2.0));
      }
    }
  }
  CHECK(generate_suite(0, 1).empty());
  CHECK(render_sexpr(generate_suite(5, 2)[0].y) != render_sexpr(a[0].y));
}

TEST_CASE("grid sizes") {
  auto spec = generate_suite(1, 1)[0];
  CHECK(grid_levels(3, 1.0) == std::vector<std::size_t>{2, 2, 2});
  CHECK(grid_levels(3, 0.1) == std::vector<std::size_t>{11, 11, 11});
  std::size_t n = 1;
  for (auto l : grid_levels(8, 0.01)) n *= l;
  CHECK(n <= 20000);
  const auto ds = sample_grid(spec, 0.1);
  std::size_t expect = 1;
  for (auto l : grid_levels(spec.p, 0.1)) expect *= l;
  CHECK(ds.rows() == expect);
  for (const auto& c : ds.columns()) {
    for (double v : c.values) REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("analytic rho recovers the true structure") {
  const auto suite = generate_suite(100, 1);
  const auto rep = run_suite(suite, 0.1, RhoEstimator::Analytic);
  std::size_t exact = 0;
  for (const auto& r : rep.results) {
    const auto& m = r.metrics;
    if (m.contributing_tp_over_tp_fn == 1.0 && m.latent_count_ratio == 1.0 && m.connection_tp_over_tp_fn == 1.0 &&
        std::fabs(m.ratio_accuracy - 1.0) < 1e-6) {
      ++exact;
    }
  }
  MESSAGE("exact analytic recoveries: " << exact << " / " << rep.results.size());
  CHECK(rep.mean.contributing_tp_over_tp_fn == doctest::Approx(1.0));
  CHECK(exact >= 90);
}

TEST_CASE("estimators produce finite metrics and the density trend holds") {
  const auto suite = generate_suite(30, 5);
  for (auto est : {RhoEstimator::BackwardDiff, RhoEstimator::LocalPolyfit}) {
    const auto coarse = run_suite(suite, 1.0, est);
    const auto fine = run_suite(suite, 0.1, est);
    for (const auto* rep : {&coarse, &fine}) {
      for (const auto& r : rep->results) {
        CHECK(std::isfinite(r.metrics.contributing_tp_over_tp_fn));
        CHECK(std::isfinite(r.metrics.latent_count_ratio));
        CHECK(std::isfinite(r.metrics.connection_tp_over_tp_fn));
        CHECK(std::isfinite(r.metrics.ratio_accuracy));
      }
    }
    CHECK(fine.mean.contributing_tp_over_tp_fn >= coarse.mean.contributing_tp_over_tp_fn);
    CHECK(fine.mean.latent_count_ratio >= coarse.mean.latent_count_ratio);
    CHECK(fine.mean.connection_tp_over_tp_fn >= coarse.mean.connection_tp_over_tp_fn);
  }
}

TEST_CASE("metrics csv schema") {
  const auto suite = generate_suite(3, 1);
  const auto csv = suite_csv({run_suite(suite, 1.0, RhoEstimator::BackwardDiff)});
  CHECK(csv.rfind("spec_id,dx,estimator,m1,m2,m3,m4\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
