#include "find/sparsereg.hpp"

#include <algorithm>
#include <cmath>

namespace find {

Derivatives numeric_derivatives(const Eigen::VectorXd& t, const Eigen::VectorXd& x) {
  const Eigen::Index n = t.size();
  if (x.size() != n) throw SeriesError("t and x lengths differ");
  if (n < 5) throw SeriesError("need at least 5 samples, got " + std::to_string(n));
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(t(i) > t(i - 1))) throw SeriesError("timestamps must be strictly increasing (row " + std::to_string(i) + ")");
  }
  const Eigen::Index w = std::min<Eigen::Index>(7, n);
  const Eigen::Index half = w / 2;
  Derivatives d{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index start = std::clamp<Eigen::Index>(i - half, 0, n - w);
    double h = 0.0;
    for (Eigen::Index q = start; q < start + w; ++q) h = std::max(h, std::fabs(t(q) - t(i)));
    Eigen::MatrixXd A(w, 4);
    Eigen::VectorXd b(w);
    for (Eigen::Index q = 0; q < w; ++q) {
      const double s = (t(start + q) - t(i)) / h;
      A(q, 0) = 1.0;
      A(q, 1) = s;
      A(q, 2) = s * s;
      A(q, 3) = s * s * s;
      b(q) = x(start + q);
    }
    const Eigen::Vector4d c = A.colPivHouseholderQr().solve(b);
    d.d1(i) = c(1) / h;
    d.d2(i) = 2.0 * c(2) / (h * h);
  }
  return d;
}

BasisLibrary default_library(const Eigen::VectorXd& x, const Eigen::VectorXd& d1, const Eigen::VectorXd& d2) {
  BasisLibrary lib;
  lib.names = {"1", "x", "x''", "x^2", "x*x'", "x*x''", "x'^2", "x'*x''", "x''^2"};
  const Eigen::Index n = x.size();
  lib.phi.resize(n, 9);
  lib.phi.col(0).setOnes();
  lib.phi.col(1) = x;
  lib.phi.col(2) = d2;
  lib.phi.col(3) = x.cwiseProduct(x);
  lib.phi.col(4) = x.cwiseProduct(d1);
  lib.phi.col(5) = x.cwiseProduct(d2);
  lib.phi.col(6) = d1.cwiseProduct(d1);
  lib.phi.col(7) = d1.cwiseProduct(d2);
  lib.phi.col(8) = d2.cwiseProduct(d2);
  return lib;
}

namespace {

// Truncated-SVD least squares on RMS-normalized columns; returns raw-unit coefficients.
Eigen::VectorXd solve_normalized(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target,
                                 const std::vector<std::size_t>& cols, double rcond) {
  const auto k = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd A(phi.rows(), k);
  Eigen::VectorXd scale(k);
  for (Eigen::Index q = 0; q < k; ++q) {
    const auto c = phi.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(q)]));
    const double rms = std::sqrt(c.squaredNorm() / static_cast<double>(phi.rows()));
    scale(q) = rms > 0 ? rms : 1.0;
    A.col(q) = c / scale(q);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& S = svd.singularValues();
  const double cutoff = S.size() ? rcond * S(0) : 0.0;
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(k);
  const Eigen::VectorXd Ut = svd.matrixU().transpose() * target;
  for (Eigen::Index i = 0; i < S.size(); ++i) {
    if (S(i) > cutoff) coef += svd.matrixV().col(i) * (Ut(i) / S(i));
  }
  return coef.cwiseQuotient(scale);
}

SparseModel run_stlsq(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target, double threshold,
                      std::vector<std::size_t> active, const StlsqOptions& options) {
  if (!(threshold > 0)) throw std::invalid_argument("STLSQ threshold must be positive");
  SparseModel m;
  m.threshold = threshold;
  m.xi = Eigen::VectorXd::Zero(phi.cols());
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    m.iterations = it + 1;
    if (active.empty()) break;
    const Eigen::VectorXd c = solve_normalized(phi, target, active, options.rcond);
    std::vector<std::size_t> keep;
    m.xi.setZero();
    for (std::size_t q = 0; q < active.size(); ++q) {
      const double v = c(static_cast<Eigen::Index>(q));
      if (std::fabs(v) >= threshold) keep.push_back(active[q]);
      m.xi(static_cast<Eigen::Index>(active[q])) = v;
    }
    if (keep == active) break;
    active = std::move(keep);
    m.xi.setZero();
    if (active.empty()) break;
  }
  if (!active.empty()) {
    const Eigen::VectorXd c = solve_normalized(phi, target, active, options.rcond);
    m.xi.setZero();
    for (std::size_t q = 0; q < active.size(); ++q) m.xi(static_cast<Eigen::Index>(active[q])) = c(static_cast<Eigen::Index>(q));
  }
  m.active = active;
  m.zero_model = active.empty();
  return m;
}

}  // namespace

SparseModel stlsq(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target, double threshold,
                  const StlsqOptions& options) {
  std::vector<std::size_t> all(static_cast<std::size_t>(phi.cols()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  return run_stlsq(phi, target, threshold, all, options);
}

SparseModel stlsq_on(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target, double threshold,
                     const std::vector<std::size_t>& active, const StlsqOptions& options) {
  return run_stlsq(phi, target, threshold, active, options);
}

double default_threshold(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target, const StlsqOptions& options) {
  std::vector<std::size_t> all(static_cast<std::size_t>(phi.cols()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  const Eigen::VectorXd c = solve_normalized(phi, target, all, options.rcond);
  return 0.05 * c.cwiseAbs().maxCoeff();
}

Series simulate_smd(const SmdParams& p, double dt, double t_end) {
  if (!(p.m > 0) || !(p.c > 0) || !(p.k > 0)) throw SeriesError("spring-mass-damper needs m, c, k > 0");
  const auto steps = static_cast<Eigen::Index>(std::llround(t_end / dt));
  Series s{Eigen::VectorXd(steps + 1), Eigen::VectorXd(steps + 1)};
  double x = p.delta, v = 0.0;
  auto acc = [&](double xx, double vv) { return -(p.c * vv + p.k * xx) / p.m; };
  for (Eigen::Index i = 0; i <= steps; ++i) {
    s.t(i) = static_cast<double>(i) * dt;
    s.x(i) = x;
    const double k1x = v, k1v = acc(x, v);
    const double k2x = v + 0.5 * dt * k1v, k2v = acc(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
    const double k3x = v + 0.5 * dt * k2v, k3v = acc(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
    const double k4x = v + dt * k3v, k4v = acc(x + dt * k3x, v + dt * k3v);
    x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return s;
}

Series series_from_dataset(const Dataset& ds) {
  if (ds.index_of("t") < 0 || ds.index_of("x") < 0) throw SeriesError("series needs columns t and x");
  const auto& t = ds.column("t").values;
  const auto& x = ds.column("x").values;
  Series s{Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size())),
           Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()))};
  return s;
}

SeriesFit identify_series(const Series& s, double threshold) {
  const auto d = numeric_derivatives(s.t, s.x);
  SeriesFit f;
  f.library = default_library(s.x, d.d1, d.d2);
  const double lam = threshold > 0 ? threshold : default_threshold(f.library.phi, d.d1);
  f.model = stlsq(f.library.phi, d.d1, lam);
  return f;
}

std::vector<MetaLaw> meta_discover(const Dataset& params, const std::vector<std::string>& inputs,
                                   const std::vector<std::string>& outputs, const SearchConfig& config) {
  if (params.rows() < 6) throw SeriesError("meta step needs at least 6 parameter sets");
  std::vector<MetaLaw> laws;
  for (const auto& out : outputs) {
    const auto split = split_xy(params, out, inputs);
    const auto prob = SearchProblem::from_split(split);
    SearchConfig cfg = config;
    cfg.mode = DIMode::DI1;
    const auto sol = search_space(prob, cfg);
    auto r = multilevel_search(prob, sol, cfg);
    MetaLaw law;
    law.output = out;
    law.best = r.best;
    if (!r.levels.empty()) law.ranked = r.levels.front();
    law.trace = r.trace;
    laws.push_back(std::move(law));
  }
  return laws;
}

}  // namespace find
