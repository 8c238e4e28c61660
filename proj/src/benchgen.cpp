#include "find/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "find/parallel.hpp"
#include "find/rng.hpp"

namespace find {

namespace {

constexpr double kMagnitudes[] = {0.5, 1.0, 1.5, 2.0};

// Corners of [1,2]^p plus random interior points, for range probing.
std::vector<std::vector<double>> probe_points(std::size_t p, Rng& rng) {
  std::vector<std::vector<double>> pts;
  const std::size_t corners = p <= 10 ? (std::size_t{1} << p) : 0;
  for (std::size_t m = 0; m < corners; ++m) {
    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j) x[j] = (m >> j) & 1 ? 2.0 : 1.0;
    pts.push_back(std::move(x));
  }
  for (int r = 0; r < 64; ++r) {
    std::vector<double> x(p);
    for (auto& v : x) v = rng.uniform(1.0, 2.0);
    pts.push_back(std::move(x));
  }
  return pts;
}

double max_abs(const Expr& e, const std::vector<std::vector<double>>& zs) {
  double m = 0.0;
  for (const auto& z : zs) m = std::max(m, std::fabs(eval<double>(e, z)));
  return m;
}

// Random unary composition of u = ẑ_i with depth ≤ `depth`.
Expr random_transform(const Expr& u, int depth, Rng& rng, const std::vector<std::vector<double>>& zs) {
  const std::size_t choice = depth <= 1 ? 0 : rng.index(4);
  switch (choice) {
    case 1: {  // sin
      Expr inner = random_transform(u, depth - 1, rng, zs);
      return apply(Op::Sin, mul(constant(rng.uniform(0.5, 2.0)), std::move(inner)));
    }
    case 2: {  // exp, argument rescaled so |arg| ≤ 5 on the domain
      Expr inner = random_transform(u, depth - 1, rng, zs);
      const double m = max_abs(inner, zs);
      const double kappa = m > 5.0 ? 5.0 / m : 1.0;
      return apply(Op::Exp, mul(constant(kappa * (rng.uniform() < 0.5 ? -1.0 : 1.0)), std::move(inner)));
    }
    case 3: {  // product of two transforms of the same latent
      Expr a = random_transform(u, depth - 1, rng, zs);
      Expr b = random_transform(u, depth - 1, rng, zs);
      return mul(std::move(a), std::move(b));
    }
    default: {  // polynomial a₁u + a₂u²
      const double a1 = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      const double a2 = rng.uniform(-1.0, 1.0);
      return add(mul(constant(a1), u), mul(constant(a2), pow(u, constant(2.0))));
    }
  }
}

Expr substitute(const Expr& e, const std::vector<Expr>& by_index) {
  if (e.op == Op::Var) return by_index.at(e.index);
  Expr out = e;
  for (auto& a : out.args) a = substitute(a, by_index);
  return out;
}

}  // namespace

StructureGraph SyntheticSpec::truth() const { return graph_from_weights(W, p); }

std::vector<std::string> SyntheticSpec::input_names() const {
  std::vector<std::string> n;
  for (std::size_t j = 0; j < p; ++j) n.push_back("x" + std::to_string(j + 1));
  return n;
}

void validate_spec(const SyntheticSpec& spec) {
  if (spec.p < 3 || spec.p > 8) throw std::logic_error("p out of range");
  if (spec.s < 1 || spec.s > std::min<std::size_t>(spec.p, 4)) throw std::logic_error("s out of range");
  if (spec.W.size() != spec.s) throw std::logic_error("W row count mismatch");
  std::vector<int> owners(spec.p, 0);
  for (const auto& row : spec.W) {
    if (row.size() != spec.p) throw std::logic_error("W column count mismatch");
    std::size_t nnz = 0;
    for (std::size_t j = 0; j < spec.p; ++j) {
      if (row[j] == 0.0) continue;
      ++nnz;
      ++owners[j];
      const double a = std::fabs(row[j]);
      if (std::find(std::begin(kMagnitudes), std::end(kMagnitudes), a) == std::end(kMagnitudes)) {
        throw std::logic_error("weight outside {±2, ±1.5, ±1, ±0.5}");
      }
    }
    if (nnz == 0) throw std::logic_error("latent without inputs");
  }
  for (auto o : owners) {
    if (o > 1) throw std::logic_error("latent supports overlap");
  }
  Rng rng(spec.seed, 0x5eed);
  const auto names = spec.input_names();
  for (const auto& x : probe_points(spec.p, rng)) {
    if (!std::isfinite(eval<double>(spec.y, x))) throw std::logic_error("composite not finite on the domain");
  }
}

std::vector<SyntheticSpec> generate_suite(std::size_t n, std::uint64_t seed) {
  std::vector<SyntheticSpec> suite;
  for (std::size_t id = 0; id < n; ++id) {
    Rng rng(seed, id + 1);
    SyntheticSpec spec;
    spec.id = id;
    spec.seed = seed;
    spec.p = 3 + rng.index(6);
    spec.s = 1 + rng.index(std::min<std::size_t>(spec.p, 4));
    spec.W.assign(spec.s, std::vector<double>(spec.p, 0.0));
    std::vector<std::size_t> order(spec.p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t q = 0; q < spec.p; ++q) {
      std::size_t latent;
      if (q < spec.s) {
        latent = q;
      } else {
        if (rng.uniform() < 0.15) continue;  // inert input
        latent = rng.index(spec.s);
      }
      const double mag = kMagnitudes[rng.index(4)];
      spec.W[latent][order[q]] = rng.uniform() < 0.5 ? -mag : mag;
    }
    const auto names = spec.input_names();
    Rng probe_rng(seed, 0x9e3779b97f4a7c15ULL + id);
    const auto probes = probe_points(spec.p, probe_rng);

    std::vector<Expr> zhat;
    for (std::size_t i = 0; i < spec.s; ++i) {
      double zc = 1.0;
      RationalVector w(spec.p);
      for (std::size_t j = 0; j < spec.p; ++j) {
        zc *= std::pow(1.5, spec.W[i][j]);
        w[j] = snap(spec.W[i][j], 2);
      }
      spec.z_center.push_back(zc);
      Expr lat;
      bool have = false;
      for (std::size_t j = 0; j < spec.p; ++j) {
        if (w[j] == 0) continue;
        Expr f = variable(j, names[j]);
        if (w[j] != 1) f = pow(std::move(f), constant(to_double(w[j])));
        lat = have ? mul(std::move(lat), std::move(f)) : std::move(f);
        have = true;
      }
      zhat.push_back(mul(constant(1.0 / zc), std::move(lat)));
    }
    // Latent values at the probe points, for argument rescaling.
    std::vector<std::vector<std::vector<double>>> zprobe(spec.s);
    for (std::size_t i = 0; i < spec.s; ++i) {
      for (const auto& x : probes) zprobe[i].push_back({eval<double>(zhat[i], x)});
    }
    Expr f2;
    for (std::size_t i = 0; i < spec.s; ++i) {
      const int depth = 1 + static_cast<int>(rng.index(3));
      Expr g = random_transform(variable(0, "u"), depth, rng, zprobe[i]);
      g = substitute(g, {variable(i, "z" + std::to_string(i + 1))});
      if (rng.uniform() < 0.5) g = neg(std::move(g));
      f2 = i == 0 ? std::move(g) : add(std::move(f2), std::move(g));
    }
    spec.f2 = f2;
    spec.y = substitute(f2, zhat);
    validate_spec(spec);
    suite.push_back(std::move(spec));
  }
  return suite;
}

std::vector<std::size_t> grid_levels(std::size_t p, double dx, std::size_t cap) {
  if (!(dx > 0)) throw std::invalid_argument("grid spacing must be positive");
  const auto base = static_cast<std::size_t>(std::llround(1.0 / dx)) + 1;
  std::vector<std::size_t> levels(p, std::max<std::size_t>(2, base));
  auto total = [&] {
    double t = 1.0;
    for (auto l : levels) t *= static_cast<double>(l);
    return t;
  };
  while (total() > static_cast<double>(cap)) {
    auto it = std::max_element(levels.begin(), levels.end());
    if (*it <= 2) break;
    --*it;
  }
  return levels;
}

Dataset sample_grid(const SyntheticSpec& spec, double dx, std::size_t cap) {
  const auto levels = grid_levels(spec.p, dx, cap);
  std::size_t total = 1;
  for (auto l : levels) total *= l;
  const auto names = spec.input_names();
  std::vector<Column> cols(spec.p + 1);
  for (std::size_t j = 0; j < spec.p; ++j) {
    cols[j].name = names[j];
    cols[j].values.resize(total);
  }
  cols[spec.p].name = "y";
  cols[spec.p].values.resize(total);
  std::vector<double> x(spec.p);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    for (std::size_t j = spec.p; j-- > 0;) {
      const std::size_t k = rem % levels[j];
      rem /= levels[j];
      x[j] = 1.0 + static_cast<double>(k) / static_cast<double>(levels[j] - 1);
    }
    for (std::size_t j = 0; j < spec.p; ++j) cols[j].values[n] = x[j];
    cols[spec.p].values[n] = eval<double>(spec.y, x);
  }
  char prov[64];
  std::snprintf(prov, sizeof prov, "benchgen spec %zu dx=%g", spec.id, dx);
  return Dataset(std::move(cols), prov);
}

std::string estimator_name(RhoEstimator e) {
  switch (e) {
    case RhoEstimator::BackwardDiff: return "backward";
    case RhoEstimator::LocalPolyfit: return "polyfit";
    case RhoEstimator::Analytic: return "analytic";
  }
  return "?";
}

Eigen::MatrixXd analytic_rho(const SyntheticSpec& spec, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd rho(X.rows(), X.cols());
  std::vector<Dual> vars(spec.p);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < spec.p; ++j) {
      for (std::size_t q = 0; q < spec.p; ++q) {
        vars[q] = {X(i, static_cast<Eigen::Index>(q)), q == j ? 1.0 : 0.0};
      }
      const Dual r = eval<Dual>(spec.y, vars);
      rho(i, static_cast<Eigen::Index>(j)) = X(i, static_cast<Eigen::Index>(j)) * r.der;
    }
  }
  return rho;
}

StructureGraph identify_structure(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, RhoEstimator estimator,
                                  const SyntheticSpec* spec) {
  Eigen::MatrixXd rho;
  if (estimator == RhoEstimator::Analytic) {
    if (!spec) throw std::invalid_argument("analytic ρ needs the generating spec");
    rho = analytic_rho(*spec, X);
  } else {
    const auto method = estimator == RhoEstimator::BackwardDiff ? DerivativeMethod::BackwardDiff
                                                                : DerivativeMethod::LocalPolyfit;
    rho = rho_from_partials(X, estimate_partials(X, y, method));
  }
  return weight_ratios(rho, cluster_latents(ppmcc(rho)));
}

SuiteReport run_suite(const std::vector<SyntheticSpec>& suite, double dx, RhoEstimator estimator, std::size_t cap) {
  if (suite.empty()) throw std::invalid_argument("empty suite");
  SuiteReport rep;
  rep.dx = dx;
  rep.estimator = estimator;
  rep.results.resize(suite.size());
  parallel_for(suite.size(), [&](std::size_t n) {
    const auto& spec = suite[n];
    const Dataset ds = sample_grid(spec, dx, cap);
    const auto split = split_xy(ds, "y");
    const auto est = identify_structure(split.X, split.y, estimator, &spec);
    rep.results[n] = {spec.id, evaluate_structure(spec.truth(), est), ds.rows()};
  });
  for (const auto& r : rep.results) {
    rep.mean.contributing_tp_over_tp_fn += r.metrics.contributing_tp_over_tp_fn;
    rep.mean.latent_count_ratio += r.metrics.latent_count_ratio;
    rep.mean.connection_tp_over_tp_fn += r.metrics.connection_tp_over_tp_fn;
    rep.mean.ratio_accuracy += r.metrics.ratio_accuracy;
  }
  const double n = static_cast<double>(rep.results.size());
  rep.mean.contributing_tp_over_tp_fn /= n;
  rep.mean.latent_count_ratio /= n;
  rep.mean.connection_tp_over_tp_fn /= n;
  rep.mean.ratio_accuracy /= n;
  return rep;
}

std::string suite_csv(const std::vector<SuiteReport>& reports) {
  std::string out = "spec_id,dx,estimator,m1,m2,m3,m4\n";
  char buf[256];
  for (const auto& r : reports) {
    for (const auto& s : r.results) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%s,%.17g,%.17g,%.17g,%.17g\n", s.spec_id, r.dx,
                    estimator_name(r.estimator).c_str(), s.metrics.contributing_tp_over_tp_fn,
                    s.metrics.latent_count_ratio, s.metrics.connection_tp_over_tp_fn, s.metrics.ratio_accuracy);
      out += buf;
    }
  }
  return out;
}

}  // namespace find
