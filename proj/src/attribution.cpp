#include "find/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "find/parallel.hpp"
#include "find/rng.hpp"

namespace find {

KnnSurrogate::KnnSurrogate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t k)
    : y_(y), k_(std::max<std::size_t>(1, std::min<std::size_t>(k, static_cast<std::size_t>(X.rows())))) {
  const Eigen::Index p = X.cols();
  mean_ = X.colwise().mean().transpose();
  scale_.resize(p);
  Xs_.resize(X.rows(), p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt((X.col(j).array() - mean_(j)).square().mean());
    scale_(j) = sd > 1e-300 ? sd : 0.0;
    if (scale_(j) > 0) {
      Xs_.col(j) = (X.col(j).array() - mean_(j)) / scale_(j);
    } else {
      Xs_.col(j).setZero();
    }
  }
}

double KnnSurrogate::predict(const Eigen::VectorXd& x) const {
  const Eigen::Index b = Xs_.rows();
  const Eigen::Index p = Xs_.cols();
  Eigen::VectorXd q(p);
  for (Eigen::Index j = 0; j < p; ++j) q(j) = scale_(j) > 0 ? (x(j) - mean_(j)) / scale_(j) : 0.0;
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(b));
  for (Eigen::Index i = 0; i < b; ++i) {
    const double d2 = (Xs_.row(i).transpose() - q).squaredNorm();
    if (d2 == 0.0) return y_(i);
    dist[static_cast<std::size_t>(i)] = {d2, i};
  }
  const auto kk = static_cast<std::ptrdiff_t>(k_);
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
  double wsum = 0.0;
  double acc = 0.0;
  for (std::ptrdiff_t n = 0; n < kk; ++n) {
    const double w = 1.0 / (std::sqrt(dist[static_cast<std::size_t>(n)].first) + 1e-12);
    wsum += w;
    acc += w * y_(dist[static_cast<std::size_t>(n)].second);
  }
  return acc / wsum;
}

Eigen::VectorXd KnnSurrogate::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict(Eigen::VectorXd(X.row(i).transpose()));
  return out;
}

KnnSurrogate fit_surrogate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() < 3) throw DatasetError("surrogate needs at least 3 rows");
  if (X.rows() != y.size()) throw DatasetError("surrogate row mismatch");
  const auto b = static_cast<std::size_t>(X.rows());
  return KnnSurrogate(X, y, std::min<std::size_t>(10, b - 1));
}

AttributionReport shapley_values(const BatchPredictor& model, const Eigen::MatrixXd& X,
                                 const ShapConfig& config, std::vector<std::string> feature_names) {
  if (config.n_permutations < 1) throw std::invalid_argument("n_permutations must be ≥ 1");
  const auto b = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  AttributionReport rep;
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < p; ++j) feature_names.push_back("x" + std::to_string(j + 1));
  }
  rep.features = std::move(feature_names);

  Rng setup(config.seed, 0xb5ad4eceda1ce2a9ULL);
  std::vector<std::size_t> background = setup.sample(b, std::min(config.background_size, b));
  std::sort(background.begin(), background.end());
  if (b > config.max_eval_rows && config.max_eval_rows > 0) {
    rep.eval_rows = setup.sample(b, config.max_eval_rows);
    std::sort(rep.eval_rows.begin(), rep.eval_rows.end());
  } else {
    rep.eval_rows.resize(b);
    std::iota(rep.eval_rows.begin(), rep.eval_rows.end(), std::size_t{0});
  }
  const std::size_t n_eval = rep.eval_rows.size();
  rep.phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_eval), static_cast<Eigen::Index>(p));
  rep.prediction = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_eval));
  rep.base_value = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_eval));

  const std::size_t P = config.n_permutations;
  parallel_for(n_eval, [&](std::size_t e) {
    const std::size_t row = rep.eval_rows[e];
    Rng rng(config.seed, row + 1);
    const Eigen::RowVectorXd x = X.row(static_cast<Eigen::Index>(row));
    // Rows of `path`: for each permutation, p + 1 points from background to x.
    Eigen::MatrixXd path(static_cast<Eigen::Index>(P * (p + 1)), static_cast<Eigen::Index>(p));
    std::vector<std::vector<std::size_t>> orders(P);
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t s = 0; s < P; ++s) {
      rng.shuffle(order);
      orders[s] = order;
      Eigen::RowVectorXd cur = X.row(static_cast<Eigen::Index>(background[rng.index(background.size())]));
      const auto base = static_cast<Eigen::Index>(s * (p + 1));
      path.row(base) = cur;
      for (std::size_t t = 0; t < p; ++t) {
        cur(static_cast<Eigen::Index>(order[t])) = x(static_cast<Eigen::Index>(order[t]));
        path.row(base + static_cast<Eigen::Index>(t + 1)) = cur;
      }
    }
    const Eigen::VectorXd f = model(path);
    const auto ei = static_cast<Eigen::Index>(e);
    double base_sum = 0.0;
    for (std::size_t s = 0; s < P; ++s) {
      const auto base = static_cast<Eigen::Index>(s * (p + 1));
      base_sum += f(base);
      for (std::size_t t = 0; t < p; ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        rep.phi(ei, static_cast<Eigen::Index>(orders[s][t])) += f(base + ti + 1) - f(base + ti);
      }
    }
    rep.phi.row(ei) /= static_cast<double>(P);
    rep.base_value(ei) = base_sum / static_cast<double>(P);
    rep.prediction(ei) = f(static_cast<Eigen::Index>(p));
  });

  rep.mean_abs.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    rep.mean_abs[j] = n_eval ? rep.phi.col(static_cast<Eigen::Index>(j)).cwiseAbs().mean() : 0.0;
  }
  rep.ranking.resize(p);
  std::iota(rep.ranking.begin(), rep.ranking.end(), std::size_t{0});
  std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                   [&](std::size_t a, std::size_t c) { return rep.mean_abs[a] > rep.mean_abs[c]; });
  return rep;
}

AttributionReport shapley_values(const KnnSurrogate& model, const Eigen::MatrixXd& X,
                                 const ShapConfig& config, std::vector<std::string> feature_names) {
  return shapley_values([&model](const Eigen::MatrixXd& Q) { return model.predict(Q); }, X, config,
                        std::move(feature_names));
}

std::vector<std::size_t> select_inputs(AttributionReport& report, const SelectionPolicy& policy) {
  const std::size_t p = report.ranking.size();
  std::vector<std::size_t> out;
  if (policy.kind == SelectionPolicy::Kind::TopK) {
    if (policy.k > p) throw std::invalid_argument("top_k exceeds feature count");
    out.assign(report.ranking.begin(), report.ranking.begin() + static_cast<std::ptrdiff_t>(policy.k));
  } else {
    if (!(policy.threshold > 0.0 && policy.threshold <= 1.0)) {
      throw std::invalid_argument("cumulative threshold must be in (0, 1]");
    }
    const double total = std::accumulate(report.mean_abs.begin(), report.mean_abs.end(), 0.0);
    double acc = 0.0;
    for (std::size_t r = 0; r < p && out.size() < policy.cap; ++r) {
      out.push_back(report.ranking[r]);
      acc += report.mean_abs[report.ranking[r]];
      if (total <= 0.0 || acc >= policy.threshold * total) break;
    }
  }
  report.selected = out;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Tan: return "tan";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Abs: return "abs";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
  }
  return "?";
}

char binary_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
  }
  return '?';
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

EnrichResult enrich_features(const Dataset& ds, const std::vector<UnaryOp>& unary,
                             const std::vector<BinaryOp>& binary,
                             const std::vector<std::string>& exclude) {
  EnrichResult res{ds, {}, {}};
  std::vector<std::size_t> base;
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    if (std::find(exclude.begin(), exclude.end(), ds.column(j).name) == exclude.end()) base.push_back(j);
  }
  auto try_add = [&](Column c, const std::string& failure) {
    if (!failure.empty()) {
      res.skipped.push_back(c.name + ": " + failure);
      return;
    }
    if (!all_finite(c.values)) {
      res.skipped.push_back(c.name + ": non-finite result");
      return;
    }
    if (res.dataset.index_of(c.name) >= 0) {
      res.skipped.push_back(c.name + ": name collision");
      return;
    }
    res.added.push_back(c.name);
    res.dataset.add_column(std::move(c));
  };

  for (auto op : unary) {
    for (auto j : base) {
      const Column& src = ds.column(j);
      Column c;
      c.name = std::string(unary_name(op)) + "(" + src.name + ")";
      c.values.resize(src.values.size());
      std::string failure;
      const bool transcendental = op != UnaryOp::Abs && op != UnaryOp::Sqrt;
      if (transcendental && !src.unit.dimensionless()) {
        try_add(std::move(c), "unit " + format_unit(src.unit) + " is not dimensionless");
        continue;
      }
      c.unit = op == UnaryOp::Sqrt ? src.unit * Rational(1, 2) : (op == UnaryOp::Abs ? src.unit : DimVector{});
      for (std::size_t i = 0; i < src.values.size() && failure.empty(); ++i) {
        const double v = src.values[i];
        switch (op) {
          case UnaryOp::Cos: c.values[i] = std::cos(v); break;
          case UnaryOp::Sin: c.values[i] = std::sin(v); break;
          case UnaryOp::Tan:
            if (std::fabs(std::cos(v)) < 1e-6) failure = "tan pole";
            c.values[i] = std::tan(v);
            break;
          case UnaryOp::Exp: c.values[i] = std::exp(v); break;
          case UnaryOp::Abs: c.values[i] = std::fabs(v); break;
          case UnaryOp::Log:
            if (v <= 0.0) failure = "log of non-positive value";
            c.values[i] = std::log(v);
            break;
          case UnaryOp::Sqrt:
            if (v < 0.0) failure = "sqrt of negative value";
            c.values[i] = std::sqrt(v);
            break;
        }
      }
      try_add(std::move(c), failure);
    }
  }

  for (auto op : binary) {
    for (std::size_t a = 0; a < base.size(); ++a) {
      for (std::size_t b = a + 1; b < base.size(); ++b) {
        const Column& x = ds.column(base[a]);
        const Column& y = ds.column(base[b]);
        Column c;
        c.name = x.name + binary_symbol(op) + y.name;
        c.values.resize(x.values.size());
        std::string failure;
        if ((op == BinaryOp::Add || op == BinaryOp::Sub) && !(x.unit == y.unit)) {
          try_add(std::move(c), "unit mismatch");
          continue;
        }
        switch (op) {
          case BinaryOp::Add:
          case BinaryOp::Sub: c.unit = x.unit; break;
          case BinaryOp::Mul: c.unit = x.unit + y.unit; break;
          case BinaryOp::Div: c.unit = x.unit - y.unit; break;
        }
        for (std::size_t i = 0; i < x.values.size() && failure.empty(); ++i) {
          switch (op) {
            case BinaryOp::Add: c.values[i] = x.values[i] + y.values[i]; break;
            case BinaryOp::Sub: c.values[i] = x.values[i] - y.values[i]; break;
            case BinaryOp::Mul: c.values[i] = x.values[i] * y.values[i]; break;
            case BinaryOp::Div:
              if (y.values[i] == 0.0) failure = "division by zero";
              c.values[i] = x.values[i] / y.values[i];
              break;
          }
        }
        try_add(std::move(c), failure);
      }
    }
  }
  return res;
}

void parse_enrich_spec(const std::string& spec, std::vector<UnaryOp>& unary,
                       std::vector<BinaryOp>& binary) {
  unary.clear();
  binary.clear();
  const auto semi = spec.find(';');
  const std::string u = spec.substr(0, semi);
  const std::string b = semi == std::string::npos ? "" : spec.substr(semi + 1);
  std::stringstream us(u);
  std::string tok;
  while (std::getline(us, tok, ',')) {
    if (tok.empty()) continue;
    bool found = false;
    for (auto op : {UnaryOp::Cos, UnaryOp::Sin, UnaryOp::Tan, UnaryOp::Exp, UnaryOp::Abs, UnaryOp::Log,
                    UnaryOp::Sqrt}) {
      if (tok == unary_name(op)) {
        unary.push_back(op);
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("unknown unary op '" + tok + "'");
  }
  for (char c : b) {
    switch (c) {
      case '+': binary.push_back(BinaryOp::Add); break;
      case '-': binary.push_back(BinaryOp::Sub); break;
      case '*': binary.push_back(BinaryOp::Mul); break;
      case '/': binary.push_back(BinaryOp::Div); break;
      case ',':
      case ' ': break;
      default: throw std::invalid_argument(std::string("unknown binary op '") + c + "'");
    }
  }
}

}  // namespace find
