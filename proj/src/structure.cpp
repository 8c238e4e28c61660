#include "find/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "find/parallel.hpp"

namespace find {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<std::vector<std::vector<std::size_t>>> axis_groups(const Eigen::MatrixXd& X) {
  const auto b = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  std::vector<std::vector<std::vector<std::size_t>>> out(p);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<std::size_t> idx(b);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto less_others = [&](std::size_t a, std::size_t c) {
      for (std::size_t q = 0; q < p; ++q) {
        if (q == j) continue;
        const double va = X(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(q));
        const double vc = X(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(q));
        if (va != vc) return va < vc;
      }
      return false;
    };
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t c) {
      if (less_others(a, c)) return true;
      if (less_others(c, a)) return false;
      const double xa = X(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
      const double xc = X(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j));
      return xa != xc ? xa < xc : a < c;
    });
    std::size_t start = 0;
    for (std::size_t i = 1; i <= b; ++i) {
      if (i == b || less_others(idx[i - 1], idx[i])) {
        out[j].emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(start),
                            idx.begin() + static_cast<std::ptrdiff_t>(i));
        start = i;
      }
    }
  }
  return out;
}

Eigen::MatrixXd estimate_partials(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  DerivativeMethod method) {
  const auto p = static_cast<std::size_t>(X.cols());
  Eigen::MatrixXd D = Eigen::MatrixXd::Constant(X.rows(), X.cols(), kNaN);
  const auto groups = axis_groups(X);
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto& runs = groups[j];
    parallel_for(runs.size(), [&](std::size_t r) {
      const auto& run = runs[r];
      // Collapse exact duplicates along the axis to their first occurrence.
      std::vector<std::size_t> uniq;
      for (auto i : run) {
        if (uniq.empty() || X(static_cast<Eigen::Index>(uniq.back()), jj) != X(static_cast<Eigen::Index>(i), jj)) {
          uniq.push_back(i);
        }
      }
      for (std::size_t pos = 0; pos < run.size(); ++pos) {
        const std::size_t i = run[pos];
        const auto ii = static_cast<Eigen::Index>(i);
        const double xi = X(ii, jj);
        const auto u = static_cast<std::size_t>(
            std::lower_bound(uniq.begin(), uniq.end(), xi,
                             [&](std::size_t a, double v) { return X(static_cast<Eigen::Index>(a), jj) < v; }) -
            uniq.begin());
        if (method == DerivativeMethod::BackwardDiff) {
          if (u == 0) continue;
          const auto lo = static_cast<Eigen::Index>(uniq[u - 1]);
          D(ii, jj) = (y(ii) - y(lo)) / (xi - X(lo, jj));
          continue;
        }
        // Nearest axis neighbours (up to 4) around position u.
        std::vector<std::size_t> nb;
        std::size_t l = u, h = u + 1;
        while (nb.size() < 4 && (l > 0 || h < uniq.size())) {
          const double dl = l > 0 ? xi - X(static_cast<Eigen::Index>(uniq[l - 1]), jj)
                                  : std::numeric_limits<double>::infinity();
          const double dh = h < uniq.size() ? X(static_cast<Eigen::Index>(uniq[h]), jj) - xi
                                            : std::numeric_limits<double>::infinity();
          if (dl <= dh) {
            nb.push_back(uniq[--l]);
          } else {
            nb.push_back(uniq[h++]);
          }
        }
        if (nb.size() < 3) continue;
        nb.push_back(uniq[u]);
        Eigen::MatrixXd A(static_cast<Eigen::Index>(nb.size()), 3);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(nb.size()));
        double spread = 0.0;
        for (std::size_t q = 0; q < nb.size(); ++q) spread = std::max(spread, std::fabs(X(static_cast<Eigen::Index>(nb[q]), jj) - xi));
        for (std::size_t q = 0; q < nb.size(); ++q) {
          const auto qi = static_cast<Eigen::Index>(q);
          const double t = (X(static_cast<Eigen::Index>(nb[q]), jj) - xi) / spread;
          A(qi, 0) = 1.0;
          A(qi, 1) = t;
          A(qi, 2) = t * t;
          rhs(qi) = y(static_cast<Eigen::Index>(nb[q]));
        }
        const Eigen::Vector3d c = A.colPivHouseholderQr().solve(rhs);
        D(ii, jj) = c(1) / spread;
      }
    });
  }
  return D;
}

Eigen::MatrixXd rho_from_partials(const Eigen::MatrixXd& X, const Eigen::MatrixXd& partials) {
  return X.cwiseProduct(partials);
}

Eigen::MatrixXd ppmcc(const Eigen::MatrixXd& rho) {
  const Eigen::Index b = rho.rows();
  const Eigen::Index p = rho.cols();
  Eigen::MatrixXd M = Eigen::MatrixXd::Constant(p, p, kNaN);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j; k < p; ++k) {
      double n = 0, sj = 0, sk = 0;
      for (Eigen::Index i = 0; i < b; ++i) {
        if (std::isnan(rho(i, j)) || std::isnan(rho(i, k))) continue;
        n += 1;
        sj += rho(i, j);
        sk += rho(i, k);
      }
      if (n < 3) continue;
      const double mj = sj / n, mk = sk / n;
      double vj = 0, vk = 0, cjk = 0;
      for (Eigen::Index i = 0; i < b; ++i) {
        if (std::isnan(rho(i, j)) || std::isnan(rho(i, k))) continue;
        const double a = rho(i, j) - mj, c = rho(i, k) - mk;
        vj += a * a;
        vk += c * c;
        cjk += a * c;
      }
      vj /= n;
      vk /= n;
      cjk /= n;
      if (vj < 1e-12 || vk < 1e-12) continue;
      const double r = j == k ? 1.0 : std::clamp(cjk / std::sqrt(vj * vk), -1.0, 1.0);
      M(j, k) = M(k, j) = r;
    }
  }
  return M;
}

const WeightRatio* StructureGraph::ratio(std::size_t clique, std::size_t j, std::size_t k) const {
  if (clique >= ratios.size()) return nullptr;
  for (const auto& r : ratios[clique]) {
    if (r.j == j && r.k == k) return &r;
  }
  return nullptr;
}

int StructureGraph::edge_sign(std::size_t j, std::size_t k) const {
  if (correlation.size() == 0) return 0;
  const double v = correlation(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  if (std::isnan(v) || v == 0.0) return 0;
  return v > 0 ? 1 : -1;
}

namespace {

void bron_kerbosch(std::vector<std::size_t> R, std::vector<std::size_t> P, std::vector<std::size_t> Xs,
                   const std::vector<std::vector<bool>>& adj, std::vector<std::vector<std::size_t>>& out) {
  if (P.empty() && Xs.empty()) {
    std::sort(R.begin(), R.end());
    out.push_back(R);
    return;
  }
  while (!P.empty()) {
    const std::size_t v = P.front();
    std::vector<std::size_t> R2 = R, P2, X2;
    R2.push_back(v);
    for (auto u : P) {
      if (adj[v][u]) P2.push_back(u);
    }
    for (auto u : Xs) {
      if (adj[v][u]) X2.push_back(u);
    }
    bron_kerbosch(R2, P2, X2, adj, out);
    P.erase(P.begin());
    Xs.push_back(v);
  }
}

}  // namespace

StructureGraph cluster_latents(const Eigen::MatrixXd& m, double threshold) {
  StructureGraph g;
  g.inputs = static_cast<std::size_t>(m.rows());
  g.correlation = m;
  for (std::size_t j = 0; j < g.inputs; ++j) {
    if (!std::isnan(m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)))) g.contributing.push_back(j);
  }
  std::vector<std::vector<bool>> adj(g.inputs, std::vector<bool>(g.inputs, false));
  for (auto j : g.contributing) {
    for (auto k : g.contributing) {
      const double v = m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      adj[j][k] = j != k && !std::isnan(v) && std::fabs(v) >= threshold;
    }
  }
  bron_kerbosch({}, g.contributing, {}, adj, g.latents);
  std::sort(g.latents.begin(), g.latents.end());
  g.ratios.resize(g.latents.size());
  return g;
}

StructureGraph weight_ratios(const Eigen::MatrixXd& rho, StructureGraph graph) {
  const auto valid_rows = [&](const std::vector<std::size_t>& cols) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
      bool ok = true;
      for (auto c : cols) ok = ok && !std::isnan(rho(i, static_cast<Eigen::Index>(c)));
      if (ok) rows.push_back(i);
    }
    return rows;
  };
  const auto slope = [&](std::size_t j, std::size_t k) {
    const auto rows = valid_rows({j, k});
    double num = 0, den = 0;
    for (auto i : rows) {
      num += rho(i, static_cast<Eigen::Index>(j)) * rho(i, static_cast<Eigen::Index>(k));
      den += rho(i, static_cast<Eigen::Index>(k)) * rho(i, static_cast<Eigen::Index>(k));
    }
    return rows.size() >= 3 && den > 0 ? num / den : kNaN;
  };

  const std::size_t nc = graph.latents.size();
  std::vector<std::size_t> membership(graph.inputs, 0);
  for (const auto& c : graph.latents) {
    for (auto j : c) ++membership[j];
  }
  // Representative exclusive member per clique (smallest index), if any.
  std::vector<std::ptrdiff_t> rep(nc, -1);
  for (std::size_t c = 0; c < nc; ++c) {
    for (auto j : graph.latents[c]) {
      if (membership[j] == 1) {
        rep[c] = static_cast<std::ptrdiff_t>(j);
        break;
      }
    }
  }
  // rel[c][j] = w_cj / w_c,rep(c) for every member of clique c.
  std::vector<std::vector<double>> rel(nc, std::vector<double>(graph.inputs, kNaN));
  for (std::size_t c = 0; c < nc; ++c) {
    if (rep[c] < 0) continue;
    const auto r = static_cast<std::size_t>(rep[c]);
    for (auto j : graph.latents[c]) {
      if (j == r) {
        rel[c][j] = 1.0;
      } else if (membership[j] == 1) {
        rel[c][j] = slope(j, r);
      }
    }
  }
  for (std::size_t k = 0; k < graph.inputs; ++k) {
    if (membership[k] < 2) continue;
    std::vector<std::size_t> cliques;
    std::vector<std::size_t> cols{k};
    for (std::size_t c = 0; c < nc; ++c) {
      if (std::find(graph.latents[c].begin(), graph.latents[c].end(), k) == graph.latents[c].end()) continue;
      if (rep[c] < 0) continue;
      cliques.push_back(c);
      cols.push_back(static_cast<std::size_t>(rep[c]));
    }
    if (cliques.empty()) continue;
    const auto rows = valid_rows(cols);
    if (rows.size() < cliques.size() + 2) continue;
    Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cliques.size()));
    Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      t(static_cast<Eigen::Index>(r)) = rho(rows[r], static_cast<Eigen::Index>(k));
      for (std::size_t q = 0; q < cliques.size(); ++q) {
        A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) =
            rho(rows[r], static_cast<Eigen::Index>(cols[q + 1]));
      }
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(t);
    for (std::size_t q = 0; q < cliques.size(); ++q) rel[cliques[q]][k] = coef(static_cast<Eigen::Index>(q));
  }

  for (std::size_t c = 0; c < nc; ++c) {
    graph.ratios[c].clear();
    const auto& members = graph.latents[c];
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const std::size_t j = members[a], k = members[b];
        double r = kNaN;
        if (!std::isnan(rel[c][j]) && !std::isnan(rel[c][k]) && rel[c][k] != 0.0) {
          r = rel[c][j] / rel[c][k];
        } else {
          r = slope(j, k);
        }
        WeightRatio wr;
        wr.j = j;
        wr.k = k;
        wr.ratio = r;
        const double m = graph.correlation.size() ? graph.correlation(static_cast<Eigen::Index>(j),
                                                                       static_cast<Eigen::Index>(k))
                                                  : kNaN;
        wr.confidence = std::isnan(m) ? 0.0 : std::fabs(m);
        graph.ratios[c].push_back(wr);
      }
    }
  }
  return graph;
}

namespace {

std::size_t overlap(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t n = 0;
  for (auto x : a) n += static_cast<std::size_t>(std::count(b.begin(), b.end(), x));
  return n;
}

void best_match(const StructureGraph& truth, const StructureGraph& est, std::size_t t,
                std::vector<std::ptrdiff_t>& cur, std::vector<bool>& used, std::size_t score,
                std::size_t& best_score, std::vector<std::ptrdiff_t>& best) {
  if (t == truth.latents.size()) {
    if (score > best_score || best.empty()) {
      best_score = score;
      best = cur;
    }
    return;
  }
  cur[t] = -1;
  best_match(truth, est, t + 1, cur, used, score, best_score, best);
  for (std::size_t e = 0; e < est.latents.size(); ++e) {
    if (used[e]) continue;
    used[e] = true;
    cur[t] = static_cast<std::ptrdiff_t>(e);
    best_match(truth, est, t + 1, cur, used, score + overlap(truth.latents[t], est.latents[e]), best_score, best);
    used[e] = false;
  }
  cur[t] = -1;
}

}  // namespace

StructureMetrics evaluate_structure(const StructureGraph& truth, const StructureGraph& estimate) {
  if (truth.inputs != estimate.inputs) throw std::invalid_argument("structure input count mismatch");
  StructureMetrics m;
  std::size_t tp = 0;
  for (auto j : truth.contributing) {
    tp += static_cast<std::size_t>(std::count(estimate.contributing.begin(), estimate.contributing.end(), j));
  }
  m.contributing_tp_over_tp_fn = truth.contributing.empty() ? 1.0 : static_cast<double>(tp) / truth.contributing.size();
  m.latent_count_ratio = truth.latents.empty() ? (estimate.latents.empty() ? 1.0 : 0.0)
                                               : static_cast<double>(estimate.latents.size()) / truth.latents.size();

  std::vector<std::ptrdiff_t> cur(truth.latents.size(), -1), best;
  std::vector<bool> used(estimate.latents.size(), false);
  std::size_t best_score = 0;
  best_match(truth, estimate, 0, cur, used, 0, best_score, best);
  std::size_t total = 0;
  for (const auto& l : truth.latents) total += l.size();
  m.connection_tp_over_tp_fn = total ? static_cast<double>(best_score) / total : 1.0;

  double acc = 0.0;
  std::size_t pairs = 0, matched = 0;
  for (std::size_t t = 0; t < truth.latents.size(); ++t) {
    for (const auto& tr : truth.ratios.size() > t ? truth.ratios[t] : std::vector<WeightRatio>{}) {
      ++pairs;
      if (best.empty() || best[t] < 0) continue;
      const WeightRatio* er = estimate.ratio(static_cast<std::size_t>(best[t]), tr.j, tr.k);
      if (!er || std::isnan(er->ratio) || tr.ratio == 0.0) continue;
      acc += er->ratio / tr.ratio;
      ++matched;
    }
  }
  m.ratio_accuracy = pairs == 0 ? 1.0 : (matched ? acc / matched : 0.0);
  return m;
}

StructureGraph graph_from_weights(const std::vector<std::vector<double>>& W, std::size_t inputs) {
  StructureGraph g;
  g.inputs = inputs;
  std::set<std::size_t> contrib;
  for (const auto& row : W) {
    std::vector<std::size_t> members;
    for (std::size_t j = 0; j < inputs; ++j) {
      if (row[j] != 0.0) {
        members.push_back(j);
        contrib.insert(j);
      }
    }
    std::vector<WeightRatio> rs;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        rs.push_back({members[a], members[b], row[members[a]] / row[members[b]], 1.0});
      }
    }
    g.latents.push_back(std::move(members));
    g.ratios.push_back(std::move(rs));
  }
  g.contributing.assign(contrib.begin(), contrib.end());
  return g;
}

double grid_coverage(const Eigen::MatrixXd& X) {
  const auto b = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  if (b == 0) return 0.0;
  std::vector<bool> ok(b, true);
  const auto groups = axis_groups(X);
  for (std::size_t j = 0; j < p; ++j) {
    std::set<double> distinct;
    for (std::size_t i = 0; i < b; ++i) distinct.insert(X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    if (distinct.size() < 2) continue;
    std::vector<bool> has_neighbor(b, false);
    for (const auto& run : groups[j]) {
      const double first = X(static_cast<Eigen::Index>(run.front()), static_cast<Eigen::Index>(j));
      const double last = X(static_cast<Eigen::Index>(run.back()), static_cast<Eigen::Index>(j));
      if (last == first) continue;
      for (auto i : run) has_neighbor[i] = true;
    }
    for (std::size_t i = 0; i < b; ++i) ok[i] = ok[i] && has_neighbor[i];
  }
  return static_cast<double>(std::count(ok.begin(), ok.end(), true)) / static_cast<double>(b);
}

}  // namespace find
