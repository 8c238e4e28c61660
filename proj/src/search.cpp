#include "find/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "find/parallel.hpp"

namespace find {

namespace {

std::string join_rationals(const RationalVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += to_string(v[i]);
  }
  return s + ")";
}

bool zero_row(const RationalVector& r) {
  return std::all_of(r.begin(), r.end(), [](const Rational& v) { return v == 0; });
}

bool proportional(const RationalVector& a, const RationalVector& b) {
  // a = k·b for some rational k ≠ 0
  std::optional<Rational> k;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if ((a[j] == 0) != (b[j] == 0)) return false;
    if (a[j] == 0) continue;
    const Rational q = a[j] / b[j];
    if (k && *k != q) return false;
    k = q;
  }
  return k.has_value();
}

}  // namespace

std::string LatentSpec::provenance() const {
  std::string s = mode == DIMode::DI1 ? "DI-1" : "DI-2";
  s += " mu=" + join_rationals(params);
  if (clique >= 0) s += " clique=" + std::to_string(clique);
  return s;
}

void SearchConfig::validate() const {
  if (steps.empty()) throw std::invalid_argument("empty step schedule");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] <= 0) throw std::invalid_argument("steps must be positive");
    if (i && !(steps[i] < steps[i - 1])) throw std::invalid_argument("step schedule must strictly decrease");
  }
  if (!(range_lo < range_hi)) throw std::invalid_argument("empty search range");
  if (!(target_r2 > 0.0 && target_r2 <= 1.0)) throw std::invalid_argument("target R² must lie in (0, 1]");
  if (top_k == 0) throw std::invalid_argument("top_k must be positive");
  if (s_max == 0) throw std::invalid_argument("s_max must be ≥ 1");
  if (degree < 1 || degree > 8) throw std::invalid_argument("degree must lie in [1, 8]");
}

std::string_view reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::NegativeBase: return "negative_base_fractional_exponent";
    case RejectReason::ZeroDivisor: return "zero_divisor";
    case RejectReason::Sparsity: return "sparsity";
    case RejectReason::ZeroRow: return "zero_row";
    case RejectReason::DuplicateRow: return "duplicate_row";
    case RejectReason::ProportionalRow: return "proportional_row";
    case RejectReason::StructureSign: return "structure_sign";
    case RejectReason::StructureRatio: return "structure_ratio";
    case RejectReason::UnintendedZero: return "unintended_zero";
    case RejectReason::NonFinite: return "non_finite";
  }
  return "unknown";
}

std::size_t SearchTrace::rejected() const {
  std::size_t n = 0;
  for (const auto& [k, v] : rejections) n += v;
  return n;
}

std::optional<RejectReason> constraint_filter(const std::vector<RationalVector>& W, const FilterContext& ctx) {
  std::size_t nnz = 0;
  std::vector<std::size_t> col_nnz;
  for (const auto& row : W) {
    if (col_nnz.size() < row.size()) col_nnz.resize(row.size(), 0);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == 0) continue;
      ++nnz;
      ++col_nnz[j];
      if (j < ctx.stats.size()) {
        if (ctx.stats[j].has_negative && !is_integer(row[j])) return RejectReason::NegativeBase;
        if (ctx.stats[j].has_zero && row[j] < 0) return RejectReason::ZeroDivisor;
      }
    }
  }
  if (ctx.kappa1 && nnz > ctx.kappa1) return RejectReason::Sparsity;
  if (ctx.kappa2) {
    for (auto c : col_nnz) {
      if (c > ctx.kappa2) return RejectReason::Sparsity;
    }
  }
  for (std::size_t a = 0; a < W.size(); ++a) {
    if (zero_row(W[a])) return RejectReason::ZeroRow;
    for (std::size_t b = 0; b < a; ++b) {
      if (W[a] == W[b]) return RejectReason::DuplicateRow;
      if (proportional(W[a], W[b])) return RejectReason::ProportionalRow;
    }
  }
  return std::nullopt;
}

std::string sign_code(const std::vector<RationalVector>& W) {
  std::vector<std::string> rows;
  for (const auto& r : W) {
    std::string s;
    for (const auto& v : r) s += v < 0 ? '-' : (v == 0 ? '0' : '+');
    rows.push_back(std::move(s));
  }
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += '|';
    out += rows[i];
  }
  return out;
}

std::vector<RationalVector> canonical(const std::vector<RationalVector>& W) {
  auto c = W;
  std::sort(c.begin(), c.end());
  return c;
}

bool DedupTable::insert(const std::vector<RationalVector>& W) {
  auto key = canonical(W);
  auto& bucket = table_[sign_code(W)];
  if (std::find(bucket.begin(), bucket.end(), key) != bucket.end()) return false;
  bucket.push_back(std::move(key));
  ++size_;
  return true;
}

bool DedupTable::contains(const std::vector<RationalVector>& W) const {
  auto it = table_.find(sign_code(W));
  if (it == table_.end()) return false;
  const auto key = canonical(W);
  return std::find(it->second.begin(), it->second.end(), key) != it->second.end();
}

SearchProblem SearchProblem::from_split(const XySplit& s) {
  SearchProblem p;
  p.X = s.X;
  p.y = s.y;
  p.D = s.D;
  p.d = s.d;
  p.input_names = s.input_names;
  p.stats = s.input_stats;
  p.output_name = s.output_name;
  return p;
}

AffineSolutionSet search_space(const SearchProblem& prob, const SearchConfig& config) {
  const std::size_t p = static_cast<std::size_t>(prob.X.cols());
  if (config.mode == DIMode::DI2) return solve_affine(DimMatrix::zeros(p), DimVector{});
  return solve_affine(prob.D, config.dimensionless_latents ? DimVector{} : prob.d);
}

Eigen::VectorXd latent_values(const Eigen::MatrixXd& X, const RationalVector& w) {
  Eigen::VectorXd z = Eigen::VectorXd::Ones(X.rows());
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    if (w[j] == 1) {
      z.array() *= X.col(jj).array();
      continue;
    }
    const double e = to_double(w[j]);
    for (Eigen::Index i = 0; i < X.rows(); ++i) z(i) *= std::pow(X(i, jj), e);
  }
  return z;
}

Expr latent_expr(const RationalVector& w, const std::vector<std::string>& names) {
  Expr out;
  bool have = false;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0) continue;
    Expr f = variable(j, names[j]);
    if (w[j] != 1) f = pow(std::move(f), constant(to_double(w[j])));
    out = have ? mul(std::move(out), std::move(f)) : std::move(f);
    have = true;
  }
  return have ? out : constant(1.0);
}

CandidateFormula evaluate_candidate(const SearchProblem& prob, std::vector<LatentSpec> latents, int degree) {
  CandidateFormula c;
  c.latents = std::move(latents);
  Eigen::MatrixXd Z(prob.X.rows(), static_cast<Eigen::Index>(c.latents.size()));
  std::vector<Expr> zexpr;
  for (std::size_t i = 0; i < c.latents.size(); ++i) {
    Z.col(static_cast<Eigen::Index>(i)) = latent_values(prob.X, c.latents[i].w);
    zexpr.push_back(latent_expr(c.latents[i].w, prob.input_names));
  }
  if (!Z.allFinite()) {
    c.r2 = -std::numeric_limits<double>::infinity();
    return c;
  }
  auto fit = fit_poly(Z, prob.y, degree);
  c.poly = std::move(fit.model);
  c.r2 = fit.report.r2;
  c.expression = c.poly.to_expr(zexpr);
  c.complexity = complexity(c.expression);
  return c;
}

std::vector<DimVector> latent_dims(const CandidateFormula& cand, const DimMatrix& D) {
  std::vector<DimVector> out;
  for (const auto& l : cand.latents) out.push_back(latent_unit(D, l.w));
  return out;
}

CandidateFormula assign_constant_units(CandidateFormula cand, const DimVector& d,
                                       const std::vector<DimVector>& z_dims) {
  cand.constant_units.clear();
  for (const auto& term : cand.poly.terms) {
    DimVector u = d;
    for (std::size_t i = 0; i < term.size() && i < z_dims.size(); ++i) {
      u = constant_unit(u, z_dims[i], Rational(term[i]));
    }
    cand.constant_units.push_back(u);
  }
  return cand;
}

std::string render_formula_text(const CandidateFormula& cand, const std::string& output, int digits) {
  return output + " = " + render_text(cand.expression, digits);
}

std::string render_formula_sexpr(const CandidateFormula& cand) { return render_sexpr(cand.expression); }

namespace {

std::int64_t r2_bucket(double r2, double tol) {
  if (!std::isfinite(r2)) return std::numeric_limits<std::int64_t>::min();
  const double q = std::floor(std::max(r2, -1e6) / tol);
  return static_cast<std::int64_t>(q);
}

std::vector<RationalVector> weights_of(const CandidateFormula& c) {
  std::vector<RationalVector> W;
  for (const auto& l : c.latents) W.push_back(l.w);
  return W;
}

}  // namespace

bool ranks_before(const CandidateFormula& a, const CandidateFormula& b, double tie_tolerance) {
  const auto ba = r2_bucket(a.r2, tie_tolerance);
  const auto bb = r2_bucket(b.r2, tie_tolerance);
  if (ba != bb) return ba > bb;
  if (a.complexity != b.complexity) return a.complexity < b.complexity;
  return canonical(weights_of(a)) < canonical(weights_of(b));
}

// ---------------------------------------------------------------------------

namespace {

struct LatticeSpace {
  const AffineSolutionSet* sol = nullptr;
  ZeroPatternSolution zps;
  std::vector<std::size_t> members;  // τ when constrained by a clique
  bool constrained = false;
};

RationalVector add_scaled(const RationalVector& base, std::size_t dim, const Rational& step,
                          const std::vector<int>& k) {
  RationalVector out = base;
  for (std::size_t i = 0; i < dim; ++i) out[i] += step * k[i];
  return out;
}

// All integer vectors in [-m, m]^dim, lexicographic.
std::vector<std::vector<int>> offsets(std::size_t dim, int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dim, -m);
  if (dim == 0) return {{}};
  for (;;) {
    out.push_back(cur);
    std::size_t i = dim;
    while (i > 0) {
      --i;
      if (cur[i] < m) {
        ++cur[i];
        break;
      }
      cur[i] = -m;
      if (i == 0) return out;
    }
  }
}

}  // namespace

SearchResult c2f_search(const SearchProblem& prob, const AffineSolutionSet& sol,
                        const StructureGraph* graph, const SearchConfig& config,
                        const std::vector<LatentSpec>& frozen, int clique, DedupTable* shared_dedup) {
  config.validate();
  const std::size_t p = static_cast<std::size_t>(prob.X.cols());
  SearchResult res;
  DedupTable local;
  DedupTable& dedup = shared_dedup ? *shared_dedup : local;

  LatticeSpace space;
  space.sol = &sol;
  std::vector<std::size_t> zero_idx;
  if (graph && clique >= 0) {
    space.constrained = true;
    space.members = graph->latents.at(static_cast<std::size_t>(clique));
    for (std::size_t j = 0; j < p; ++j) {
      if (std::find(space.members.begin(), space.members.end(), j) == space.members.end()) zero_idx.push_back(j);
    }
  }
  try {
    space.zps = refine_zero_pattern(sol, zero_idx);
  } catch (const InfeasibleDimensions& e) {
    res.trace.warnings.push_back(std::string("clique ") + std::to_string(clique) + " skipped: " + e.what());
    return res;
  }
  if (space.constrained && !space.zps.nonzero_satisfiable) {
    res.trace.warnings.push_back("clique " + std::to_string(clique) +
                                 " skipped: some member exponent is forced to zero");
    return res;
  }
  const std::size_t dim = space.zps.free_count();

  FilterContext fctx{prob.stats, config.kappa1, config.kappa2};
  std::vector<RationalVector> frozen_rows;
  for (const auto& f : frozen) frozen_rows.push_back(f.w);

  // Returns the reason a candidate row fails the structure constraints.
  auto structure_check = [&](const RationalVector& w, bool use_ratio) -> std::optional<RejectReason> {
    if (!space.constrained) return std::nullopt;
    for (auto j : space.members) {
      if (w[j] == 0) return RejectReason::UnintendedZero;
    }
    const auto c = static_cast<std::size_t>(clique);
    if (c >= graph->ratios.size()) return std::nullopt;
    for (const auto& r : graph->ratios[c]) {
      const int es = graph->edge_sign(r.j, r.k);
      const int cs = sign(w[r.j]) * sign(w[r.k]);
      if (es != 0 && cs != es) return RejectReason::StructureSign;
      if (use_ratio && std::isfinite(r.ratio) && r.ratio != 0.0) {
        const double cand = to_double(w[r.j] / w[r.k]);
        if (std::fabs(cand / r.ratio - 1.0) > config.ratio_tolerance) return RejectReason::StructureRatio;
      }
    }
    return std::nullopt;
  };

  std::vector<CandidateFormula> scored;
  struct Pending {
    RationalVector mu;
    RationalVector w;
  };

  auto run_level = [&](const std::vector<RationalVector>& mus, const Rational& step) {
    LevelLog log;
    log.latent = frozen.size();
    log.clique = clique;
    log.step = step;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const bool use_ratio = attempt == 0;
      std::vector<Pending> pending;
      std::map<std::string, std::size_t> rejects;
      std::size_t hits = 0;
      std::size_t ratio_rejects = 0;
      DedupTable trial;
      std::vector<std::vector<RationalVector>> to_insert;
      for (const auto& mu : mus) {
        RationalVector w = exponents_from_params(mu, space.zps, sol);
        auto W = frozen_rows;
        W.push_back(w);
        std::optional<RejectReason> why = constraint_filter(W, fctx);
        if (!why) why = structure_check(w, use_ratio);
        if (why) {
          ++rejects[std::string(reason_name(*why))];
          if (*why == RejectReason::StructureRatio) ++ratio_rejects;
          continue;
        }
        if (dedup.contains(W) || !trial.insert(W)) {
          ++hits;
          continue;
        }
        to_insert.push_back(W);
        pending.push_back({mu, std::move(w)});
      }
      const bool level_starved = pending.empty() && ratio_rejects > 0 && hits == 0;
      if (use_ratio && level_starved && space.constrained) {
        res.trace.warnings.push_back("ratio constraint relaxed for clique " + std::to_string(clique) +
                                     " at step " + to_string(step) + ": no lattice point within tolerance");
        continue;
      }
      for (auto& W : to_insert) dedup.insert(W);

      std::vector<CandidateFormula> batch(pending.size());
      parallel_for(pending.size(), [&](std::size_t i) {
        std::vector<LatentSpec> lat = frozen;
        LatentSpec ls;
        ls.w = pending[i].w;
        ls.mode = config.mode;
        ls.params = pending[i].mu;
        ls.clique = clique;
        lat.push_back(std::move(ls));
        batch[i] = evaluate_candidate(prob, std::move(lat), config.degree);
      });
      std::size_t n_scored = 0;
      for (auto& c : batch) {
        if (!std::isfinite(c.r2)) {
          ++rejects[std::string(reason_name(RejectReason::NonFinite))];
          continue;
        }
        ++n_scored;
        scored.push_back(std::move(c));
      }
      log.enumerated = mus.size();
      log.scored = n_scored;
      res.trace.candidates_enumerated += mus.size();
      res.trace.candidates_scored += n_scored;
      res.trace.dedup_hits += hits;
      for (const auto& [k, v] : rejects) res.trace.rejections[k] += v;
      break;
    }
    std::stable_sort(scored.begin(), scored.end(), [&](const CandidateFormula& a, const CandidateFormula& b) {
      return ranks_before(a, b, config.tie_tolerance);
    });
    log.best_r2 = scored.empty() ? std::numeric_limits<double>::quiet_NaN() : scored.front().r2;
    res.trace.levels.push_back(log);
  };

  // Level 0: full lattice at the coarsest step.
  const Rational s0 = config.steps.front();
  std::vector<RationalVector> level0;
  {
    std::vector<Rational> axis;
    for (Rational v = config.range_lo; v <= config.range_hi; v += s0) axis.push_back(v);
    std::vector<std::size_t> idx(dim, 0);
    if (dim == 0) {
      level0.push_back({});
    } else {
      for (;;) {
        RationalVector mu(dim);
        for (std::size_t i = 0; i < dim; ++i) mu[i] = axis[idx[i]];
        level0.push_back(std::move(mu));
        std::size_t i = dim;
        bool done = false;
        while (true) {
          if (i == 0) {
            done = true;
            break;
          }
          --i;
          if (++idx[i] < axis.size()) break;
          idx[i] = 0;
        }
        if (done) break;
      }
    }
  }
  run_level(level0, s0);

  for (std::size_t l = 1; l < config.steps.size() && dim > 0; ++l) {
    const Rational step = config.steps[l];
    const Rational prev = config.steps[l - 1];
    const Rational ratio = prev / step;
    const int m = static_cast<int>(ratio.numerator() / ratio.denominator());
    const auto offs = offsets(dim, m);
    std::vector<RationalVector> mus;
    std::set<RationalVector> seen;
    const std::size_t survivors = std::min(config.top_k, scored.size());
    for (std::size_t s = 0; s < survivors; ++s) {
      const auto& center = scored[s].latents.back().params;
      for (const auto& k : offs) {
        RationalVector mu = add_scaled(center, dim, step, k);
        bool inside = true;
        for (const auto& v : mu) inside = inside && v >= config.range_lo && v <= config.range_hi;
        if (!inside || !seen.insert(mu).second) continue;
        mus.push_back(std::move(mu));
      }
    }
    run_level(mus, step);
  }
  res.ranked = std::move(scored);
  return res;
}

MultilevelResult multilevel_search(const SearchProblem& prob, const AffineSolutionSet& sol,
                                   const SearchConfig& config, const StructureGraph* graph) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  MultilevelResult out;
  DedupTable dedup;
  std::vector<LatentSpec> frozen;
  std::vector<int> used_cliques;
  double best_r2 = -std::numeric_limits<double>::infinity();
  const std::size_t corollary_cap = sol.p - sol.rank + 1;
  const std::size_t s_max = std::max<std::size_t>(1, std::min(config.s_max, corollary_cap));
  if (config.s_max > corollary_cap) {
    out.trace.warnings.push_back("s_max capped at p - rank(D) + 1 = " + std::to_string(corollary_cap));
  }

  auto merge_trace = [&](const SearchTrace& t) {
    out.trace.candidates_enumerated += t.candidates_enumerated;
    out.trace.candidates_scored += t.candidates_scored;
    out.trace.dedup_hits += t.dedup_hits;
    for (const auto& [k, v] : t.rejections) out.trace.rejections[k] += v;
    out.trace.levels.insert(out.trace.levels.end(), t.levels.begin(), t.levels.end());
    out.trace.warnings.insert(out.trace.warnings.end(), t.warnings.begin(), t.warnings.end());
  };

  for (std::size_t s = 0; s < s_max; ++s) {
    std::vector<CandidateFormula> level;
    int chosen_clique = -1;
    if (graph && !graph->latents.empty()) {
      for (std::size_t c = 0; c < graph->latents.size(); ++c) {
        if (std::find(used_cliques.begin(), used_cliques.end(), static_cast<int>(c)) != used_cliques.end()) continue;
        auto r = c2f_search(prob, sol, graph, config, frozen, static_cast<int>(c), &dedup);
        merge_trace(r.trace);
        level.insert(level.end(), std::make_move_iterator(r.ranked.begin()), std::make_move_iterator(r.ranked.end()));
      }
    } else {
      auto r = c2f_search(prob, sol, nullptr, config, frozen, -1, &dedup);
      merge_trace(r.trace);
      level = std::move(r.ranked);
    }
    std::stable_sort(level.begin(), level.end(), [&](const CandidateFormula& a, const CandidateFormula& b) {
      return ranks_before(a, b, config.tie_tolerance);
    });
    if (level.empty()) break;
    const CandidateFormula& top = level.front();
    const double improvement = top.r2 - best_r2;
    if (s > 0 && improvement < config.improvement_eps) {
      out.levels.push_back(std::move(level));
      break;
    }
    chosen_clique = top.latents.back().clique;
    if (chosen_clique >= 0) used_cliques.push_back(chosen_clique);
    frozen = top.latents;
    best_r2 = top.r2;
    out.best = top;
    out.levels.push_back(std::move(level));
    if (best_r2 >= config.target_r2) break;
    if (graph && !graph->latents.empty() && used_cliques.size() == graph->latents.size()) break;
  }
  if (config.mode == DIMode::DI2 && !out.best.latents.empty()) {
    out.best = assign_constant_units(std::move(out.best), prob.d, latent_dims(out.best, prob.D));
  }
  out.trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace find
