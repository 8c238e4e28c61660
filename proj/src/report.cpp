#include "find/report.hpp"

#include <cmath>
#include <cstdio>

namespace find {

namespace {

void write_string(const std::string& s, std::string& out) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void write(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::null: out += "null"; return;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
    case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); return;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); return;
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    case Json::value_t::string: write_string(j.get_ref<const std::string&>(), out); return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ',';
          out += nl;
        }
        first = false;
        out += pad;
        write(v, indent, depth + 1, out);
      }
      out += nl;
      out += close;
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ',';
          out += nl;
        }
        first = false;
        out += pad;
        write_string(it.key(), out);
        out += indent > 0 ? ": " : ":";
        write(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += close;
      out += '}';
      return;
    }
    default: out += "null"; return;
  }
}

Json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string dump(const Json& j, int indent) {
  std::string out;
  write(j, indent, 0, out);
  out += '\n';
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string dataset_hash(const Dataset& ds) { return "fnv1a64:" + hex64(fnv1a(to_csv(ds))); }

Json unit_json(const DimVector& d) {
  Json j;
  j["text"] = format_unit(d);
  Json e = Json::array();
  for (std::size_t i = 0; i < kBaseDims; ++i) e.push_back(to_string(d[i]));
  j["exponents"] = e;
  return j;
}

Json rational_json(const Rational& r) { return to_string(r); }

Json config_json(const SearchConfig& c) {
  Json j;
  j["mode"] = c.mode == DIMode::DI1 ? "DI-1" : "DI-2";
  j["dimensionless_latents"] = c.dimensionless_latents;
  j["range"] = Json::array({to_string(c.range_lo), to_string(c.range_hi)});
  Json steps = Json::array();
  for (const auto& s : c.steps) steps.push_back(to_string(s));
  j["steps"] = steps;
  j["top_k"] = c.top_k;
  j["s_max"] = c.s_max;
  j["kappa1"] = c.kappa1;
  j["kappa2"] = c.kappa2;
  j["target_r2"] = c.target_r2;
  j["improvement_eps"] = c.improvement_eps;
  j["degree"] = c.degree;
  j["seed"] = c.seed;
  j["ratio_tolerance"] = c.ratio_tolerance;
  j["tie_tolerance"] = c.tie_tolerance;
  return j;
}

Json trace_json(const SearchTrace& t) {
  Json j;
  j["candidates_enumerated"] = t.candidates_enumerated;
  j["candidates_scored"] = t.candidates_scored;
  j["dedup_hits"] = t.dedup_hits;
  Json rej = Json::object();
  for (const auto& [k, v] : t.rejections) rej[k] = v;
  j["rejections"] = rej;
  Json levels = Json::array();
  for (const auto& l : t.levels) {
    levels.push_back({{"latent", l.latent},
                      {"clique", l.clique},
                      {"step", to_string(l.step)},
                      {"enumerated", l.enumerated},
                      {"scored", l.scored},
                      {"best_r2", num(l.best_r2)}});
  }
  j["levels"] = levels;
  j["warnings"] = t.warnings;
  return j;
}

Json candidate_json(const CandidateFormula& c, const std::vector<std::string>& names, const std::string& output,
                    const DimMatrix& D) {
  Json j;
  Json lat = Json::array();
  for (const auto& l : c.latents) {
    Json e = Json::object();
    for (std::size_t k = 0; k < l.w.size(); ++k) {
      if (l.w[k] != 0) e[names[k]] = to_string(l.w[k]);
    }
    lat.push_back({{"exponents", e},
                   {"text", render_text(latent_expr(l.w, names))},
                   {"unit", unit_json(latent_unit(D, l.w))},
                   {"provenance", l.provenance()}});
  }
  j["latents"] = lat;
  j["r2"] = num(c.r2);
  j["complexity"] = c.complexity;
  j["text"] = render_formula_text(c, output);
  j["sexpr"] = render_formula_sexpr(c);
  Json terms = Json::array();
  for (std::size_t t = 0; t < c.poly.terms.size(); ++t) {
    Json term{{"powers", c.poly.terms[t]}, {"coefficient", num(c.poly.coefficients[t])}};
    if (t < c.constant_units.size()) term["unit"] = unit_json(c.constant_units[t]);
    terms.push_back(std::move(term));
  }
  j["polynomial"] = {{"degree", c.poly.degree}, {"terms", terms}};
  return j;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(num(m(i, k)));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json structure_json(const StructureGraph& g, const std::vector<std::string>& names) {
  auto name_of = [&](std::size_t j) { return j < names.size() ? names[j] : "x" + std::to_string(j + 1); };
  Json j;
  Json contrib = Json::array();
  for (auto c : g.contributing) contrib.push_back(name_of(c));
  j["contributing"] = contrib;
  Json non = Json::array();
  for (std::size_t k = 0; k < g.inputs; ++k) {
    if (std::find(g.contributing.begin(), g.contributing.end(), k) == g.contributing.end()) non.push_back(name_of(k));
  }
  j["non_contributing"] = non;
  Json cliques = Json::array();
  for (std::size_t c = 0; c < g.latents.size(); ++c) {
    Json members = Json::array();
    for (auto m : g.latents[c]) members.push_back(name_of(m));
    Json ratios = Json::array();
    if (c < g.ratios.size()) {
      for (const auto& r : g.ratios[c]) {
        ratios.push_back({{"j", name_of(r.j)},
                          {"k", name_of(r.k)},
                          {"ratio", num(r.ratio)},
                          {"confidence", num(r.confidence)},
                          {"sign", g.edge_sign(r.j, r.k)}});
      }
    }
    cliques.push_back({{"members", members}, {"ratios", ratios}});
  }
  j["latents"] = cliques;
  return j;
}

Json attribution_json(const AttributionReport& r) {
  Json arr = Json::array();
  for (std::size_t rank = 0; rank < r.ranking.size(); ++rank) {
    const std::size_t f = r.ranking[rank];
    const bool sel = std::find(r.selected.begin(), r.selected.end(), f) != r.selected.end();
    arr.push_back({{"feature", r.features[f]}, {"mean_abs_shap", num(r.mean_abs[f])}, {"rank", rank + 1}, {"selected", sel}});
  }
  return arr;
}

Json template_json(const Template& t, const std::string& output) {
  return {{"form", std::string(form_name(t.form))},
          {"params", t.params},
          {"r2", num(t.r2)},
          {"complexity", t.complexity},
          {"text", render(t, output)},
          {"sexpr", render_sexpr(t.expression)}};
}

Json sparse_model_json(const SparseModel& m, const BasisLibrary& lib) {
  Json terms = Json::array();
  for (std::size_t k = 0; k < lib.names.size(); ++k) {
    terms.push_back({{"term", lib.names[k]}, {"xi", num(m.xi(static_cast<Eigen::Index>(k)))}});
  }
  Json active = Json::array();
  for (auto a : m.active) active.push_back(lib.names[a]);
  return {{"threshold", num(m.threshold)},
          {"iterations", m.iterations},
          {"zero_model", m.zero_model},
          {"active", active},
          {"coefficients", terms}};
}

Json spec_json(const SyntheticSpec& s) {
  return {{"id", s.id},
          {"seed", s.seed},
          {"p", s.p},
          {"s", s.s},
          {"W", s.W},
          {"z_center", s.z_center},
          {"f2", render_sexpr(s.f2)},
          {"y", render_sexpr(s.y)}};
}

Json metrics_json(const StructureMetrics& m) {
  return {{"m1_contributing_tp_over_tp_fn", num(m.contributing_tp_over_tp_fn)},
          {"m2_latent_count_ratio", num(m.latent_count_ratio)},
          {"m3_connection_tp_over_tp_fn", num(m.connection_tp_over_tp_fn)},
          {"m4_ratio_accuracy", num(m.ratio_accuracy)}};
}

}  // namespace find
