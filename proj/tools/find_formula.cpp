#include <glob.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "find/attribution.hpp"
#include "find/benchgen.hpp"
#include "find/bundled.hpp"
#include "find/dataset.hpp"
#include "find/dimension.hpp"
#include "find/parallel.hpp"
#include "find/report.hpp"
#include "find/search.hpp"
#include "find/simplify.hpp"
#include "find/sparsereg.hpp"
#include "find/structure.hpp"

namespace fs = std::filesystem;
using find::Json;

namespace {

enum Exit { kOk = 0, kBadInput = 2, kInfeasible = 3, kNoCandidate = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoCandidate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string json_path;
  std::string manifest_path;
  std::size_t threads = 0;
  bool quiet = false;
};

struct DiscoverOpts {
  std::string csv;
  std::string output;
  std::string inputs;
  int di = 1;
  std::size_t s_max = 3;
  int degree = 5;
  double target_r2 = 0.999;
  std::string select = "shap:auto";
  std::string structure = "auto";
  std::string method = "polyfit";
  std::string enrich;
  bool dimensionless_latents = false;
  std::size_t top_k = 10;
  std::size_t kappa1 = 0;
  std::size_t kappa2 = 0;
  double improvement_eps = 1e-4;
  std::uint64_t seed = 0;
  std::size_t top = 5;
  std::string export_sr;
};

struct StructureOpts {
  std::string csv;
  std::string output;
  std::string inputs;
  std::string method = "polyfit";
  double threshold = 0.95;
};

struct PdeOpts {
  std::string pattern;
  std::string params;
  double threshold = 0.0;
  int degree = 1;
  std::uint64_t seed = 0;
};

struct BenchOpts {
  std::size_t n = 100;
  std::uint64_t seed = 1;
  std::string dx = "1,0.1,0.01";
  std::string estimator = "backward,polyfit";
  std::size_t cap = 20000;
  std::string out;
};

struct GenerateOpts {
  std::string name;
  std::string out;
  std::size_t levels = 8;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string absolute(const std::string& p) {
  if (p.empty()) return p;
  return fs::absolute(fs::path(p)).lexically_normal().string();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw find::DatasetError("cannot write '" + path + "'");
  out << text;
}

std::string default_manifest_path(const std::string& json_path) {
  if (json_path.empty()) return {};
  fs::path p(json_path);
  if (p.extension() == ".json") p.replace_extension();
  return p.string() + ".manifest.json";
}

Json base_report(const std::string& command) {
  Json j;
  j["schema"] = std::string(find::kReportSchema);
  j["engine_version"] = std::string(find::kEngineVersion);
  j["command"] = command;
  return j;
}

void emit(const Common& common, const std::string& command, const std::vector<std::string>& argv,
          const Json& config, const Json& report, const std::string& dataset_hash, std::uint64_t seed,
          double wall) {
  if (common.json_path.empty()) return;
  write_text(common.json_path, find::dump(report));
  const std::string mpath = common.manifest_path.empty() ? default_manifest_path(common.json_path)
                                                         : common.manifest_path;
  Json m;
  m["schema"] = std::string(find::kManifestSchema);
  m["command"] = command;
  m["argv"] = argv;
  m["config"] = config;
  m["dataset_hash"] = dataset_hash;
  m["seed"] = seed;
  m["engine_version"] = std::string(find::kEngineVersion);
  m["threads"] = find::thread_count();
  m["wall_seconds"] = wall;
  write_text(mpath, find::dump(m));
}

find::Dataset load(const std::string& path) {
  if (!fs::exists(path)) throw find::DatasetError("no such file '" + path + "'");
  return find::load_csv(path);
}

find::DerivativeMethod parse_method(const std::string& m) {
  if (m == "backward") return find::DerivativeMethod::BackwardDiff;
  if (m == "polyfit") return find::DerivativeMethod::LocalPolyfit;
  throw UsageError("unknown derivative method '" + m + "' (backward|polyfit)");
}

find::StructureGraph identify(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, find::DerivativeMethod m,
                              double threshold) {
  const Eigen::MatrixXd rho = find::rho_from_partials(X, find::estimate_partials(X, y, m));
  return find::weight_ratios(rho, find::cluster_latents(find::ppmcc(rho), threshold));
}

// ---------------------------------------------------------------------------
// discover

std::vector<std::string> discover_argv(const DiscoverOpts& o) {
  std::vector<std::string> a = {"discover", o.csv, "--output", o.output};
  if (!o.inputs.empty()) a.insert(a.end(), {"--inputs", o.inputs});
  a.insert(a.end(), {"--di", std::to_string(o.di), "--s-max", std::to_string(o.s_max), "--degree",
                     std::to_string(o.degree), "--target-r2", fmt(o.target_r2), "--select", o.select,
                     "--structure", o.structure, "--method", o.method});
  if (!o.enrich.empty()) a.insert(a.end(), {"--enrich", o.enrich});
  if (o.dimensionless_latents) a.push_back("--dimensionless-latents");
  a.insert(a.end(), {"--top-k", std::to_string(o.top_k), "--kappa1", std::to_string(o.kappa1), "--kappa2",
                     std::to_string(o.kappa2), "--improvement-eps", fmt(o.improvement_eps), "--seed",
                     std::to_string(o.seed), "--top", std::to_string(o.top)});
  if (!o.export_sr.empty()) a.insert(a.end(), {"--export-sr", o.export_sr});
  return a;
}

find::SearchConfig search_config(const DiscoverOpts& o) {
  find::SearchConfig c;
  if (o.di != 1 && o.di != 2) throw UsageError("--di must be 1 or 2");
  c.mode = o.di == 1 ? find::DIMode::DI1 : find::DIMode::DI2;
  c.s_max = o.s_max;
  c.degree = o.degree;
  c.target_r2 = o.target_r2;
  c.dimensionless_latents = o.dimensionless_latents;
  c.top_k = o.top_k;
  c.kappa1 = o.kappa1;
  c.kappa2 = o.kappa2;
  c.improvement_eps = o.improvement_eps;
  c.seed = o.seed;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

int cmd_discover(const DiscoverOpts& o, const Common& common) {
  const auto t0 = std::chrono::steady_clock::now();
  const find::SearchConfig cfg = search_config(o);
  const find::Dataset raw = load(o.csv);
  if (raw.index_of(o.output) < 0) throw UsageError("output column '" + o.output + "' not found");
  const std::string hash = find::dataset_hash(raw);

  std::vector<std::string> inputs = split_list(o.inputs);
  if (inputs.empty()) {
    for (const auto& n : raw.names()) {
      if (n != o.output) inputs.push_back(n);
    }
  }
  find::Dataset ds = raw.select([&] {
    auto cols = inputs;
    cols.push_back(o.output);
    return cols;
  }());
  Json enrich_json = nullptr;
  if (!o.enrich.empty()) {
    std::vector<find::UnaryOp> un;
    std::vector<find::BinaryOp> bin;
    try {
      find::parse_enrich_spec(o.enrich, un, bin);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    auto er = find::enrich_features(ds, un, bin, {o.output});
    ds = er.dataset;
    for (const auto& a : er.added) inputs.push_back(a);
    enrich_json = {{"added", er.added}, {"skipped", er.skipped}};
  }

  // Attribution and input selection.
  Json selection = {{"policy", o.select}};
  auto split = find::split_xy(ds, o.output, inputs);
  if (o.select != "all") {
    find::SelectionPolicy policy;
    if (o.select == "shap:auto") {
      policy = find::SelectionPolicy::cumulative();
    } else if (o.select.rfind("shap:", 0) == 0) {
      std::size_t k = 0;
      try {
        k = std::stoul(o.select.substr(5));
      } catch (...) {
        throw UsageError("bad --select '" + o.select + "'");
      }
      policy = find::SelectionPolicy::top_k(k);
    } else {
      throw UsageError("bad --select '" + o.select + "' (shap:k|shap:auto|all)");
    }
    find::ShapConfig sc;
    sc.seed = o.seed;
    auto rep = find::shapley_values(find::fit_surrogate(split.X, split.y), split.X, sc, split.input_names);
    std::vector<std::size_t> chosen;
    try {
      chosen = find::select_inputs(rep, policy);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    selection["attribution"] = find::attribution_json(rep);
    std::vector<std::string> picked;
    for (auto c : chosen) picked.push_back(split.input_names[c]);
    // Keep dataset order for the search.
    std::vector<std::string> ordered;
    for (const auto& n : inputs) {
      if (std::find(picked.begin(), picked.end(), n) != picked.end()) ordered.push_back(n);
    }
    inputs = ordered;
    split = find::split_xy(ds, o.output, inputs);
  }
  selection["selected"] = inputs;

  // Structure identification on dense grids.
  Json structure = {{"mode", o.structure}};
  std::optional<find::StructureGraph> graph;
  if (o.structure == "auto") {
    const double coverage = find::grid_coverage(split.X);
    structure["grid_coverage"] = coverage;
    if (coverage >= 0.9) {
      graph = identify(split.X, split.y, parse_method(o.method), 0.95);
      structure["method"] = o.method;
      structure["ppmcc"] = find::matrix_json(graph->correlation);
      structure["graph"] = find::structure_json(*graph, split.input_names);
      if (graph->latents.empty()) graph.reset();
    } else {
      structure["skipped"] = "points are not on a dense grid; using multi-level pursuit";
    }
  } else if (o.structure != "off") {
    throw UsageError("--structure must be auto or off");
  }

  const auto prob = find::SearchProblem::from_split(split);
  const auto sol = find::search_space(prob, cfg);
  const auto res = find::multilevel_search(prob, sol, cfg, graph ? &*graph : nullptr);
  if (res.best.latents.empty()) throw NoCandidate("no candidate passed the filters");

  Json report = base_report("discover");
  report["dataset"] = {{"source", o.csv}, {"hash", hash}, {"rows", raw.rows()}, {"dropped_rows", raw.dropped_rows()}};
  report["output"] = {{"name", o.output}, {"unit", find::unit_json(split.d)}};
  report["config"] = find::config_json(cfg);
  if (!enrich_json.is_null()) report["enrich"] = enrich_json;
  report["selection"] = selection;
  report["structure"] = structure;
  report["solution_space"] = {{"free_parameters", sol.free_count()}, {"rank", sol.rank}};
  report["best"] = find::candidate_json(res.best, split.input_names, o.output, split.D);

  Json levels = Json::array();
  for (std::size_t l = 0; l < res.levels.size(); ++l) {
    Json ranked = Json::array();
    const std::size_t shown = o.top == 0 ? res.levels[l].size() : std::min(o.top, res.levels[l].size());
    for (std::size_t i = 0; i < shown; ++i) {
      auto c = res.levels[l][i];
      if (cfg.mode == find::DIMode::DI2) c = find::assign_constant_units(c, prob.d, find::latent_dims(c, prob.D));
      ranked.push_back(find::candidate_json(c, split.input_names, o.output, split.D));
    }
    levels.push_back({{"latents", l + 1}, {"scored", res.levels[l].size()}, {"ranked", ranked}});
  }
  report["levels"] = levels;

  Json simplified = nullptr;
  if (res.best.latents.size() == 1) {
    const auto& w = res.best.latents.front().w;
    const Eigen::VectorXd z = find::latent_values(prob.X, w);
    if (auto t = find::simplify(z, prob.y, res.best.r2, find::latent_expr(w, split.input_names))) {
      simplified = find::template_json(*t, o.output);
    }
  }
  report["simplified"] = simplified;
  report["trace"] = find::trace_json(res.trace);

  if (!o.export_sr.empty()) {
    std::vector<find::Column> cols;
    for (std::size_t i = 0; i < res.best.latents.size(); ++i) {
      const auto v = find::latent_values(prob.X, res.best.latents[i].w);
      cols.push_back({"z" + std::to_string(i + 1), find::latent_unit(prob.D, res.best.latents[i].w),
                      std::vector<double>(v.data(), v.data() + v.size())});
    }
    cols.push_back({o.output, prob.d, std::vector<double>(prob.y.data(), prob.y.data() + prob.y.size())});
    find::write_csv(find::Dataset(std::move(cols), "latent export"), o.export_sr);
    report["export_sr"] = o.export_sr;
  }

  if (!common.quiet) {
    std::cout << "inputs: ";
    for (std::size_t i = 0; i < inputs.size(); ++i) std::cout << (i ? ", " : "") << inputs[i];
    std::cout << "\n";
    if (graph) std::cout << "structure: " << graph->latents.size() << " latent cliques\n";
    for (std::size_t l = 0; l < res.levels.size(); ++l) {
      std::cout << "level " << l + 1 << ":\n";
      for (std::size_t i = 0; i < std::min<std::size_t>(o.top == 0 ? 20 : o.top, res.levels[l].size()); ++i) {
        const auto& c = res.levels[l][i];
        std::printf("  %2zu. R2=%.9f  C=%zu  %s\n", i + 1, c.r2, c.complexity,
                    find::render_formula_text(c, o.output).c_str());
      }
    }
    std::printf("best: %s  (R2=%.9f)\n", find::render_formula_text(res.best, o.output).c_str(), res.best.r2);
    if (!simplified.is_null()) std::cout << "simplified: " << simplified["text"].get<std::string>() << "\n";
    std::cout << "candidates: " << res.trace.candidates_enumerated << " enumerated, " << res.trace.candidates_scored
              << " scored, " << res.trace.dedup_hits << " duplicates, " << res.trace.rejected() << " rejected\n";
    for (const auto& w : res.trace.warnings) std::cerr << "warning: " << w << "\n";
  }

  Json config = {{"discover", {{"csv", o.csv},         {"output", o.output},
                               {"inputs", o.inputs},   {"select", o.select},
                               {"structure", o.structure}, {"method", o.method},
                               {"enrich", o.enrich},   {"top", o.top},
                               {"export_sr", o.export_sr}}},
                 {"search", find::config_json(cfg)}};
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(common, "discover", discover_argv(o), config, report, hash, o.seed, wall);
  return kOk;
}

// ---------------------------------------------------------------------------
// structure

int cmd_structure(const StructureOpts& o, const Common& common) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ds = load(o.csv);
  const auto split = find::split_xy(ds, o.output, split_list(o.inputs));
  const double coverage = find::grid_coverage(split.X);
  Json report = base_report("structure");
  report["dataset"] = {{"source", o.csv}, {"hash", find::dataset_hash(ds)}, {"rows", ds.rows()}};
  report["output"] = o.output;
  report["inputs"] = split.input_names;
  report["method"] = o.method;
  report["threshold"] = o.threshold;
  report["grid_coverage"] = coverage;
  Json warnings = Json::array();
  if (coverage < 0.9) {
    warnings.push_back("points are not on a dense grid (coverage " + fmt(coverage) +
                       "); partial derivatives are mostly undefined");
  }
  const auto g = identify(split.X, split.y, parse_method(o.method), o.threshold);
  report["ppmcc"] = find::matrix_json(g.correlation);
  report["graph"] = find::structure_json(g, split.input_names);
  report["warnings"] = warnings;
  if (!common.quiet) {
    for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << "\n";
    std::cout << "PPMCC (" << o.method << "):\n";
    for (Eigen::Index i = 0; i < g.correlation.rows(); ++i) {
      std::printf("  %-8s", split.input_names[static_cast<std::size_t>(i)].c_str());
      for (Eigen::Index k = 0; k < g.correlation.cols(); ++k) std::printf(" %+6.2f", g.correlation(i, k));
      std::printf("\n");
    }
    for (std::size_t c = 0; c < g.latents.size(); ++c) {
      std::cout << "latent " << c + 1 << ":";
      for (auto m : g.latents[c]) std::cout << " " << split.input_names[m];
      std::cout << "\n";
    }
  }
  std::vector<std::string> argv = {"structure", o.csv, "--output", o.output};
  if (!o.inputs.empty()) argv.insert(argv.end(), {"--inputs", o.inputs});
  argv.insert(argv.end(), {"--method", o.method, "--threshold", fmt(o.threshold)});
  Json config = {{"csv", o.csv}, {"output", o.output}, {"inputs", o.inputs}, {"method", o.method}, {"threshold", o.threshold}};
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(common, "structure", argv, config, report, find::dataset_hash(ds), 0, wall);
  return kOk;
}

// ---------------------------------------------------------------------------
// pde

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  ::globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

// Unit of ξ for a library term, given x' = Σ ξ_k·term_k.
find::DimVector term_coefficient_unit(const std::string& term, const find::DimVector& ux, const find::DimVector& ut) {
  const find::DimVector u1 = ux - ut;
  const find::DimVector u2 = ux - ut * 2;
  find::DimVector tu;
  std::string t = term;
  std::size_t pos = 0;
  auto take = [&](const find::DimVector& u) { tu = tu + u; };
  while (pos < t.size()) {
    if (t.compare(pos, 3, "x''") == 0) {
      take(u2);
      pos += 3;
    } else if (t.compare(pos, 2, "x'") == 0) {
      take(u1);
      pos += 2;
    } else if (t[pos] == 'x') {
      take(ux);
      pos += 1;
    } else if (t[pos] == '^' && pos + 1 < t.size() && t[pos + 1] == '2') {
      // squares repeat the previous factor
      const std::string prev = t.substr(0, pos);
      if (prev.size() >= 3 && prev.compare(prev.size() - 3, 3, "x''") == 0) take(u2);
      else if (prev.size() >= 2 && prev.compare(prev.size() - 2, 2, "x'") == 0) take(u1);
      else take(ux);
      pos += 2;
    } else {
      ++pos;
    }
  }
  return u1 - tu;
}

int cmd_pde(const PdeOpts& o, const Common& common) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto files = expand_glob(o.pattern);
  if (files.empty()) throw UsageError("no series match '" + o.pattern + "'");
  Json report = base_report("pde");
  Json series = Json::array();
  std::string hash_input;
  std::vector<find::SeriesFit> fits;
  find::DimVector ux, ut;
  for (const auto& f : files) {
    const auto ds = load(f);
    hash_input += find::dataset_hash(ds);
    ux = ds.column("x").unit;
    ut = ds.column("t").unit;
    auto fit = find::identify_series(find::series_from_dataset(ds), o.threshold);
    series.push_back({{"source", f}, {"hash", find::dataset_hash(ds)}, {"rows", ds.rows()},
                      {"model", find::sparse_model_json(fit.model, fit.library)}});
    fits.push_back(std::move(fit));
  }
  report["series"] = series;
  const auto& names = fits.front().library.names;

  // Terms active in every series.
  std::vector<std::size_t> common_terms;
  for (std::size_t k = 0; k < names.size(); ++k) {
    bool all = true;
    for (const auto& f : fits) all = all && std::find(f.model.active.begin(), f.model.active.end(), k) != f.model.active.end();
    if (all) common_terms.push_back(k);
  }
  Json common_json = Json::array();
  for (auto k : common_terms) common_json.push_back(names[k]);
  report["common_active"] = common_json;

  Json laws = Json::array();
  Json warnings = Json::array();
  if (fits.size() >= 2 && !o.params.empty()) {
    auto params = load(o.params);
    hash_input += find::dataset_hash(params);
    if (params.rows() != fits.size()) {
      throw UsageError("parameter table has " + std::to_string(params.rows()) + " rows for " +
                       std::to_string(fits.size()) + " series");
    }
    const auto inputs = params.names();
    std::vector<std::string> outputs;
    for (auto k : common_terms) {
      if (names[k] == "1") continue;
      std::vector<double> v;
      for (const auto& f : fits) v.push_back(f.model.xi(static_cast<Eigen::Index>(k)));
      const std::string col = "xi" + std::to_string(k + 1);
      params.add_column({col, term_coefficient_unit(names[k], ux, ut), v});
      outputs.push_back(col);
    }
    find::SearchConfig cfg;
    cfg.degree = o.degree;
    cfg.seed = o.seed;
    cfg.s_max = 1;
    for (const auto& law : find::meta_discover(params, inputs, outputs, cfg)) {
      const auto split = find::split_xy(params, law.output, inputs);
      const std::size_t k = static_cast<std::size_t>(std::stoul(law.output.substr(2))) - 1;
      Json lj = {{"coefficient", law.output}, {"term", names[k]}, {"unit", find::unit_json(split.d)}};
      if (law.best.latents.empty()) {
        lj["best"] = nullptr;
        warnings.push_back("no law found for " + law.output);
      } else {
        lj["best"] = find::candidate_json(law.best, split.input_names, law.output, split.D);
      }
      lj["trace"] = find::trace_json(law.trace);
      laws.push_back(std::move(lj));
    }
  } else if (fits.size() >= 2) {
    warnings.push_back("no --params table; meta step skipped");
  }
  report["laws"] = laws;
  report["warnings"] = warnings;

  if (!common.quiet) {
    for (std::size_t i = 0; i < fits.size(); ++i) {
      std::cout << files[i] << ": x' =";
      bool first = true;
      for (auto a : fits[i].model.active) {
        const double v = fits[i].model.xi(static_cast<Eigen::Index>(a));
        const char* sep = first ? (v < 0 ? " -" : "") : (v < 0 ? " -" : " +");
        std::printf("%s %.6g*%s", sep, std::fabs(v), names[a].c_str());
        first = false;
      }
      std::cout << "\n";
    }
    for (const auto& l : laws) {
      if (!l["best"].is_null()) std::cout << "law: " << l["best"]["text"].get<std::string>() << "\n";
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << "\n";
  }
  std::vector<std::string> argv = {"pde", o.pattern};
  if (!o.params.empty()) argv.insert(argv.end(), {"--params", o.params});
  argv.insert(argv.end(), {"--threshold", fmt(o.threshold), "--degree", std::to_string(o.degree), "--seed",
                           std::to_string(o.seed)});
  Json config = {{"pattern", o.pattern}, {"params", o.params}, {"threshold", o.threshold}, {"degree", o.degree}, {"seed", o.seed}};
  const std::string hash = "fnv1a64:" + find::hex64(find::fnv1a(hash_input));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(common, "pde", argv, config, report, hash, o.seed, wall);
  return kOk;
}

// ---------------------------------------------------------------------------
// benchgen

find::RhoEstimator parse_estimator(const std::string& e) {
  if (e == "backward") return find::RhoEstimator::BackwardDiff;
  if (e == "polyfit") return find::RhoEstimator::LocalPolyfit;
  if (e == "analytic") return find::RhoEstimator::Analytic;
  throw UsageError("unknown estimator '" + e + "' (backward|polyfit|analytic)");
}

int cmd_benchgen(const BenchOpts& o, const Common& common) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> dxs;
  for (const auto& s : split_list(o.dx)) {
    try {
      dxs.push_back(std::stod(s));
    } catch (...) {
      throw UsageError("bad --dx value '" + s + "'");
    }
    if (!(dxs.back() > 0.0)) throw UsageError("--dx values must be positive");
  }
  std::vector<find::RhoEstimator> ests;
  for (const auto& e : split_list(o.estimator)) ests.push_back(parse_estimator(e));
  if (dxs.empty() || ests.empty()) throw UsageError("--dx and --estimator need at least one value");
  if (o.n == 0) throw UsageError("--n must be positive");

  const auto suite = find::generate_suite(o.n, o.seed);
  std::vector<find::SuiteReport> reports;
  for (auto e : ests) {
    for (double dx : dxs) reports.push_back(find::run_suite(suite, dx, e, o.cap));
  }

  Json report = base_report("benchgen");
  report["suite"] = {{"n", o.n}, {"seed", o.seed}, {"cap", o.cap}};
  Json means = Json::array();
  for (const auto& r : reports) {
    means.push_back({{"dx", r.dx}, {"estimator", find::estimator_name(r.estimator)}, {"mean", find::metrics_json(r.mean)}});
  }
  report["means"] = means;
  // Trend: for each estimator, metrics 1-3 at the smallest Δx against the largest.
  Json trend = Json::array();
  for (auto e : ests) {
    const find::SuiteReport* fine = nullptr;
    const find::SuiteReport* coarse = nullptr;
    for (const auto& r : reports) {
      if (r.estimator != e) continue;
      if (!fine || r.dx < fine->dx) fine = &r;
      if (!coarse || r.dx > coarse->dx) coarse = &r;
    }
    const bool holds = fine->mean.contributing_tp_over_tp_fn >= coarse->mean.contributing_tp_over_tp_fn &&
                       fine->mean.latent_count_ratio >= coarse->mean.latent_count_ratio &&
                       fine->mean.connection_tp_over_tp_fn >= coarse->mean.connection_tp_over_tp_fn;
    trend.push_back({{"estimator", find::estimator_name(e)}, {"fine_dx", fine->dx}, {"coarse_dx", coarse->dx},
                     {"metrics_1_3_non_decreasing", holds}});
  }
  report["trend"] = trend;

  if (!o.out.empty()) {
    fs::create_directories(o.out);
    Json specs = Json::array();
    for (const auto& s : suite) {
      Json sj = find::spec_json(s);
      sj["truth"] = find::structure_json(s.truth(), s.input_names());
      specs.push_back(std::move(sj));
    }
    Json sm = {{"schema", "find-suite/1"}, {"n", o.n}, {"seed", o.seed}, {"specs", specs}};
    write_text((fs::path(o.out) / "suite.json").string(), find::dump(sm));
    write_text((fs::path(o.out) / "metrics.csv").string(), find::suite_csv(reports));
    report["files"] = {"suite.json", "metrics.csv"};
  }

  if (!common.quiet) {
    std::printf("%-10s %-8s %8s %8s %8s %8s\n", "estimator", "dx", "m1", "m2", "m3", "m4");
    for (const auto& r : reports) {
      std::printf("%-10s %-8g %8.4f %8.4f %8.4f %8.4f\n", find::estimator_name(r.estimator).c_str(), r.dx,
                  r.mean.contributing_tp_over_tp_fn, r.mean.latent_count_ratio, r.mean.connection_tp_over_tp_fn,
                  r.mean.ratio_accuracy);
    }
  }
  std::vector<std::string> argv = {"benchgen", "--n", std::to_string(o.n), "--seed", std::to_string(o.seed), "--dx",
                                   o.dx, "--estimator", o.estimator, "--cap", std::to_string(o.cap)};
  if (!o.out.empty()) argv.insert(argv.end(), {"--out", o.out});
  Json config = {{"n", o.n}, {"seed", o.seed}, {"dx", dxs}, {"estimator", o.estimator}, {"cap", o.cap}, {"out", o.out}};
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(common, "benchgen", argv, config, report, "none", o.seed, wall);
  return kOk;
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(const GenerateOpts& o, const Common& common) {
  if (o.out.empty()) throw UsageError("--out is required");
  std::vector<std::string> written;
  if (o.name == "solar") {
    find::write_csv(find::solar_system(), o.out);
    written.push_back(o.out);
  } else if (o.name == "rlc") {
    find::write_csv(find::rlc_grid(o.levels), o.out);
    written.push_back(o.out);
  } else if (o.name == "kepler") {
    find::write_csv(find::kepler(o.n ? o.n : 20), o.out);
    written.push_back(o.out);
  } else if (o.name == "knudsen") {
    find::write_csv(find::knudsen(o.n ? o.n : 120, o.seed ? o.seed : 7), o.out);
    written.push_back(o.out);
  } else if (o.name == "smd") {
    fs::create_directories(o.out);
    const auto sets = find::smd_parameter_sets(o.n ? o.n : 8, o.seed ? o.seed : 3);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "series_%02zu.csv", i + 1);
      const auto path = (fs::path(o.out) / name).string();
      find::write_csv(find::series_dataset(find::simulate_smd(sets[i])), path);
      written.push_back(path);
    }
    const auto path = (fs::path(o.out) / "params.csv").string();
    find::write_csv(find::smd_parameter_table(sets), path);
    written.push_back(path);
  } else {
    std::string all;
    for (const auto& n : find::bundled_names()) all += (all.empty() ? "" : "|") + n;
    throw UsageError("unknown dataset '" + o.name + "' (" + all + ")");
  }
  if (!common.quiet) {
    for (const auto& w : written) std::cout << "wrote " << w << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run(std::vector<std::string> args);

int cmd_rerun(const std::string& manifest_path, const Common& common, bool threads_given) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw UsageError("cannot read manifest '" + manifest_path + "'");
  Json m;
  try {
    m = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed manifest: ") + e.what());
  }
  if (m.value("schema", "") != find::kManifestSchema) throw UsageError("not a find-manifest/1 document");
  if (m.value("engine_version", "") != find::kEngineVersion) {
    std::cerr << "warning: manifest written by engine " << m.value("engine_version", "?") << "\n";
  }
  std::vector<std::string> args = m.at("argv").get<std::vector<std::string>>();
  if (!common.json_path.empty()) args.insert(args.end(), {"--json", common.json_path});
  if (!common.manifest_path.empty()) args.insert(args.end(), {"--manifest", common.manifest_path});
  args.insert(args.end(), {"--threads", std::to_string(threads_given ? common.threads : m.value("threads", 0))});
  if (common.quiet) args.push_back("--quiet");
  return run(args);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--json", c.json_path, "Write the JSON report here");
  sub->add_option("--manifest", c.manifest_path, "Manifest path (default: <json>.manifest.json)");
  sub->add_option("--threads", c.threads, "Worker cap (0 = hardware concurrency)");
  sub->add_flag("--quiet", c.quiet, "Suppress console output");
}

int run(std::vector<std::string> args) {
  CLI::App app{"find-formula: formula discovery from measured data"};
  app.require_subcommand(1);
  Common common;
  DiscoverOpts dopt;
  StructureOpts sopt;
  PdeOpts popt;
  BenchOpts bopt;
  GenerateOpts gopt;
  std::string manifest;

  auto* d = app.add_subcommand("discover", "Search for formulas explaining an output column");
  d->add_option("csv", dopt.csv, "Input CSV with name[unit] headers")->required();
  d->add_option("--output", dopt.output, "Output column")->required();
  d->add_option("--inputs", dopt.inputs, "Comma-separated input columns (default: all others)");
  d->add_option("--di", dopt.di, "Dimensional invariance strategy (1 or 2)");
  d->add_option("--s-max", dopt.s_max, "Maximum number of latent variables");
  d->add_option("--degree", dopt.degree, "Polynomial degree (1-8)");
  d->add_option("--target-r2", dopt.target_r2, "Stop once this R2 is reached");
  d->add_option("--select", dopt.select, "Input selection: shap:k, shap:auto or all");
  d->add_option("--structure", dopt.structure, "Structure identification: auto or off");
  d->add_option("--method", dopt.method, "Partial derivative estimator: backward or polyfit");
  d->add_option("--enrich", dopt.enrich, "Derived features, e.g. 'sin,cos;+,*'");
  d->add_flag("--dimensionless-latents", dopt.dimensionless_latents, "Constrain latents to be dimensionless");
  d->add_option("--top-k", dopt.top_k, "Survivors per refinement level");
  d->add_option("--kappa1", dopt.kappa1, "Max nonzero exponents per latent (0 = off)");
  d->add_option("--kappa2", dopt.kappa2, "Max nonzero exponents in total (0 = off)");
  d->add_option("--improvement-eps", dopt.improvement_eps, "Minimum R2 gain for another latent");
  d->add_option("--seed", dopt.seed, "Random seed");
  d->add_option("--top", dopt.top, "Candidates reported per level (0 = all)");
  d->add_option("--export-sr", dopt.export_sr, "Write latent values and output as CSV");
  add_common(d, common);

  auto* s = app.add_subcommand("structure", "PPMCC matrix and latent structure graph");
  s->add_option("csv", sopt.csv)->required();
  s->add_option("--output", sopt.output)->required();
  s->add_option("--inputs", sopt.inputs);
  s->add_option("--method", sopt.method, "backward or polyfit");
  s->add_option("--threshold", sopt.threshold, "|PPMCC| edge threshold");
  add_common(s, common);

  auto* p = app.add_subcommand("pde", "Sparse regression per series, then meta discovery of coefficients");
  p->add_option("series", popt.pattern, "Glob matching series CSVs (t[s], x[...])")->required();
  p->add_option("--params", popt.params, "Parameter table, one row per series in sorted file order");
  p->add_option("--threshold", popt.threshold, "STLSQ threshold (<= 0: 0.05 max|xi|)");
  p->add_option("--degree", popt.degree, "Polynomial degree of the meta search");
  p->add_option("--seed", popt.seed);
  add_common(p, common);

  auto* b = app.add_subcommand("benchgen", "Synthetic structure-identification benchmark");
  b->add_option("--n", bopt.n, "Number of specs");
  b->add_option("--seed", bopt.seed);
  b->add_option("--dx", bopt.dx, "Comma-separated grid spacings");
  b->add_option("--estimator", bopt.estimator, "Comma-separated: backward, polyfit, analytic");
  b->add_option("--cap", bopt.cap, "Maximum grid points per spec");
  b->add_option("--out", bopt.out, "Directory for suite.json and metrics.csv");
  add_common(b, common);

  auto* g = app.add_subcommand("generate", "Write a bundled dataset");
  g->add_option("name", gopt.name, "solar, rlc, kepler, knudsen or smd")->required();
  g->add_option("--out", gopt.out, "Output file (directory for smd)")->required();
  g->add_option("--levels", gopt.levels, "Grid levels (rlc)");
  g->add_option("--n", gopt.n, "Row or series count");
  g->add_option("--seed", gopt.seed);
  add_common(g, common);

  auto* r = app.add_subcommand("rerun", "Repeat a run from its manifest");
  r->add_option("file", manifest, "Manifest JSON written by an earlier run")->required();
  add_common(r, common);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  find::set_threads(common.threads);
  dopt.csv = absolute(dopt.csv);
  dopt.export_sr = absolute(dopt.export_sr);
  sopt.csv = absolute(sopt.csv);
  popt.pattern = absolute(popt.pattern);
  popt.params = absolute(popt.params);
  bopt.out = absolute(bopt.out);
  try {
    if (*d) return cmd_discover(dopt, common);
    if (*s) return cmd_structure(sopt, common);
    if (*p) return cmd_pde(popt, common);
    if (*b) return cmd_benchgen(bopt, common);
    if (*g) return cmd_generate(gopt, common);
    if (*r) return cmd_rerun(manifest, common, r->count("--threads") > 0);
  } catch (const find::InfeasibleDimensions& e) {
    std::cerr << "error: infeasible dimensions: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NoCandidate& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoCandidate;
  } catch (const find::UnitParseError& e) {
    std::cerr << "error: bad unit: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}
