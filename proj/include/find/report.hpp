#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "find/attribution.hpp"
#include "find/benchgen.hpp"
#include "find/dataset.hpp"
#include "find/search.hpp"
#include "find/simplify.hpp"
#include "find/sparsereg.hpp"
#include "find/structure.hpp"

namespace find {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kReportSchema = "find-report/1";
inline constexpr std::string_view kManifestSchema = "find-manifest/1";
inline constexpr std::string_view kEngineVersion = "1.0.0";

/// Deterministic serialization: floats as %.17g, NaN/±inf as null, 2-space indent.
std::string dump(const Json& j, int indent = 2);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);
/// FNV-1a over the canonical CSV rendering.
std::string dataset_hash(const Dataset& ds);

Json unit_json(const DimVector& d);
Json rational_json(const Rational& r);
Json config_json(const SearchConfig& c);
Json trace_json(const SearchTrace& t);
Json candidate_json(const CandidateFormula& c, const std::vector<std::string>& names, const std::string& output,
                    const DimMatrix& D);
Json structure_json(const StructureGraph& g, const std::vector<std::string>& names);
Json matrix_json(const Eigen::MatrixXd& m);
Json attribution_json(const AttributionReport& r);
Json template_json(const Template& t, const std::string& output);
Json sparse_model_json(const SparseModel& m, const BasisLibrary& lib);
Json spec_json(const SyntheticSpec& s);
Json metrics_json(const StructureMetrics& m);

}  // namespace find
