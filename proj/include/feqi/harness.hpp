#pragma once

#include "feqi/interp.hpp"
#include "feqi/proxy3d.hpp"
#include "feqi/targets.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace feqi {

enum class InterpolantKind { Clement, ClementBC, ScottZhang };
const char* to_string(InterpolantKind kind);
InterpolantKind interpolant_from_string(const std::string& s);

enum class BoundaryKind { None, Full, Facets };

/// One refinement study. JSON layout:
///   {"mesh": {"generator": "unit_square"|"unit_cube", "divisions": 1, "levels": [..]}
///         or {"file": "mesh.json", "levels": [..]},
///    "space": {"family": "full"|"trimmed", "r": 1, "k": 0} or {"proxy": "rt", "r": 1},
///    "interpolant": "clement"|"clement_bc"|"scott_zhang", "p": 2 or "inf",
///    "boundary": "none"|"full"|"facets", "target": {"name": "trig", "seed": 0},
///    "quadrature_order": 0, "constants": false, "output": "dir"}
/// Levels count refinements of the generator (or file) mesh.
struct StudyConfig {
  std::string mesh_file;
  int dim = 2;
  int divisions = 1;
  std::vector<int> levels{2, 3, 4, 5};
  Family family = Family::Full;
  int r = 1;
  int k = 0;
  std::string proxy;  // ned1, ned2, rt or bdm; overrides family and k
  InterpolantKind interpolant = InterpolantKind::ScottZhang;
  double p = 2.0;  // kInfinity for the max norm
  BoundaryKind boundary = BoundaryKind::None;
  std::string target = "trig";
  unsigned seed = 0;
  int quadrature_order = 0;  // 0: 2r + 4
  bool constants = false;    // measure biorthogonal and facet-form constants per level
  std::string output;

  /// Throws InvalidConfig for inconsistent settings.
  void validate() const;
  int order() const { return quadrature_order > 0 ? quadrature_order : 2 * r + 4; }
  /// r + 1 for FULL, r for TRIMMED (after the k = 0 / k = n identifications).
  int expected_rate() const;

  static StudyConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct LevelResult {
  int level = 0;
  double h = 0.0;
  int cells = 0;
  int dofs = 0;
  double error = 0.0;           // global L^p error
  double max_cell_error = 0.0;
  double derror = 0.0;          // global L^p error of d
  double stability = 0.0;       // max_T |I w|_T / |w|_{patch(T)} (+ |dw|_{patch} for Scott-Zhang)
  double max_zeroed = 0.0;
  double seconds = 0.0;
  std::optional<BiorthConstants> biorth;
  std::optional<XiScaling> xi;
};

/// Least-squares slope of log(error) against log(h); NaN if any error is 0.
double fit_slope(const std::vector<double>& h, const std::vector<double>& e);

struct RateReport {
  StudyConfig config;
  std::vector<LevelResult> levels;
  double slope = 0.0;       // least squares over all levels
  double slope_fine = 0.0;  // all but the coarsest level
  double slope_last = 0.0;  // last two levels
  double dslope = 0.0;      // least squares over all levels for the error of d
  int expected = 0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

/// Hook receiving each level's mesh and boundary subcomplex.
using MeshCallback = std::function<void(int level, const SimplicialComplex&, const BoundarySubcomplex&)>;

RateReport run_study(const StudyConfig& config, const MeshCallback& on_mesh = {});

/// level,h,error,slope (slope from the previous level, empty on the first).
void write_results_csv(const RateReport& report, std::ostream& out);

/// One measured quantity with its acceptance window [lo, hi].
struct Metric {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool ok() const { return value >= lo && value <= hi; }
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Metric> metrics;
  std::vector<std::string> notes;
  double seconds = 0.0;
  bool passed() const;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  unsigned seed = 0;
  std::string dump_biorth;  // CSV path for the [phi*(phi)] dump of the biorth suite
  std::ostream* log = nullptr;
};

/// Acceptance thresholds.
namespace tol {
inline constexpr double algebra = 1e-10;
inline constexpr double algebra_seconds = 30.0;
inline constexpr double membership = 1e-9;
inline constexpr double duality = 1e-9;
inline constexpr double constant_variation = 0.05;
inline constexpr double moment = 1e-9;
inline constexpr double ibp_poly = 1e-9;
inline constexpr double ibp_smooth = 1e-6;
inline constexpr double reproduction = 1e-8;
inline constexpr double rate = 0.15;
inline constexpr double rate_seconds = 600.0;
inline constexpr double bc_trace = 1e-9;
inline constexpr double bc_zeroed = 1e-6;
inline constexpr double broken_variation = 2.0;
inline constexpr double curl_div = 1e-4;
}  // namespace tol

/// Criteria 1..9.
CriterionResult run_criterion(int id, const VerifyOptions& options = {});
/// Suites: algebra {1,2}, biorth {3}, facetdual {4}, interp {5,6,7,8}, proxy {9}.
std::vector<int> suite_criteria(const std::string& suite);

}  // namespace feqi
