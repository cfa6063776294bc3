#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "varhardy/grid.hpp"
#include "varhardy/stability.hpp"

namespace varhardy {

inline constexpr const char* kVersion = "0.1.0";

/// Everything needed to rerun an experiment.
struct ExperimentConfig {
  std::string command = "suite";  ///< suite | norm | maximal | awconst | atoms | lp | wavelet
  std::string suite = "E1";
  int dim = 1;
  double half_width = 8.0;
  int level = 9;
  std::string exponent = "const:2";
  std::string weight = "const:1";
  std::uint64_t seed = 1;
  std::string out = "varhardy_report";
  int family_size = 20;
  double stability = kStabilityRatio;  ///< two-resolution growth threshold
  double band = 4.0;                   ///< allowed hi/lo spread of equivalence ratios
};

/// Throws PresetError (message names the key) for presets that do not
/// resolve, std::invalid_argument for anything else out of range.
void validate(const ExperimentConfig& cfg);

/// Overlays the keys of a JSON config file (same names as the CLI flags:
/// n, T, m, p, w, seed, out, suite, family_size, stability, band) on `base`.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// One report row: a quantity evaluated at levels m and m + 1.
struct CaseRecord {
  std::string suite;
  std::string name;
  std::string quantity;
  double value_m = 0.0;
  double value_m1 = 0.0;
  double ratio = 1.0;
  bool pass = true;
  std::string note;
};

struct SuiteReport {
  std::string suite;
  ExperimentConfig config;
  std::vector<CaseRecord> records;
  bool pass = true;
  double wall_seconds = 0.0;
  std::string timestamp;  ///< UTC, ISO 8601
};

/// "E1".."E9" in order.
std::vector<std::string> suite_ids();
/// One-line description of a suite id or operator command.
std::string describe(const std::string& id);

/// Runs cfg.suite (command "suite") or the operator command.
SuiteReport run_suite(const ExperimentConfig& cfg);

/// Deterministic apart from the "timestamp" object.
std::string report_json(const SuiteReport& report);
/// suite,case,quantity,value_m,value_m1,ratio,pass
std::string report_csv(const SuiteReport& report);
/// Writes `stem`.json and `stem`.csv.
void write_report(const SuiteReport& report, const std::string& stem);

/// Exponent, weight and function presets, one per line, in a fixed order.
std::string list_presets();

/// Resolution-independent description of a test function; `sample` draws it
/// on any lattice so the two-resolution protocol sees the same function.
struct TestFunction {
  std::string label;
  std::function<GridFunction(const Domain&)> sample;
};

/// Families: "bump" (random centre and width), "haar" (dyadic oscillation),
/// "plateau" (polynomial on a ball), "spike" (clamped |x - c|^-a), "delta".
std::vector<TestFunction> test_family(const std::string& kind, int dim, double half_width, int count,
                                      std::uint64_t seed);
std::vector<std::string> family_kinds();

}  // namespace varhardy
