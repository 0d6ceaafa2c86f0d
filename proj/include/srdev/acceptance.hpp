#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace srdev {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
  double time_limit = 0;  ///< seconds, 0 if none
};

struct SuiteOptions {
  std::uint64_t seed = 20240611;
  int threads = 1;
  /// Multiplies every statistical path count; 1 is the full battery.
  double path_scale = 1.0;
  std::vector<int> only;  ///< criterion ids to run, empty for all
};

/// Runs the acceptance battery (criteria 1..11). If `progress` is set, one
/// line per criterion is written as it completes.
std::vector<CriterionResult> run_acceptance(const SuiteOptions& opts, std::ostream* progress = nullptr);

std::string format_result(const CriterionResult& r);
nlohmann::json to_json(const std::vector<CriterionResult>& results);

}  // namespace srdev
