#include "indep/report.hpp"

#include <sstream>

#include "indep/errors.hpp"

namespace indep {

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kExact:
      return "exact";
    case RunMode::kSketch:
      return "sketch";
    case RunMode::kBoth:
      return "both";
  }
  throw Error(Error::Category::kInternal, "unknown run mode");
}

RunMode parse_run_mode(const std::string& text) {
  if (text == "exact") return RunMode::kExact;
  if (text == "sketch") return RunMode::kSketch;
  if (text == "both") return RunMode::kBoth;
  throw ConfigError("mode must be exact, sketch or both, got '" + text + "'");
}

nlohmann::json EstimateReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["distance_estimate"] = distance_estimate;
  j["exact_distance"] = exact_distance ? nlohmann::json(*exact_distance) : nlohmann::json(nullptr);
  if (relative_error) j["relative_error"] = *relative_error;
  j["m"] = m;
  j["n"] = n;
  j["k"] = k;
  j["mode"] = to_string(mode);
  j["seed"] = seed;
  j["diagnostics"] = diagnostics;
  return j;
}

std::string EstimateReport::to_tsv() const {
  std::ostringstream os;
  os.precision(17);
  os << "schema_version\tmode\tk\tn\tm\tseed\tdistance_estimate\texact_distance\trelative_error\tdiagnostics\n";
  os << kSchemaVersion << '\t' << to_string(mode) << '\t' << k << '\t' << n << '\t' << m << '\t' << seed << '\t'
     << distance_estimate << '\t';
  if (exact_distance) os << *exact_distance;
  os << '\t';
  if (relative_error) os << *relative_error;
  os << '\t' << diagnostics.dump() << '\n';
  return os.str();
}

}  // namespace indep
