#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace indep {

enum class RunMode { kExact, kSketch, kBoth };

std::string to_string(RunMode mode);
/// "exact" | "sketch" | "both"; throws ConfigError otherwise.
RunMode parse_run_mode(const std::string& text);

/// Final output of a run.
struct EstimateReport {
  static constexpr int kSchemaVersion = 1;

  double distance_estimate = 0;
  std::optional<double> exact_distance;
  /// |estimate - exact| / exact, present in mode both when exact > 0.
  std::optional<double> relative_error;
  std::uint64_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  RunMode mode = RunMode::kSketch;
  std::uint64_t seed = 0;
  nlohmann::json diagnostics = nlohmann::json::object();

  nlohmann::json to_json() const;
  /// Header line plus one value line; diagnostics are flattened to JSON text in the last column.
  std::string to_tsv() const;
};

}  // namespace indep
