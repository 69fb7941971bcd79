#pragma once

// Record parsing, synthetic streams and the batch driver behind the indep tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "indep/errors.hpp"
#include "indep/pipeline.hpp"
#include "indep/report.hpp"
#include "indep/stream_core.hpp"

namespace indep::cli {

/// Streams records from text: one tuple per non-empty, non-'#' line, integers
/// separated by commas and/or whitespace. Errors name the 1-based line number.
class RecordReader : public TupleSource {
 public:
  RecordReader(std::istream& in, StreamShape shape) : in_(in), shape_(shape) { shape_.validate(); }
  StreamShape shape() const override { return shape_; }
  bool next(std::span<std::uint32_t> out) override;
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  StreamShape shape_;
  std::size_t line_ = 0;
  std::string buf_;
};

/// Counts what flows through a source.
class CountingSource : public TupleSource {
 public:
  explicit CountingSource(TupleSource& inner) : inner_(inner) {}
  StreamShape shape() const override { return inner_.shape(); }
  bool next(std::span<std::uint32_t> out) override;
  std::uint64_t records() const noexcept { return records_; }
  /// Number of next() calls that reported end of stream.
  std::uint64_t end_signals() const noexcept { return end_signals_; }

 private:
  TupleSource& inner_;
  std::uint64_t records_ = 0;
  std::uint64_t end_signals_ = 0;
};

/// Forwards tuples and records them in a frequency table on the way.
class TeeSource : public TupleSource {
 public:
  TeeSource(TupleSource& inner, FrequencyTable& table) : inner_(inner), table_(table) {}
  StreamShape shape() const override { return inner_.shape(); }
  bool next(std::span<std::uint32_t> out) override;

 private:
  TupleSource& inner_;
  FrequencyTable& table_;
};

TupleStream parse_records(std::istream& in, StreamShape shape);
TupleStream parse_records(const std::string& text, StreamShape shape);

enum class SyntheticKind { kIndependent, kDiagonal, kMixture };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kIndependent;
  /// Diagonal probability for kMixture.
  double rho = 0.5;
};

/// "independent", "diagonal", "mixture(R)" or "mixture:R".
SyntheticSpec parse_synthetic(const std::string& text);

TupleStream generate_synthetic(const SyntheticSpec& spec, std::size_t k, std::size_t n, std::uint64_t m,
                               std::uint64_t seed);

enum class OutputFormat { kJson, kTsv };

struct RunConfig {
  std::string input = "-";
  std::size_t k = 2;
  std::size_t n = 2;
  double epsilon = 0.3;
  double delta = 0.1;
  RunMode mode = RunMode::kBoth;
  std::uint64_t seed = 1;
  OutputFormat format = OutputFormat::kJson;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::string> generate;
  std::uint64_t m = 1000;
};

/// Splits KEY=VALUE; throws ConfigError.
std::pair<std::string, std::string> split_override(const std::string& text);

PipelineConfig pipeline_config(const RunConfig& cfg);

/// Runs one configuration over a source read exactly once.
EstimateReport execute(const RunConfig& cfg, TupleSource& source);

/// Opens the configured input (file, '-' for stdin, or the generator) and executes.
EstimateReport execute(const RunConfig& cfg);

std::string render(const EstimateReport& report, OutputFormat format);

/// Full driver: executes, writes the report to out, errors to err. Returns the exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// 0 for success; 1 input, 2 configuration, 3 budget, 4 internal.
int exit_code_for(const Error& e) noexcept;

}  // namespace indep::cli
