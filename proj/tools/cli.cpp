#include "cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "indep/errors.hpp"
#include "indep/tensor_ops.hpp"

namespace indep::cli {

namespace {

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

bool RecordReader::next(std::span<std::uint32_t> out) {
  while (std::getline(in_, buf_)) {
    ++line_;
    std::size_t pos = 0;
    std::size_t count = 0;
    bool any = false;
    while (pos < buf_.size()) {
      const char c = buf_[pos];
      if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
        ++pos;
        continue;
      }
      if (!any && c == '#') break;
      any = true;
      std::size_t end = pos;
      while (end < buf_.size() && buf_[end] != ',' && buf_[end] != ' ' && buf_[end] != '\t' && buf_[end] != '\r')
        ++end;
      std::uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(buf_.data() + pos, buf_.data() + end, value);
      if (ec != std::errc() || ptr != buf_.data() + end)
        throw MalformedInput(line_error(line_, "'" + buf_.substr(pos, end - pos) + "' is not a non-negative integer"));
      if (count < shape_.k) {
        if (value < 1 || value > shape_.n)
          throw MalformedInput(line_error(line_, "value " + std::to_string(value) + " outside [1, " +
                                                     std::to_string(shape_.n) + "]"));
        out[count] = static_cast<std::uint32_t>(value);
      }
      ++count;
      pos = end;
    }
    if (!any) continue;
    if (count != shape_.k)
      throw MalformedInput(
          line_error(line_, "expected " + std::to_string(shape_.k) + " values, got " + std::to_string(count)));
    return true;
  }
  if (in_.bad()) throw MalformedInput("read error after line " + std::to_string(line_));
  return false;
}

bool CountingSource::next(std::span<std::uint32_t> out) {
  if (inner_.next(out)) {
    ++records_;
    return true;
  }
  ++end_signals_;
  return false;
}

bool TeeSource::next(std::span<std::uint32_t> out) {
  if (!inner_.next(out)) return false;
  table_.add(out);
  return true;
}

TupleStream parse_records(std::istream& in, StreamShape shape) {
  RecordReader reader(in, shape);
  TupleStream stream(shape);
  std::vector<std::uint32_t> buf(shape.k);
  while (reader.next(buf)) stream.push_back(buf);
  return stream;
}

TupleStream parse_records(const std::string& text, StreamShape shape) {
  std::istringstream in(text);
  return parse_records(in, shape);
}

SyntheticSpec parse_synthetic(const std::string& text) {
  if (text == "independent") return {SyntheticKind::kIndependent, 0.0};
  if (text == "diagonal") return {SyntheticKind::kDiagonal, 1.0};
  std::string arg;
  if (text.rfind("mixture(", 0) == 0 && text.size() > 9 && text.back() == ')') {
    arg = text.substr(8, text.size() - 9);
  } else if (text.rfind("mixture:", 0) == 0) {
    arg = text.substr(8);
  } else {
    throw ConfigError("unknown synthetic kind '" + text + "' (independent, diagonal, mixture(R))");
  }
  double rho = 0;
  auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), rho);
  if (ec != std::errc() || ptr != arg.data() + arg.size()) throw ConfigError("mixture weight '" + arg + "' is not a number");
  if (!(rho >= 0 && rho <= 1)) throw ConfigError("mixture weight must lie in [0, 1]");
  return {SyntheticKind::kMixture, rho};
}

TupleStream generate_synthetic(const SyntheticSpec& spec, std::size_t k, std::size_t n, std::uint64_t m,
                               std::uint64_t seed) {
  if (m < 1) throw ConfigError("synthetic streams need m >= 1");
  if (!(spec.rho >= 0 && spec.rho <= 1)) throw ConfigError("mixture weight must lie in [0, 1]");
  StreamShape shape{k, n};
  TupleStream stream(shape);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> coord(1, static_cast<std::uint32_t>(n));
  std::bernoulli_distribution diagonal(spec.kind == SyntheticKind::kDiagonal     ? 1.0
                                       : spec.kind == SyntheticKind::kIndependent ? 0.0
                                                                                  : spec.rho);
  std::vector<std::uint32_t> t(k);
  for (std::uint64_t i = 0; i < m; ++i) {
    if (diagonal(rng)) {
      std::fill(t.begin(), t.end(), coord(rng));
    } else {
      for (auto& v : t) v = coord(rng);
    }
    stream.push_back(t);
  }
  return stream;
}

std::pair<std::string, std::string> split_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + text + "' is not KEY=VALUE");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

PipelineConfig pipeline_config(const RunConfig& cfg) {
  PipelineConfig p;
  p.epsilon = cfg.epsilon;
  p.delta = cfg.delta;
  for (const auto& [key, value] : cfg.overrides) p.apply_override(key, value);
  p.validate();
  return p;
}

EstimateReport execute(const RunConfig& cfg, TupleSource& source) {
  const StreamShape shape = source.shape();
  if (cfg.mode == RunMode::kExact) {
    const FrequencyTable table = build_frequency_table(source);
    if (table.m() == 0) throw EmptyStream();
    EstimateReport report;
    report.exact_distance = to_double(exact_statistical_distance(table));
    report.distance_estimate = *report.exact_distance;
    report.m = table.m();
    report.n = shape.n;
    report.k = shape.k;
    report.mode = RunMode::kExact;
    report.seed = cfg.seed;
    report.diagnostics["tensor_l1"] = independence_tensor_l1(table).str();
    return report;
  }

  const PipelineConfig pcfg = pipeline_config(cfg);
  if (cfg.mode == RunMode::kSketch) return independence_distance(source, pcfg, cfg.seed);

  checked_volume(shape.n, shape.k);
  FrequencyTable table(shape);
  TeeSource tee(source, table);
  EstimateReport report = independence_distance(tee, pcfg, cfg.seed);
  report.mode = RunMode::kBoth;
  report.exact_distance = to_double(exact_statistical_distance(table));
  report.diagnostics["tensor_l1"] = independence_tensor_l1(table).str();
  if (*report.exact_distance > 0)
    report.relative_error = std::abs(report.distance_estimate - *report.exact_distance) / *report.exact_distance;
  return report;
}

EstimateReport execute(const RunConfig& cfg) {
  const StreamShape shape{cfg.k, cfg.n};
  shape.validate();
  if (shape.k < 2) throw ConfigError("k must be at least 2");
  if (cfg.generate) {
    const TupleStream stream =
        generate_synthetic(parse_synthetic(*cfg.generate), cfg.k, cfg.n, cfg.m, derive_seed(cfg.seed, SeedRole::kSynthetic));
    auto src = stream.source();
    return execute(cfg, src);
  }
  if (cfg.input == "-") {
    RecordReader reader(std::cin, shape);
    return execute(cfg, reader);
  }
  std::ifstream file(cfg.input);
  if (!file) throw MalformedInput("cannot open input '" + cfg.input + "'");
  RecordReader reader(file, shape);
  return execute(cfg, reader);
}

std::string render(const EstimateReport& report, OutputFormat format) {
  if (format == OutputFormat::kTsv) return report.to_tsv();
  return report.to_json().dump(2) + "\n";
}

int exit_code_for(const Error& e) noexcept { return static_cast<int>(e.category()); }

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    out << render(execute(cfg), cfg.format);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace indep::cli
