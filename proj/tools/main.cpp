#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  using indep::cli::OutputFormat;
  indep::cli::RunConfig cfg;
  std::string mode = "both";
  std::string format = "json";
  std::vector<std::string> overrides;

  CLI::App app{"Estimate the statistical distance between the joint distribution of a stream of k-tuples and the "
               "product of its margins."};
  app.add_option("--input", cfg.input, "Record file, '-' for standard input")->capture_default_str();
  app.add_option("--k", cfg.k, "Tuple arity")->capture_default_str();
  app.add_option("--n", cfg.n, "Domain size per coordinate")->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "Target relative error")->capture_default_str();
  app.add_option("--delta", cfg.delta, "Target failure probability")->capture_default_str();
  app.add_option("--mode", mode, "exact, sketch or both")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for all estimator randomness")->capture_default_str();
  app.add_option("--format", format, "json or tsv")->capture_default_str();
  app.add_option("--override", overrides, "Estimator override KEY=VALUE (repeatable)");
  app.add_option("--generate", cfg.generate, "Synthetic input: independent, diagonal or mixture(R)");
  app.add_option("--m", cfg.m, "Tuple count for --generate")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.mode = indep::parse_run_mode(mode);
    if (format == "json") {
      cfg.format = OutputFormat::kJson;
    } else if (format == "tsv") {
      cfg.format = OutputFormat::kTsv;
    } else {
      throw indep::ConfigError("format must be json or tsv");
    }
    for (const auto& o : overrides) cfg.overrides.push_back(indep::cli::split_override(o));
  } catch (const indep::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return indep::cli::exit_code_for(e);
  }
  return indep::cli::run(cfg, std::cout, std::cerr);
}
