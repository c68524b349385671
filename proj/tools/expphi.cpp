// Experiment driver: expphi <command> [--config FILE] [--seed N] [--out-dir DIR]
//                                     [--replicas N] [--threads N] [--set key=value ...]
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "expphi/config.hpp"
#include "expphi/errors.hpp"
#include "expphi/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral experiments for the regularized exponential model on the 2-torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> replicas;
  std::string out_dir = "out";
  int threads = 1;
  std::vector<std::string> overrides;

  for (const auto& name : expphi::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--seed", seed, "master seed (overrides 'seed')");
    sub->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    sub->add_option("--replicas", replicas, "replica count (overrides 'replicas')");
    sub->add_option("--threads", threads, "worker threads; 0 = hardware concurrency")->capture_default_str();
    sub->add_option("--set", overrides, "extra key=value override, repeatable");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : expphi::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    expphi::Config config = config_path.empty() ? expphi::Config{} : expphi::Config::from_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw expphi::ConfigError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) config.set("seed", std::to_string(*seed));
    if (replicas) config.set("replicas", std::to_string(*replicas));

    const auto out = expphi::run_command(command, config, threads);
    expphi::write_outputs(out, out_dir);
    for (const auto& c : out.report.at("criteria")) {
      std::cout << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << "  measured="
                << c.at("measured").dump() << "  (" << c.at("requirement").get<std::string>() << ")\n";
    }
    std::cout << "wrote " << out_dir << "/report.json\n";
    return out.passed() ? expphi::kExitPass : expphi::kExitCriterion;
  } catch (const expphi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return expphi::kExitConfig;
  } catch (const expphi::NumericGuardError& e) {
    std::cerr << "numeric guard: " << e.what() << "\n";
    return expphi::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
