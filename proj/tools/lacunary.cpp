#include <iostream>

#include <CLI11.hpp>

#include "lacunary/cli.hpp"
#include "lacunary/errors.hpp"

int main(int argc, char** argv) {
  using namespace lacunary;
  CLI::App app{"Lacunary canonical products: construction, verification and growth scans"};
  app.require_subcommand(1);

  RunConfig run;
  std::string fault;
  std::string k_range;
  std::string checks;
  for (const char* name : {"construct", "verify", "scan", "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", run.config_path, "JSON configuration")->required();
    sub->add_option("--out", run.out_dir, "output directory");
    sub->add_option("--precision", run.precision, "working precision in decimal digits (overrides the config)");
    sub->add_option("--seed", run.seed, "seed for sample points");
    sub->add_option("--checks", checks, "comma-separated checks for verify/report (default: all)");
    sub->add_option("--scan", run.scan, "order | witness | indicator | H");
    sub->add_option("--inject-fault", fault, "INDEX:DELTA, add DELTA to residue INDEX before verifying");
    sub->add_option("--k", k_range, "LO:HI block range for scans and asymptotic checks");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }
  run.command = app.get_subcommands().front()->get_name();

  try {
    if (!fault.empty()) run.fault = parse_fault(fault);
    if (!checks.empty()) {
      std::string item;
      for (char c : checks + ",") {
        if (c == ',') {
          if (!item.empty()) run.checks.push_back(item);
          item.clear();
        } else {
          item += c;
        }
      }
    }
    if (!k_range.empty()) {
      const auto colon = k_range.find(':');
      if (colon == std::string::npos) throw ConfigError("--k expects LO:HI");
      run.k_range = std::make_pair(std::stoul(k_range.substr(0, colon)), std::stoul(k_range.substr(colon + 1)));
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  }
  return run_command(run, std::cout, std::cerr);
}
