#pragma once

// Driver behind the `lacunary` command: JSON configs in, JSON/JSON-lines/CSV
// reports out, with an exit-code contract
//   0 all checks pass, 1 a check failed, 2 bad configuration,
//   3 the working precision is too low to decide.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lacunary/coefficients.hpp"
#include "lacunary/product.hpp"

namespace lacunary {

enum ExitCode : int { exit_ok = 0, exit_failed = 1, exit_config = 2, exit_precision = 3 };

struct ResidueFault {
  std::size_t index = 0;  ///< pole index in block order
  double delta = 0;
};

struct RunConfig {
  std::string command;  ///< construct | verify | scan | report
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;
  std::optional<unsigned> precision;
  std::uint64_t seed = 1;
  /// Empty selects every check.
  std::vector<std::string> checks;
  std::string scan = "order";
  std::optional<ResidueFault> fault;
  std::optional<std::pair<std::size_t, std::size_t>> k_range;
};

struct ParsedConfig {
  LacunaryConfig cfg;
  CoefficientOptions options;
  unsigned digits = 0;
};
/// ConfigError on malformed JSON, unknown keys or invalid values.
ParsedConfig parse_config(const std::string& json_text, std::optional<unsigned> precision = {});
ParsedConfig load_config(const std::filesystem::path& path, std::optional<unsigned> precision = {});

/// Parses "INDEX:DELTA".
ResidueFault parse_fault(const std::string& text);

struct Record {
  std::string check;
  std::string eq;
  std::optional<std::pair<double, double>> point;
  double value = 0;
  double bound = 0;
  bool pass = false;
  /// Failed with the value at or below the precision floor 10^(-P+10).
  bool precision_limited = false;
};
std::string to_json_line(const Record& r);

struct VerifyOutcome {
  std::vector<Record> records;
  int exit_code = exit_ok;
  std::optional<unsigned> suggested_precision;
};

const std::vector<std::string>& check_names();

/// Individual checks; `sys` must have been built at its own precision.
std::vector<Record> check_residuals(const CoefficientSystem& sys, std::uint64_t seed, std::size_t points = 200);
/// Every zero of blocks with at most 64 zeros, 64 evenly spaced zeros of larger
/// blocks, plus the zero at `extra_pole` when given.
std::vector<Record> check_interpolation(const CoefficientSystem& sys, std::optional<std::size_t> extra_pole = {});
std::vector<Record> check_summability(const CoefficientSystem& sys);
std::vector<Record> check_cauchy(const CoefficientSystem& sys);
/// Blocks k_range (clipped to [2, K]); the last block alone by default.
std::vector<Record> check_asymptotics(const CoefficientSystem& sys, std::uint64_t seed,
                                      std::optional<std::pair<std::size_t, std::size_t>> k_range = {});
std::vector<Record> check_proximity(const CoefficientSystem& sys);
std::vector<Record> check_characteristic(const CoefficientSystem& sys);

/// Exit code and suggested precision from a list of records.
VerifyOutcome classify(std::vector<Record> records, unsigned digits);

VerifyOutcome verify(const ParsedConfig& pc, const RunConfig& run);

/// Full command; never throws. Diagnostics go to `err`.
int run_command(const RunConfig& run, std::ostream& out, std::ostream& err);

}  // namespace lacunary
