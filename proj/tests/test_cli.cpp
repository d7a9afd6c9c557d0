#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "lacunary/cli.hpp"
#include "lacunary/errors.hpp"
#include "oracles.hpp"

using namespace lacunary;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lacunary_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Runs the installed binary; stdout and stderr go to files in `dir`.
int run_binary(const fs::path& dir, const std::string& args) {
  const std::string cmd = std::string(LACUNARY_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

json last_line(const std::string& text) {
  const auto end = text.find_last_not_of('\n');
  const auto begin = text.rfind('\n', end);
  return json::parse(text.substr(begin == std::string::npos ? 0 : begin + 1, end - (begin == std::string::npos ? 0 : begin + 1) + 1));
}

}  // namespace

TEST_CASE("parse_config") {
  SUBCASE("schedule") {
    const auto pc = parse_config(R"({"rho_f": 0.5, "rule": "factorial", "K": 4, "precision_digits": 60})");
    CHECK(pc.digits == 60);
    CHECK(pc.cfg.truncation() == 4);
    CHECK(pc.cfg.rule() == ScheduleRule::factorial);
    CHECK_FALSE(pc.options.rho_H);
  }
  SUBCASE("explicit blocks with strings and perturbation keys") {
    const auto pc = parse_config(
        R"({"blocks": [["4", 2], [16, 4]], "rho_H": 0.4, "H_truncation": 100, "c_scale": 10, "near_zero_delta": 1e-6})",
        80);
    CHECK(pc.digits == 80);
    CHECK(pc.cfg.is_finite_product());
    CHECK(pc.cfg.block(2).radius == 16);
    CHECK(*pc.options.rho_H == 0.4);
    CHECK(pc.options.H_truncation == 100);
    CHECK(pc.options.c_scale == 10);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_config("{bad"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rule": "factorial"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rule": "factorial", "K": 4, "colour": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rule": "factorial", "K": "four"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rule": "zigzag", "K": 4})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"blocks": [[4, 0]]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"blocks": [[4, 2], [3, 2]]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"blocks": [[4, 2]], "rule": "factorial"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rule": "factorial", "K": 4, "precision_digits": 10})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"rule": "factorial", "K": 4, "rho_f": 1.5})"), ConfigError);
  }
  SUBCASE("property: schedules round-trip their parameters") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 12; ++i) {
      const std::size_t K = 1 + rng() % 4;
      const bool fact = rng() % 2;
      const unsigned digits = 30 + rng() % 100;
      json j = {{"rule", fact ? "factorial" : "doubly_exp"}, {"K", K}, {"precision_digits", digits}};
      const auto pc = parse_config(j.dump());
      CHECK(pc.cfg.truncation() == K);
      CHECK(pc.digits == digits);
      CHECK(pc.cfg.rule() == (fact ? ScheduleRule::factorial : ScheduleRule::doubly_exp));
    }
  }
}

TEST_CASE("parse_fault") {
  const auto f = parse_fault("12:1e-3");
  CHECK(f.index == 12);
  CHECK(f.delta == 1e-3);
  CHECK_THROWS_AS(parse_fault("12"), ConfigError);
  CHECK_THROWS_AS(parse_fault("x:1"), ConfigError);
  CHECK_THROWS_AS(parse_fault("3:0.1y"), ConfigError);
}

TEST_CASE("classify") {
  WorkingPrecision p(40);
  Record ok{"a", "", std::nullopt, 1e-50, 1e-40, true, false};
  Record numeric{"b", "", std::nullopt, 1e-35, 1e-40, false, true};
  Record wrong{"c", "", std::nullopt, 1e-3, 1e-40, false, false};
  CHECK(classify({ok}, 40).exit_code == exit_ok);
  const auto v = classify({ok, numeric}, 40);
  CHECK(v.exit_code == exit_precision);
  REQUIRE(v.suggested_precision);
  CHECK(*v.suggested_precision == 55);
  CHECK(classify({numeric, wrong}, 40).exit_code == exit_failed);
}

TEST_CASE("json lines") {
  Record r{"residual", "f'' + A0 f' + B0 f = 0", std::make_pair(1.5, -2.0), 3e-101, 1e-40, true, false};
  const auto j = json::parse(to_json_line(r));
  CHECK(j["check"] == "residual");
  CHECK(j["eq"] == "f'' + A0 f' + B0 f = 0");
  CHECK(j["point"][0] == 1.5);
  CHECK(j["point"][1] == -2.0);
  CHECK(j["value"] == 3e-101);
  CHECK(j["pass"] == true);
  r.bound = std::numeric_limits<double>::infinity();
  r.point.reset();
  const auto k = json::parse(to_json_line(r));
  CHECK(k["bound"] == "inf");
  CHECK(k["point"].is_null());
}

TEST_CASE("binary: construct") {
  const auto dir = scratch("construct");
  SUBCASE("zeros of factorial K = 3") {
    const auto cfg = write_config(dir, R"({"rule": "factorial", "K": 3, "precision_digits": 50})");
    CHECK(run_binary(dir, "construct --config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
    const auto zs = json::parse(slurp(dir / "out" / "zeros.json"));
    CHECK(zs.size() == 11);
    const auto sys = json::parse(slurp(dir / "out" / "system.json"));
    CHECK(sys["K"] == 3);
    CHECK(sys["summability"]["pass"] == true);
  }
  SUBCASE("residues of 1 - z^2") {
    const auto cfg = write_config(dir, R"({"blocks": [[1, 2]]})");
    CHECK(run_binary(dir, "construct --config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
    const auto res = json::parse(slurp(dir / "out" / "residues.json"));
    REQUIRE(res.size() == 2);
    for (const auto& r : res) {
      WorkingPrecision p(100);
      CHECK(parse_real(r["u"][0].get<std::string>()) == Real("0.5"));
      CHECK(parse_real(r["u"][1].get<std::string>()) == 0);
    }
  }
  SUBCASE("malformed JSON") {
    const auto cfg = write_config(dir, "{\"rule\": ");
    CHECK(run_binary(dir, "construct --config " + cfg.string() + " --out " + (dir / "out").string()) == 2);
    CHECK(slurp(dir / "stderr.txt").find("malformed JSON") != std::string::npos);
  }
  SUBCASE("usage errors") {
    const auto cfg = write_config(dir, R"({"blocks": [[1, 2]]})");
    CHECK(run_binary(dir, "construct --config " + cfg.string()) == 2);
    CHECK(run_binary(dir, "verify --config " + cfg.string() + " --checks bogus") == 2);
    CHECK(run_binary(dir, "verify --config " + cfg.string() + " --inject-fault 7") == 2);
    CHECK(run_binary(dir, "verify --config " + (dir / "missing.json").string()) == 2);
    CHECK(run_binary(dir, "frobnicate --config " + cfg.string()) == 2);
  }
}

TEST_CASE("binary: verify") {
  const auto dir = scratch("verify");
  SUBCASE("1 - z^2 passes everything") {
    const auto cfg = write_config(dir, R"({"blocks": [[1, 2]], "precision_digits": 60})");
    CHECK(run_binary(dir, "verify --config " + cfg.string()) == 0);
    const std::string out = slurp(dir / "stdout.txt");
    const auto summary = last_line(out);
    CHECK(summary["exit"] == 0);
    // every record carries the identity it checks
    std::istringstream lines(out);
    std::string line;
    while (std::getline(lines, line)) {
      const auto j = json::parse(line);
      if (j["check"] != "summary") CHECK_FALSE(j["eq"].get<std::string>().empty());
    }
  }
  SUBCASE("corrupted residue fails the interpolation identity") {
    const auto cfg = write_config(dir, R"({"blocks": [[1, 2]], "precision_digits": 60})");
    CHECK(run_binary(dir, "verify --config " + cfg.string() + " --inject-fault 0:0.1") == 1);
    std::istringstream lines(slurp(dir / "stdout.txt"));
    std::string line;
    int failed_interp = 0;
    while (std::getline(lines, line)) {
      const auto j = json::parse(line);
      if (j["check"] == "interpolation" && j["pass"] == false) ++failed_interp;
    }
    CHECK(failed_interp == 1);
  }
  SUBCASE("30 digits are not enough for factorial K = 4") {
    const auto cfg = write_config(dir, R"({"rule": "factorial", "K": 4})");
    CHECK(run_binary(dir, "verify --config " + cfg.string() + " --precision 30 --checks interpolation,residual") == 3);
    const auto summary = last_line(slurp(dir / "stdout.txt"));
    CHECK(summary["suggested_precision"] == 55);
    CHECK(slurp(dir / "stderr.txt").find("--precision 55") != std::string::npos);
  }
  SUBCASE("same seed, same bytes") {
    const auto cfg = write_config(dir, R"({"rule": "factorial", "K": 3, "rho_H": 0.4})");
    const std::string args = "verify --config " + cfg.string() + " --seed 9 --checks residual,cauchy,asymptotics --out ";
    CHECK(run_binary(dir, args + (dir / "a").string()) == 0);
    CHECK(run_binary(dir, args + (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "verify.jsonl") == slurp(dir / "b" / "verify.jsonl"));
    CHECK(run_binary(dir, "verify --config " + cfg.string() + " --seed 10 --checks residual --out " +
                              (dir / "c").string()) == 0);
    CHECK(slurp(dir / "a" / "verify.jsonl").substr(0, 300) != slurp(dir / "c" / "verify.jsonl").substr(0, 300));
  }
}

TEST_CASE("binary: scans") {
  const auto dir = scratch("scan");
  SUBCASE("witness for factorial K = 7") {
    const auto cfg = write_config(dir, R"({"rule": "factorial", "K": 7})");
    CHECK(run_binary(dir, "scan --scan witness --config " + cfg.string() + " --out " + (dir / "o").string()) == 0);
    const auto s = json::parse(slurp(dir / "o" / "witness_summary.json"));
    CHECK(s["verdict"] == "violation");
    const std::string csv = slurp(dir / "o" / "witness.csv");
    CHECK(csv.rfind("r,theta,log_abs_f,ratio,excluded,pass\n", 0) == 0);
  }
  SUBCASE("witness for a single block") {
    const auto cfg = write_config(dir, R"({"blocks": [[16, 4]]})");
    CHECK(run_binary(dir, "scan --scan witness --config " + cfg.string() + " --out " + (dir / "o").string()) == 0);
    CHECK(json::parse(slurp(dir / "o" / "witness_summary.json"))["verdict"] == "no violation");
  }
  SUBCASE("order scan") {
    const auto cfg = write_config(dir, R"({"rule": "factorial", "K": 4})");
    CHECK(run_binary(dir, "scan --scan order --k 4:6 --config " + cfg.string() + " --out " + (dir / "o").string()) == 0);
    const auto s = json::parse(slurp(dir / "o" / "order_summary.json"));
    CHECK(s["dips_decreasing"] == true);
    CHECK(s["max_peak_ratio"].get<double>() > 0.4);
  }
  SUBCASE("indicator of H") {
    const auto cfg = write_config(dir, R"({"blocks": [[16, 4]], "rho_H": 0.25, "precision_digits": 40})");
    CHECK(run_binary(dir, "scan --scan H --config " + cfg.string() + " --out " + (dir / "o").string()) == 0);
    const auto s = json::parse(slurp(dir / "o" / "H_summary.json"));
    CHECK(s["min_ratio"].get<double>() > 0);
    CHECK(s["budget_ok"] == true);
  }
  SUBCASE("scan needs an output directory") {
    const auto cfg = write_config(dir, R"({"rule": "factorial", "K": 4})");
    CHECK(run_binary(dir, "scan --scan order --config " + cfg.string()) == 2);
    CHECK(run_binary(dir, "scan --scan spiral --config " + cfg.string() + " --out " + (dir / "o").string()) == 2);
  }
}

TEST_CASE("binary: report") {
  const auto dir = scratch("report");
  const auto cfg = write_config(dir, R"({"rule": "factorial", "K": 3, "precision_digits": 60})");
  CHECK(run_binary(dir, "report --config " + cfg.string() + " --out " + (dir / "o").string()) == 0);
  const auto rep = json::parse(slurp(dir / "o" / "report.json"));
  REQUIRE(rep["samples"].size() == 3);
  double previous_N = -1;
  for (const auto& s : rep["samples"]) {
    CHECK(s["m"].get<double>() >= 0);
    CHECK(s["N"].get<double>() >= previous_N);
    previous_N = s["N"].get<double>();
    CHECK(std::abs(s["T"].get<double>() - s["m"].get<double>() - s["N"].get<double>()) < 2e-6);
  }
  CHECK(rep["pass_flags"]["verify"] == true);
  for (const char* f : {"zeros.json", "residues.json", "system.json", "verify.jsonl", "order.csv", "witness.csv",
                        "indicator.csv"}) {
    CHECK(fs::exists(dir / "o" / f));
  }
}
