#include "lacunary/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lacunary/errors.hpp"
#include "lacunary/growth.hpp"
#include "lacunary/interpolation.hpp"

namespace lacunary {

namespace mp = boost::multiprecision;
using nlohmann::json;

namespace {

// Fixed targets for the identity checks; independent of P so that a low
// precision shows up as "cannot decide" rather than as a looser pass.
constexpr double kTarget = 1e-40;
constexpr double kAgreement = 1e-20;

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double precision_floor() { return std::pow(10.0, -double(working_digits()) + 10); }

Record make_record(std::string check, std::string eq, std::optional<PrecComplex> z, const Real& value,
                   double bound, bool pass) {
  Record r;
  r.check = std::move(check);
  r.eq = std::move(eq);
  if (z) r.point = std::make_pair(to_double(z->re()), to_double(z->im()));
  r.value = to_double(value);
  r.bound = bound;
  r.pass = pass;
  r.precision_limited = !pass && r.value <= precision_floor();
  return r;
}

Record threshold_record(std::string check, std::string eq, std::optional<PrecComplex> z, const Real& value,
                        double bound) {
  return make_record(std::move(check), std::move(eq), z, value, bound, value < Real(bound));
}

json real_pair(const PrecComplex& z, int digits) {
  return json::array({to_string(z.re(), digits), to_string(z.im(), digits)});
}

Real json_real(const json& v, const char* what) {
  if (v.is_number()) {
    // integers exactly, floats through their shortest decimal form
    if (v.is_number_integer()) return Real(v.get<long long>());
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return parse_real(os.str());
  }
  if (v.is_string()) return parse_real(v.get<std::string>());
  throw ConfigError(std::string(what) + " must be a number or a decimal string");
}

std::size_t default_k_lo(const LacunaryConfig& cfg) { return cfg.is_finite_product() ? 1 : 4; }
std::size_t default_k_hi(const LacunaryConfig& cfg) {
  return cfg.is_finite_product() ? cfg.truncation() : std::max<std::size_t>(7, cfg.truncation());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

const std::filesystem::path& need_out(const RunConfig& run) {
  if (!run.out_dir) throw ConfigError(run.command + " needs --out");
  std::filesystem::create_directories(*run.out_dir);
  return *run.out_dir;
}

std::string csv_row(const Real& r, const Real& theta, const Real& log_abs, const Real& ratio, bool excluded,
                    bool pass) {
  std::ostringstream os;
  os << to_string(r, 20) << ',' << to_string(theta, 20) << ',' << to_string(log_abs, 20) << ','
     << to_string(ratio, 20) << ',' << (excluded ? "true" : "false") << ',' << (pass ? "true" : "false") << '\n';
  return os.str();
}

constexpr const char* kCsvHeader = "r,theta,log_abs_f,ratio,excluded,pass\n";

struct ScanOutput {
  std::string csv;
  json summary;
  bool pass = true;
};

ScanOutput scan_order(const ParsedConfig& pc, std::size_t lo, std::size_t hi) {
  const auto scan = order_scan(pc.cfg, lo, hi);
  ScanOutput out;
  out.csv = kCsvHeader;
  Real previous_dip = -1;
  for (const auto& s : scan.samples) {
    bool pass = true;
    if (s.kind == RadiusKind::peak) {
      pass = s.ratio >= Real(0.4) && s.ratio <= Real(0.7);
    } else {
      pass = previous_dip < 0 || s.ratio < previous_dip;
      previous_dip = s.ratio;
    }
    out.pass = out.pass && pass;
    out.csv += csv_row(mp::exp(s.log_r), 0, s.log_M.upper, s.ratio, false, pass);
  }
  out.summary = {{"scan", "order"},
                 {"k_range", {lo, hi}},
                 {"max_peak_ratio", to_double(scan.max_peak)},
                 {"min_dip_ratio", to_double(scan.min_dip)},
                 {"dips_decreasing", scan.dips_decreasing},
                 {"peaks_approach_rho", scan.peaks_approach_rho},
                 {"pass", out.pass}};
  return out;
}

ScanOutput scan_witness(const ParsedConfig& pc, std::size_t lo, std::size_t hi) {
  const Real rho = pc.cfg.rho();
  const auto w = crg_witness(pc.cfg, pc.cfg.rho_double(), lo, hi);
  ScanOutput out;
  out.csv = kCsvHeader;
  json a = json::array(), b = json::array();
  for (std::size_t i = 0; i < w.ks.size(); ++i) {
    const Block blk = *pc.cfg.extended_block(w.ks[i]);
    out.csv += csv_row(blk.radius, 0, w.a[i] * mp::exp(rho * blk.log_radius), w.a[i], false, true);
    out.csv += csv_row(blk.radius * mp::exp(Real(1)), 0, w.b[i] * mp::exp(rho * (blk.log_radius + 1)), w.b[i],
                       false, true);
    a.push_back(to_string(w.a[i], 17));
    b.push_back(to_string(w.b[i], 17));
  }
  out.summary = {{"scan", "witness"},         {"k_range", {lo, hi}},
                 {"a", a},                     {"b", b},
                 {"verdict", w.violation ? "violation" : "no violation"},
                 {"reason", w.reason}};
  return out;
}

ScanOutput scan_indicator(const ParsedConfig& pc, std::size_t lo, std::size_t hi) {
  const auto& cfg = pc.cfg;
  std::vector<Real> thetas;
  for (int j = 0; j < 360; ++j) thetas.push_back(two_pi() * Real(j) / 360 - pi_value());
  std::vector<Real> radii;
  for (std::size_t k = lo; k <= hi; ++k) {
    const auto b = cfg.extended_block(k);
    if (!b) break;
    radii.push_back(b->radius);
    radii.push_back(b->radius * mp::exp(Real(1)));
  }
  const ExclusionModel model(zero_families(cfg, hi + 1));
  const auto scan = indicator_scan([&](const PrecComplex& z) { return eval_f_formula(cfg, z).logmag; },
                                   cfg.rho_double(), thetas, radii, model);
  return [&] {
    ScanOutput out;
    out.csv = kCsvHeader;
    for (const auto& s : scan.samples) out.csv += csv_row(s.r, s.theta, s.log_abs, s.ratio, s.excluded, true);
    out.pass = scan.budget_ok;
    json budget = json::array();
    for (const auto& [r, share] : scan.budget) budget.push_back({to_string(r, 10), to_double(share)});
    out.summary = {{"scan", "indicator"},
                   {"budget", budget},
                   {"budget_ok", scan.budget_ok},
                   {"min_ratio", scan.min_ratio ? json(to_double(*scan.min_ratio)) : json(nullptr)},
                   {"pass", out.pass}};
    return out;
  }();
}

ScanOutput scan_H(const ParsedConfig& pc) {
  const double rho_H = pc.options.rho_H.value_or(0.25);
  const auto h = build_H(rho_H, std::max<std::uint64_t>(pc.options.H_truncation, 10000));
  std::vector<Real> thetas;
  for (int j = 0; j < 360; ++j) thetas.push_back(two_pi() * Real(j) / 360 - pi_value());
  const auto scan = indicator_scan([&](const PrecComplex& z) { return h.log_value(z).logmag; }, rho_H, thetas,
                                   {Real(1e6)}, ExclusionModel(zero_families(h)));
  ScanOutput out;
  out.csv = kCsvHeader;
  bool positive = true;
  for (const auto& s : scan.samples) {
    const bool pass = s.excluded || s.ratio > 0;
    positive = positive && pass;
    out.csv += csv_row(s.r, s.theta, s.log_abs, s.ratio, s.excluded, pass);
  }
  out.pass = positive && scan.budget_ok;
  out.summary = {{"scan", "H"},
                 {"rho_H", rho_H},
                 {"min_ratio", scan.min_ratio ? json(to_double(*scan.min_ratio)) : json(nullptr)},
                 {"all_positive", positive},
                 {"budget_ok", scan.budget_ok},
                 {"pass", out.pass}};
  return out;
}

ScanOutput run_scan(const ParsedConfig& pc, const RunConfig& run, const std::string& type) {
  const std::size_t lo = run.k_range ? run.k_range->first : default_k_lo(pc.cfg);
  const std::size_t hi = run.k_range ? run.k_range->second : default_k_hi(pc.cfg);
  if (type == "order") return scan_order(pc, lo, hi);
  if (type == "witness") return scan_witness(pc, lo, hi);
  if (type == "indicator") return scan_indicator(pc, lo, hi);
  if (type == "H") return scan_H(pc);
  throw ConfigError("unknown scan type '" + type + "' (order, witness, indicator, H)");
}

CoefficientSystem build_system(const ParsedConfig& pc, const RunConfig& run) {
  CoefficientSystem sys(pc.cfg, pc.options);
  if (run.fault) {
    if (run.fault->index >= sys.rat().poles().size()) throw ConfigError("fault index past the last residue");
    sys = sys.with_residue_offset(run.fault->index, PrecComplex(run.fault->delta));
  }
  return sys;
}

int cmd_construct(const ParsedConfig& pc, const RunConfig& run) {
  const auto& out = need_out(run);
  const CoefficientSystem sys(pc.cfg, pc.options);
  const int digits = static_cast<int>(pc.digits);

  json zs = json::array();
  for (std::size_t k = 1; k <= pc.cfg.truncation(); ++k) {
    for (const auto& z : zeros(pc.cfg, k)) zs.push_back({{"block", z.block}, {"index", z.index}, {"z", real_pair(z.value, digits)}});
  }
  json res = json::array();
  for (const auto& p : sys.rat().poles()) {
    res.push_back({{"block", p.block}, {"index", p.index}, {"z", real_pair(p.z, digits)}, {"u", real_pair(p.u, digits)}});
  }
  json blocks = json::array();
  for (const auto& b : pc.cfg.blocks()) blocks.push_back({to_string(b.radius, digits), to_string(b.count, digits)});
  const auto summ = [&]() -> json {
    try {
      const auto rep = check_summability(sys.rat());
      return {{"partial", to_string(rep.partial, 20)}, {"tail_bound", to_string(rep.tail_bound, 20)},
              {"total", to_string(rep.total, 20)}, {"pass", rep.pass}};
    } catch (const DivergenceFlag& e) {
      return {{"diverges", e.what()}};
    }
  }();
  json system = {
      {"rule", to_string(pc.cfg.rule())},
      {"rho_f", pc.cfg.rho_double()},
      {"K", pc.cfg.truncation()},
      {"precision_digits", pc.digits},
      {"blocks", blocks},
      {"certified_radius", to_string(sys.certified_radius(), 20)},
      {"sigma_certificate", to_string(pc.cfg.sigma_certificate(), 20)},
      {"sigma_tail", to_string(pc.cfg.sigma_tail(), 20)},
      {"residue_bound", to_string(sys.rat().c_bound(), 20)},
      {"summability", summ},
      {"c_scale", pc.options.c_scale},
      {"near_zero_delta", pc.options.near_zero_delta},
  };
  if (sys.H()) {
    system["H"] = {{"rho_H", sys.H()->rho()},
                   {"truncation", sys.H()->truncation()},
                   {"validity_radius", to_string(sys.H()->validity_radius(), 20)},
                   {"premise_rho_H_above_rho_f", sys.premise_holds()}};
  }
  write_file(out / "zeros.json", zs.dump(1) + "\n");
  write_file(out / "residues.json", res.dump(1) + "\n");
  write_file(out / "system.json", system.dump(1) + "\n");
  return exit_ok;
}

int finish_verify(const VerifyOutcome& v, std::ostream& sink, std::ostream& err) {
  for (const auto& r : v.records) sink << to_json_line(r) << '\n';
  json summary = {{"check", "summary"},
                  {"records", v.records.size()},
                  {"failed", std::count_if(v.records.begin(), v.records.end(), [](const Record& r) { return !r.pass; })},
                  {"exit", v.exit_code}};
  if (v.suggested_precision) summary["suggested_precision"] = *v.suggested_precision;
  sink << summary.dump() << '\n';
  if (v.exit_code == exit_precision) {
    err << "precision too low to decide";
    if (v.suggested_precision) err << "; rerun with --precision " << *v.suggested_precision;
    err << '\n';
  }
  return v.exit_code;
}

}  // namespace

ParsedConfig parse_config(const std::string& json_text, std::optional<unsigned> precision) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known = {"rho_f",  "rule",       "K",       "precision_digits",
                                                 "blocks", "rho_H",      "H_truncation", "c_scale",
                                                 "near_zero_delta"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    unsigned digits = j.value("precision_digits", kDefaultDigits);
    if (precision) digits = *precision;
    WorkingPrecision prec(digits);
    const double rho = j.value("rho_f", 0.5);
    const std::string rule = j.value("rule", j.contains("blocks") ? std::string("explicit") : std::string("factorial"));

    std::optional<LacunaryConfig> cfg;
    if (rule == "explicit" || j.contains("blocks")) {
      if (!j.contains("blocks") || !j["blocks"].is_array()) throw ConfigError("explicit configs need a blocks list");
      if (rule != "explicit") throw ConfigError("blocks given together with rule '" + rule + "'");
      std::vector<std::pair<Real, std::uint64_t>> blocks;
      for (const auto& b : j["blocks"]) {
        if (!b.is_array() || b.size() != 2 || !b[1].is_number_integer() || b[1].get<long long>() < 1) {
          throw ConfigError("each block must be [r_k, n_k] with a positive integer n_k");
        }
        blocks.emplace_back(json_real(b[0], "r_k"), b[1].get<std::uint64_t>());
      }
      cfg = LacunaryConfig::explicit_blocks(blocks, rho, digits);
      if (j.contains("K") && j["K"].get<std::size_t>() != blocks.size()) {
        throw ConfigError("K disagrees with the number of blocks");
      }
    } else {
      if (!j.contains("K")) throw ConfigError("schedule configs need K");
      const auto K = j["K"].get<long long>();
      if (K < 1) throw ConfigError("K must be at least 1");
      cfg = LacunaryConfig::schedule(rho, static_cast<std::size_t>(K), parse_schedule_rule(rule), digits);
    }

    CoefficientOptions opts;
    if (j.contains("rho_H")) opts.rho_H = j["rho_H"].get<double>();
    opts.H_truncation = j.value("H_truncation", opts.H_truncation);
    opts.c_scale = j.value("c_scale", opts.c_scale);
    opts.near_zero_delta = j.value("near_zero_delta", opts.near_zero_delta);
    return ParsedConfig{*cfg, opts, digits};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

ParsedConfig load_config(const std::filesystem::path& path, std::optional<unsigned> precision) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), precision);
}

ResidueFault parse_fault(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("fault must be INDEX:DELTA");
  try {
    std::size_t used = 0;
    ResidueFault f;
    f.index = std::stoull(text.substr(0, colon), &used);
    if (used != colon) throw ConfigError("bad fault index");
    const std::string d = text.substr(colon + 1);
    f.delta = std::stod(d, &used);
    if (used != d.size()) throw ConfigError("bad fault delta");
    return f;
  } catch (const std::logic_error&) {
    throw ConfigError("fault must be INDEX:DELTA");
  }
}

std::string to_json_line(const Record& r) {
  json j = {{"check", r.check}, {"eq", r.eq}};
  j["point"] = r.point ? json::array({r.point->first, r.point->second}) : json(nullptr);
  j["value"] = std::isfinite(r.value) ? json(r.value) : json(std::isnan(r.value) ? "nan" : r.value > 0 ? "inf" : "-inf");
  j["bound"] = std::isfinite(r.bound) ? json(r.bound) : json(r.bound > 0 ? "inf" : "-inf");
  j["pass"] = r.pass;
  return j.dump();
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"residual",   "interpolation", "summability",   "cauchy",
                                                 "asymptotics", "proximity",    "characteristic"};
  return names;
}

std::vector<Record> check_residuals(const CoefficientSystem& sys, std::uint64_t seed, std::size_t points) {
  const auto& cfg = sys.cfg();
  Real R = cfg.block(std::min<std::size_t>(3, cfg.truncation())).radius;
  const Real cert = sys.certified_radius() / 2;
  if (cert < R) R = cert;
  const Real inner = R / 100;
  const ExclusionModel avoid(zero_families(cfg, cfg.truncation()));
  std::mt19937_64 rng(seed);
  std::vector<Record> out;
  for (std::size_t i = 0; i < points; ++i) {
    PrecComplex z;
    do {
      // uniform by area in inner <= |z| <= R
      const Real rad = mp::sqrt(inner * inner + (R * R - inner * inner) * Real(unit(rng)));
      z = PrecComplex::polar(rad, two_pi() * Real(unit(rng)));
    } while (avoid.excluded(z));
    out.push_back(threshold_record("residual", "f'' + A0 f' + B0 f = 0", z, residual(sys, z, Equation::base), kTarget));
    if (sys.H()) {
      out.push_back(threshold_record("residual_perturbed", "f'' + (A0 + cHf) f' + (B0 - cHf') f = 0", z,
                                     residual(sys, z, Equation::perturbed), kTarget));
    }
  }
  return out;
}

std::vector<Record> check_interpolation(const CoefficientSystem& sys, std::optional<std::size_t> extra_pole) {
  const auto& cfg = sys.cfg();
  std::vector<Zero> picked;
  for (std::size_t k = 1; k <= cfg.truncation(); ++k) {
    const std::uint64_t n = cfg.zero_count(k);
    const std::uint64_t stride = n <= 64 ? 1 : n / 64;
    for (std::uint64_t j = 0; j < n && (n <= 64 || j < 64 * stride); j += stride) picked.push_back(zero_at(cfg, k, j));
  }
  if (extra_pole) {
    const auto& p = sys.rat().poles().at(*extra_pole);
    const bool seen = std::any_of(picked.begin(), picked.end(),
                                  [&](const Zero& z) { return z.block == p.block && z.index == p.index; });
    if (!seen) picked.push_back(zero_at(cfg, p.block, p.index));
  }
  std::vector<Record> out;
  for (const auto& z : picked) {
    out.push_back(threshold_record("interpolation", "A0 f' + f'' = 0 at zeros", z.value, interpolation_defect(sys, z),
                                   kTarget));
  }
  return out;
}

std::vector<Record> check_summability(const CoefficientSystem& sys) {
  try {
    const auto rep = lacunary::check_summability(sys.rat());
    Record r = make_record("summability", "sum |u_k/z_k| < inf", std::nullopt, rep.total,
                           std::numeric_limits<double>::infinity(), rep.pass);
    r.precision_limited = false;
    return {r};
  } catch (const DivergenceFlag& e) {
    Record r = make_record("summability", "sum |u_k/z_k| < inf", std::nullopt, Real(e.exponent()), 1.0, false);
    r.precision_limited = false;
    return {r};
  }
}

std::vector<Record> check_cauchy(const CoefficientSystem& sys) {
  const auto& cfg = sys.cfg();
  std::vector<Record> out;
  std::vector<Real> ratios;
  for (std::size_t k = 2; k <= cfg.truncation(); ++k) {
    const Zero xi = zero_at(cfg, k, 0);
    const auto c = cauchy_ratio(cfg, xi);
    const Real ratio = c.direct.abs();
    ratios.push_back(ratio);
    const Real bound = mp::exp(log_cauchy_bound(cfg, k));
    out.push_back(make_record("cauchy_bound", "|f''/f'^2| <= 2e prod_{j<k} (r_j/r_k)^{n_j}", xi.value, ratio,
                              to_double(bound), ratio <= bound));
    out.back().precision_limited = false;
    // the contour estimate needs a disk free of zeros of f'
    if (c.enclosed == 0) {
      out.push_back(make_record("cauchy_contour_bound", "|f''/f'^2| <= (n_k/r_k) max 1/|f'| on the disk",
                                xi.value, ratio, to_double(c.contour_bound), ratio <= c.contour_bound));
      out.back().precision_limited = false;
    }
    const Real agreement = (c.contour_corrected - c.direct).abs() / ratio;
    out.push_back(threshold_record("cauchy_agreement", "contour integral = f''/f'^2", xi.value, agreement, kAgreement));
  }
  if (ratios.size() >= 2) {
    bool decreasing = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) decreasing = decreasing && ratios[i] < ratios[i - 1];
    Record r = make_record("cauchy_monotone", "|f''/f'^2| decreasing in k", std::nullopt, ratios.back(),
                           to_double(ratios.front()), decreasing);
    r.precision_limited = false;
    out.push_back(r);
  }
  return out;
}

std::vector<Record> check_asymptotics(const CoefficientSystem& sys, std::uint64_t seed,
                                      std::optional<std::pair<std::size_t, std::size_t>> k_range) {
  const auto& cfg = sys.cfg();
  std::vector<Record> out;
  if (cfg.truncation() < 2) return out;
  const std::size_t lo = k_range ? std::max<std::size_t>(2, k_range->first) : cfg.truncation();
  const std::size_t hi = k_range ? std::min(cfg.truncation(), k_range->second) : cfg.truncation();
  static const char* eqs[] = {"f ~ prod_{j<=k} (1 - (z/r_j)^{n_j})", "zf'/f ~ sum_{j<k} n_j + n_k w/(w - 1)",
                              "|f'| = |f| |zf'/f| / |z|", "no zero of f' in |z - xi| <= r_k/n_k"};
  for (std::size_t k = lo; k <= hi; ++k) {
    const auto rep = verify_asymptotics(cfg, k, seed);
    for (std::size_t i = 0; i < rep.checks.size(); ++i) {
      const auto& c = rep.checks[i];
      std::string name = c.name;
      std::replace(name.begin(), name.end(), ' ', '_');
      Record r = make_record("asymptotics_k" + std::to_string(k) + "_" + name, eqs[i], std::nullopt, c.value,
                             to_double(c.bound), c.pass);
      r.precision_limited = false;
      out.push_back(r);
    }
  }
  return out;
}

std::vector<Record> check_proximity(const CoefficientSystem& sys) {
  const Real rK = sys.cfg().block(sys.cfg().truncation()).radius;
  std::vector<Record> out;
  double previous = std::numeric_limits<double>::infinity();
  for (int scale : {10, 100, 1000}) {
    const double m = proximity_m(sys.rat(), rK * scale).value;
    const bool last = scale == 1000;
    const double bound = last ? std::min(previous, 0.01) : previous;
    Record r = make_record("proximity", "m(r, g) -> 0", PrecComplex(rK * scale), Real(m), bound,
                           m <= previous && (!last || m < 0.01));
    r.precision_limited = false;
    out.push_back(r);
    previous = m;
  }
  return out;
}

std::vector<Record> check_characteristic(const CoefficientSystem& sys) {
  const Real r = sys.cfg().block(sys.cfg().truncation()).radius * 100;
  const auto nv = nevanlinna(sys.rat(), r);
  Record rec = make_record("characteristic", "T(r, g) = N(r, g) + o(1)", PrecComplex(r), Real(std::abs(nv.T - to_double(nv.N))),
                           0.05, std::abs(nv.T - to_double(nv.N)) < 0.05);
  rec.precision_limited = false;
  return {rec};
}

VerifyOutcome classify(std::vector<Record> records, unsigned digits) {
  VerifyOutcome v;
  bool failed = false;
  std::optional<double> tightest;
  for (const auto& r : records) {
    if (r.pass) continue;
    if (r.precision_limited) {
      if (!tightest || r.bound < *tightest) tightest = r.bound;
    } else {
      failed = true;
    }
  }
  v.records = std::move(records);
  if (failed) {
    v.exit_code = exit_failed;
  } else if (tightest) {
    v.exit_code = exit_precision;
    v.suggested_precision = std::max(digits + 10, static_cast<unsigned>(std::ceil(-std::log10(*tightest))) + 15);
  }
  return v;
}

VerifyOutcome verify(const ParsedConfig& pc, const RunConfig& run) {
  WorkingPrecision prec(pc.digits);
  std::vector<std::string> checks = run.checks.empty() ? check_names() : run.checks;
  for (const auto& c : checks) {
    if (std::find(check_names().begin(), check_names().end(), c) == check_names().end()) {
      throw ConfigError("unknown check '" + c + "'");
    }
  }
  std::vector<Record> records;
  auto add = [&](std::vector<Record> more) { records.insert(records.end(), more.begin(), more.end()); };
  std::optional<unsigned> numeric_failure;
  try {
    const CoefficientSystem sys = build_system(pc, run);
    const auto extra = run.fault ? std::optional<std::size_t>(run.fault->index) : std::nullopt;
    for (const auto& c : checks) {
      if (c == "residual") add(check_residuals(sys, run.seed));
      if (c == "interpolation") add(check_interpolation(sys, extra));
      if (c == "summability") add(check_summability(sys));
      if (c == "cauchy") add(check_cauchy(sys));
      if (c == "asymptotics") add(check_asymptotics(sys, run.seed, run.k_range));
      if (c == "proximity") add(check_proximity(sys));
      if (c == "characteristic") add(check_characteristic(sys));
    }
  } catch (const CancellationError& e) {
    numeric_failure = pc.digits + static_cast<unsigned>(std::ceil(e.digits_lost())) + 10;
    records.push_back(make_record("numerics", std::string("cancellation: ") + e.what(), std::nullopt, Real(0), 0, false));
  } catch (const ZeroOnContourError& e) {
    numeric_failure = pc.digits * 2;
    records.push_back(make_record("numerics", e.what(), std::nullopt, Real(0), 0, false));
  } catch (const NearZeroError& e) {
    numeric_failure = pc.digits * 2;
    records.push_back(make_record("numerics", e.what(), std::nullopt, Real(0), 0, false));
  }
  auto v = classify(std::move(records), pc.digits);
  if (numeric_failure && v.exit_code != exit_failed) {
    v.exit_code = exit_precision;
    v.suggested_precision = std::max(v.suggested_precision.value_or(0), *numeric_failure);
  }
  return v;
}

int run_command(const RunConfig& run, std::ostream& out, std::ostream& err) {
  try {
    const ParsedConfig pc = load_config(run.config_path, run.precision);
    WorkingPrecision prec(pc.digits);
    if (run.command == "construct") return cmd_construct(pc, run);
    if (run.command == "verify") {
      const auto v = verify(pc, run);
      if (run.out_dir) {
        std::filesystem::create_directories(*run.out_dir);
        std::ostringstream os;
        const int code = finish_verify(v, os, err);
        write_file(*run.out_dir / "verify.jsonl", os.str());
        return code;
      }
      return finish_verify(v, out, err);
    }
    if (run.command == "scan") {
      const auto& dir = need_out(run);
      const auto s = run_scan(pc, run, run.scan);
      write_file(dir / (run.scan + ".csv"), s.csv);
      write_file(dir / (run.scan + "_summary.json"), s.summary.dump(1) + "\n");
      out << s.summary.dump() << '\n';
      return s.pass ? exit_ok : exit_failed;
    }
    if (run.command == "report") {
      const auto& dir = need_out(run);
      cmd_construct(pc, run);
      const auto v = verify(pc, run);
      std::ostringstream os;
      const int vcode = finish_verify(v, os, err);
      write_file(dir / "verify.jsonl", os.str());

      // growth samples of g beyond the last circle of poles
      const CoefficientSystem sys(pc.cfg, pc.options);
      json samples = json::array();
      const Real rK = pc.cfg.block(pc.cfg.truncation()).radius;
      for (int scale : {10, 100, 1000}) {
        const Real r = rK * scale;
        const auto nv = nevanlinna(sys.rat(), r);
        samples.push_back({{"r", to_string(r, 20)},
                           {"log_M", to_string(log_max_modulus_formula(pc.cfg, mp::log(r)).upper, 20)},
                           {"m", nv.m},
                           {"N", to_double(nv.N)},
                           {"T", nv.T}});
      }
      json report = {{"samples", samples}, {"verify_exit", vcode}};
      bool all = vcode == exit_ok;
      json flags = json::object();
      std::vector<std::string> scans = {"order", "witness", "indicator"};
      if (pc.options.rho_H) scans.push_back("H");
      for (const auto& type : scans) {
        const auto s = run_scan(pc, run, type);
        write_file(dir / (type + ".csv"), s.csv);
        report[type] = s.summary;
        flags[type] = s.pass;
        if (type != "witness") all = all && s.pass;
      }
      flags["verify"] = vcode == exit_ok;
      report["pass_flags"] = flags;
      write_file(dir / "report.json", report.dump(1) + "\n");
      out << flags.dump() << '\n';
      if (vcode != exit_ok) return vcode;
      return all ? exit_ok : exit_failed;
    }
    throw ConfigError("unknown command '" + run.command + "' (construct, verify, scan, report)");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const CancellationError& e) {
    err << "precision too low: " << e.what() << '\n';
    return exit_precision;
  } catch (const NearZeroError& e) {
    err << "precision too low: " << e.what() << '\n';
    return exit_precision;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failed;
  }
}

}  // namespace lacunary
