#include "singint/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "singint/asymptotics.hpp"
#include "singint/parallel.hpp"
#include "singint/quadric_geometry.hpp"
#include "singint/stationary_phase.hpp"
#include "singint/surface_measure.hpp"
#include "singint/variants.hpp"

#ifndef SINGINT_VERSION
#define SINGINT_VERSION "v0.1.0"
#endif

namespace singint {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, "key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size() || !std::isfinite(v)) invalid(key, "not a number: '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    invalid(key, "not a number: '" + text + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 9e15) invalid(key, "not an integer: '" + text + "'");
  return static_cast<std::int64_t>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) invalid(key, "empty list entry");
    out.push_back(parse_double(key, item.substr(b)));
  }
  if (out.empty()) invalid(key, "empty list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  invalid(key, "expected true or false");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::QuadratureNonConvergent, "non-finite result");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- results ---------------------------------------------------------------------------------

struct Table {
  std::string suffix;  // empty: <command>.csv
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Outcome {
  bool pass = true;
  std::vector<Table> tables;
  std::vector<Series> series;
  json payload = json::object();
};

std::vector<double> sweep_or_default(const RunConfig& cfg, int d) {
  return cfg.nu_sweep.empty() ? default_sweep(d) : cfg.nu_sweep;
}

ProblemSpec make_spec(const RunConfig& cfg, int dim) {
  return ProblemSpec(catalog_scalar(cfg.F.name, cfg.F.params, dim),
                     catalog_weight(cfg.Gamma.name, cfg.Gamma.params, dim));
}

Outcome verify_asymptotic(const RunConfig& cfg) {
  const auto spec = make_spec(cfg, 2 * cfg.d);
  require_valid(spec);
  VerifyOptions vo;
  vo.budget = cfg.budget;
  vo.integrator.theta0 = cfg.theta0;
  const auto rep = verify_theorem(spec, sweep_or_default(cfg, cfg.d), cfg.seed, vo);

  Outcome out;
  out.pass = rep.certified();
  Table t{"", {"nu", "I_nu", "stderr", "leading", "remainder", "chi_d", "ratio"}, {}};
  Series s_nuI{"nu_times_I_nu", {}};
  Series s_ratio{"ratio", {}};
  json rows = json::array();
  for (const auto& r : rep.rows) {
    t.rows.push_back({num(r.nu), num(r.I_nu.value), num(r.I_nu.std_error), num(r.leading),
                      num(r.remainder), num(r.chi_d), num(r.ratio)});
    s_nuI.points.push_back({r.nu, r.nu * r.I_nu.value});
    s_ratio.points.push_back({r.nu, r.ratio});
    rows.push_back({{"nu", r.nu},
                    {"I_nu", r.I_nu.value},
                    {"stderr", r.I_nu.std_error},
                    {"leading", r.leading},
                    {"remainder", r.remainder},
                    {"chi_d", r.chi_d},
                    {"ratio", r.ratio},
                    {"ratio_error", r.ratio_error},
                    {"converged", r.I_nu.converged}});
  }
  out.tables.push_back(std::move(t));
  out.series = {s_nuI, s_ratio};
  out.payload = {{"leading_A", rep.leading_A},
                 {"leading_A_error", rep.leading_A_error},
                 {"method_agreement", rep.method_agreement},
                 {"regime", to_string(rep.regime)},
                 {"ratio_bounded", rep.ratio_bounded},
                 {"tail_bounded", rep.tail_bounded},
                 {"rows", rows}};
  return out;
}

Outcome surface_integral_cmd(const RunConfig& cfg) {
  const auto spec = make_spec(cfg, 2 * cfg.d);
  LeadingOptions lo;
  lo.slab_budget = cfg.budget;
  lo.charts_budget = std::max<std::int64_t>(500, cfg.budget / 1000);
  const auto lc = leading_coefficient(spec, cfg.seed, lo);
  Outcome out;
  Table t{"", {"method", "value", "stderr"}, {}};
  t.rows.push_back({"charts", num(lc.charts.value), num(lc.charts.std_error)});
  t.rows.push_back({"thin_slab", num(lc.thin_slab.value), num(lc.thin_slab.std_error)});
  t.rows.push_back({"combined", num(lc.A), num(lc.std_error)});
  out.tables.push_back(std::move(t));
  out.payload = {{"charts", lc.charts.value},
                 {"charts_stderr", lc.charts.std_error},
                 {"thin_slab", lc.thin_slab.value},
                 {"thin_slab_stderr", lc.thin_slab.std_error},
                 {"A", lc.A},
                 {"A_stderr", lc.std_error},
                 {"method_agreement", lc.method_agreement}};
  return out;
}

Outcome geometry_check(const RunConfig& cfg) {
  const int d = cfg.d;
  const int n_cases = static_cast<int>(std::min<std::int64_t>(cfg.budget, 10000));
  double e_norm = 0.0;
  double e_omega = 0.0;
  double e_round = 0.0;
  double e_dil = 0.0;
  Rng rng = make_rng(cfg.seed, 0x9e0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> buf(2 * d);
  for (int i = 0; i < n_cases; ++i) {
    draw_sigma1_fibration(d, rng, buf);
    const double t = std::exp(std::log(0.1) + unit(rng) * std::log(100.0));
    for (double& v : buf) v *= t;
    AmbientPoint base(d);
    std::copy(buf.begin(), buf.end(), base.z.begin());
    const auto xi = QuadricPoint::unchecked(base);
    const double theta = -0.9 + 1.8 * unit(rng);
    const auto z = pi_map(xi, theta);
    const double r = xi.norm();
    e_norm = std::max(e_norm, std::abs(z.norm() - r * std::sqrt(1 + theta * theta)) / z.norm());
    e_omega = std::max(e_omega, std::abs(omega(z) - r * r * theta) / (r * r));
    const auto inv = invert_pi(z);
    double diff = std::abs(inv.theta - theta);
    for (int k = 0; k < 2 * d; ++k) diff = std::max(diff, std::abs(inv.xi.p.z[k] - xi.p.z[k]) / r);
    e_round = std::max(e_round, diff);
    const double lam = 0.5 + 3.0 * unit(rng);
    AmbientPoint scaled_base = base;
    for (int k = 0; k < 2 * d; ++k) scaled_base.z[k] *= lam;
    const auto zl = pi_map(QuadricPoint::unchecked(scaled_base), theta);
    for (int k = 0; k < 2 * d; ++k)
      e_dil = std::max(e_dil, std::abs(zl.z[k] - lam * z.z[k]) / (lam * z.norm()));
  }
  // volume element on a 10 x 10 grid of (eta, theta) against t-independence and mu(eta, 0) = 1
  double e_mu0 = 0.0;
  double e_mut = 0.0;
  double e_mucf = 0.0;
  for (int i = 0; i < 10; ++i) {
    draw_sigma1_fibration(d, rng, buf);
    AmbientPoint e(d);
    std::copy(buf.begin(), buf.end(), e.z.begin());
    const auto eta = QuadricPoint::unchecked(e);
    e_mu0 = std::max(e_mu0, std::abs(mu_density(eta, 0.0, 1.0, 0.95).mu - 1.0));
    for (int j = 0; j < 10; ++j) {
      const double theta = -0.09 + 0.02 * j;
      const double m1 = mu_density(eta, theta, 1.0, 0.95).mu;
      const double m2 = mu_density(eta, theta, 7.0, 0.95).mu;
      e_mut = std::max(e_mut, std::abs(m1 - m2));
      e_mucf = std::max(e_mucf, std::abs(m1 - mu_closed_form(d, theta)));
    }
  }
  Outcome out;
  Table t{"", {"check", "cases", "max_error", "tolerance", "pass"}, {}};
  auto add = [&](const std::string& name, int cases, double err, double tol) {
    const bool ok = err <= tol;
    out.pass = out.pass && ok;
    t.rows.push_back({name, std::to_string(cases), num(err), num(tol), ok ? "1" : "0"});
    out.payload[name] = {{"cases", cases}, {"max_error", err}, {"tolerance", tol}, {"pass", ok}};
  };
  add("norm_identity", n_cases, e_norm, 1e-12);
  add("omega_identity", n_cases, e_omega, 1e-12);
  add("round_trip", n_cases, e_round, 1e-10);
  add("dilation", n_cases, e_dil, 1e-12);
  add("mu_at_theta_0", 10, e_mu0, 1e-8);
  add("mu_t_independence", 100, e_mut, 1e-8);
  add("mu_closed_form", 100, e_mucf, 1e-8);
  out.tables.push_back(std::move(t));
  return out;
}

Outcome measure_check(const RunConfig& cfg) {
  const int d = cfg.d;
  Outcome out;
  Table t{"", {"check", "value", "reference", "error", "tolerance", "pass"}, {}};
  auto add = [&](const std::string& name, double v, double ref, double err, double tol) {
    const bool ok = err <= tol;
    out.pass = out.pass && ok;
    t.rows.push_back({name, num(v), num(ref), num(err), num(tol), ok ? "1" : "0"});
    out.payload[name] = {{"value", v}, {"reference", ref}, {"error", err}, {"tolerance", tol},
                         {"pass", ok}};
  };
  const double whole = ball_mass(d, 0.0, 2.0);
  const double parts = ball_mass(d, 0.0, 0.5) + ball_mass(d, 0.5, 2.0);
  add("ball_mass_additivity", parts, whole, std::abs(parts - whole), 1e-12 * whole);

  const double unit = ball_mass(d, 0.0, 1.0);
  const auto mc = surface_integral(
      d,
      [](std::span<const double> z) {
        const double r = norm(z);
        return r <= 1.0 ? 1.0 / r : 0.0;
      },
      SurfaceMethod::thin_slab, cfg.budget, cfg.seed);
  add("unit_ball_mass", mc.value, unit, std::abs(mc.value - unit),
      std::max(3.0 * mc.std_error, 0.01 * unit));

  const auto F = catalog_scalar(cfg.F.name, cfg.F.params, 2 * d);
  const auto mi = integrate_measure(F, cfg.m_norm, 2000, cfg.seed);
  add("functional_bound", std::abs(mi.value.value), mi.bound,
      std::max(0.0, std::abs(mi.value.value) - 3.0 * mi.value.std_error - mi.bound), 0.0);

  if (F.support_radius) {
    const auto G = catalog_weight(cfg.Gamma.name, cfg.Gamma.params, 2 * d);
    const auto wc = weak_convergence_check(G, F, sweep_or_default(cfg, d), cfg.budget, cfg.seed);
    const auto& last = wc.rows.back();
    add("weak_convergence", last.lhs, last.limit, last.gap,
        std::max(3.0 * std::hypot(last.lhs_error, last.limit_error), 0.05 * std::abs(last.limit)));
    Series s{"weak_convergence_gap", {}};
    for (const auto& r : wc.rows) s.points.push_back({r.nu, r.gap});
    out.series.push_back(std::move(s));
  } else {
    out.payload["weak_convergence"] = "skipped: F is not compactly supported";
  }
  out.tables.push_back(std::move(t));
  return out;
}

template <class Report>
Outcome ratio_rows(const Report& rep) {
  Outcome out;
  out.pass = rep.bounded;
  Table t{"", {"nu", "I_nu", "leading", "remainder", "ratio"}, {}};
  Series s{"ratio", {}};
  json rows = json::array();
  for (const auto& r : rep.rows) {
    t.rows.push_back({num(r.nu), num(r.I_nu), num(r.leading), num(r.remainder), num(r.ratio)});
    s.points.push_back({r.nu, r.ratio});
    rows.push_back({{"nu", r.nu}, {"I_nu", r.I_nu}, {"leading", r.leading},
                    {"remainder", r.remainder}, {"ratio", r.ratio}});
  }
  out.tables.push_back(std::move(t));
  out.series.push_back(std::move(s));
  out.payload = {{"bounded", rep.bounded}, {"rows", rows}};
  return out;
}

Outcome variants_cmd(const RunConfig& cfg) {
  const auto sweep = sweep_or_default(cfg, std::max(cfg.d, 2));
  if (cfg.variant == "d1") {
    const auto F = catalog_scalar(cfg.F.name, cfg.F.params, 2);
    const auto G = catalog_weight(cfg.Gamma.name, cfg.Gamma.params, 2);
    const auto rep = d1_contour(F, G, sweep);
    auto out = ratio_rows(rep);
    out.payload["contour"] = rep.contour.value;
    return out;
  }
  if (cfg.variant == "sphere") {
    const auto F = catalog_scalar(cfg.F.name, cfg.F.params, cfg.d);
    const auto G = catalog_weight(cfg.Gamma.name, cfg.Gamma.params, cfg.d);
    const auto rep = sphere_quadric(F, G, cfg.k_mod, sweep);
    auto out = ratio_rows(rep);
    out.payload["radius"] = rep.radius;
    out.payload["surface_integral"] = rep.surface_integral;
    out.payload["leading_coefficient"] = rep.leading_coefficient;
    return out;
  }
  if (cfg.variant == "linear_divisor") {
    const auto spec = make_spec(cfg, 2 * cfg.d);
    LinearDivisorOptions lo;
    lo.budget = cfg.budget;
    lo.theta0 = cfg.theta0;
    const auto rep = linear_divisor(spec, sweep, cfg.seed, lo);
    Outcome out;
    out.pass = !rep.rows.empty() && rep.rows.back().converged;
    Table t{"", {"nu", "re", "re_stderr", "im", "im_stderr", "limit_re", "limit_im", "converged"}, {}};
    Series s{"im", {}};
    json rows = json::array();
    for (const auto& r : rep.rows) {
      t.rows.push_back({num(r.nu), num(r.estimate.re), num(r.estimate.re_error), num(r.estimate.im),
                        num(r.estimate.im_error), num(r.limit.re), num(r.limit.im),
                        r.converged ? "1" : "0"});
      s.points.push_back({r.nu, r.estimate.im});
      rows.push_back({{"nu", r.nu}, {"re", r.estimate.re}, {"im", r.estimate.im},
                      {"limit_re", r.limit.re}, {"limit_im", r.limit.im},
                      {"converged", r.converged}});
    }
    out.tables.push_back(std::move(t));
    out.series.push_back(std::move(s));
    out.payload = {{"surface_term", rep.surface_term},
                   {"surface_term_error", rep.surface_term_error},
                   {"pv", rep.pv.re},
                   {"pv_error", rep.pv.re_error},
                   {"rows", rows}};
    return out;
  }
  if (cfg.variant == "kinetic") {
    std::vector<double> k(cfg.d, 0.0);
    k[0] = cfg.k_mod;
    const auto Fk = separable_gaussian_kinetic(k);
    const auto est = kinetic_kernel_demo(Fk, k, std::min<std::int64_t>(cfg.budget, 20000), cfg.seed);
    Outcome out;
    out.tables.push_back({"", {"value", "stderr"}, {{num(est.value), num(est.std_error)}}});
    out.payload = {{"value", est.value}, {"stderr", est.std_error}};
    return out;
  }
  invalid("variants.kind", "unknown variant '" + cfg.variant + "'");
}

Outcome stationary_phase_cmd(const RunConfig& cfg) {
  const int n = cfg.sp_n;
  Outcome out;
  const auto phi = catalog_scalar(cfg.F.name, cfg.F.params, n);
  const auto p = quadratic_phase_problem(phi, cfg.sp_box);
  Table t{"", {"lambda", "re", "im", "leading_re", "leading_im", "error", "truncation"}, {}};
  Series s{"error", {}};
  std::vector<double> lx;
  std::vector<double> ly;
  for (double lam : cfg.lambdas) {
    const auto I = oscillatory_integral(p, lam);
    const auto sp = stationary_phase_leading(p, lam);
    const double err = std::abs(I.value - sp);
    t.rows.push_back({num(lam), num(I.value.real()), num(I.value.imag()), num(sp.real()),
                      num(sp.imag()), num(err), num(I.truncation_estimate)});
    s.points.push_back({lam, err});
    lx.push_back(std::log(lam));
    ly.push_back(std::log(err));
  }
  // least-squares slope of log error against log lambda
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double expected = -0.5 * n - 1.0;
  out.pass = lx.size() >= 2 && std::abs(slope - expected) <= 0.15;
  out.payload = {{"slope", slope}, {"expected_slope", expected}};
  out.tables.push_back(std::move(t));
  out.series.push_back(std::move(s));

  if (n == 2 || n == 3) {
    std::vector<double> center(n, 0.0);
    const auto f = ball_bump_field(center, cfg.resolvent_radius);
    const auto phase = quadratic_phase_problem(f, cfg.resolvent_radius, cfg.sp_shift);
    const auto sweep =
        cfg.nu_sweep.empty() ? std::vector<double>{1e-1, 1e-1 * std::pow(10.0, -0.5), 1e-2,
                                                   1e-2 * std::pow(10.0, -0.5), 1e-3}
                             : cfg.nu_sweep;
    const auto rep = resolvent_bound_check(f, phase, 1.0, sweep);
    Table r{"resolvent", {"nu", "abs_I", "bound_ratio", "abs_I1", "I1_bound"}, {}};
    Series rs{"resolvent_ratio", {}};
    for (const auto& row : rep.rows) {
      r.rows.push_back({num(row.nu), num(row.abs_I), num(row.bound_ratio), num(std::abs(row.I1)),
                        num(row.I1_bound)});
      rs.points.push_back({row.nu, row.bound_ratio});
    }
    out.pass = out.pass && rep.bounded && rep.laplace_consistent;
    out.payload["resolvent_bounded"] = rep.bounded;
    out.payload["laplace_consistent"] = rep.laplace_consistent;
    out.tables.push_back(std::move(r));
    out.series.push_back(std::move(rs));
  }
  return out;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_outputs(const RunConfig& cfg, const Outcome& out, double wall) {
  fs::create_directories(cfg.output_dir);
  for (const auto& t : out.tables) {
    const auto name = cfg.command + (t.suffix.empty() ? "" : "-" + t.suffix) + ".csv";
    std::ofstream f(cfg.output_dir / name, std::ios::binary);
    for (size_t i = 0; i < t.header.size(); ++i) f << (i ? "," : "") << t.header[i];
    f << '\n';
    for (const auto& row : t.rows) {
      for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
      f << '\n';
    }
  }
  if (cfg.plot && !out.series.empty()) {
    std::ofstream f(cfg.output_dir / (cfg.command + ".plot.txt"), std::ios::binary);
    bool first = true;
    for (const auto& s : out.series) {
      if (!first) f << "\n\n";
      first = false;
      f << "# " << s.name << '\n';
      for (const auto& [x, y] : s.points) f << num(x) << ' ' << num(y) << '\n';
    }
  }
  json snap = json::object();
  for (const auto& [k, v] : cfg.snapshot) snap[k] = v;
  json rec = {{"config", snap},
              {"version", SINGINT_VERSION},
              {"timestamp", iso_timestamp()},
              {"results", out.payload},
              {"pass", out.pass},
              {"wall_time", wall}};
  std::ofstream log(cfg.output_dir / "runs.jsonl", std::ios::binary | std::ios::app);
  log << rec.dump() << '\n';
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"command", "d", "nu_sweep", "budget", "seed", "theta0", "output_dir", "plot"}},
      {"variants", {"kind", "k"}},
      {"stationary_phase", {"n", "lambdas", "box", "shift", "resolvent_radius"}},
      {"measure", {"m_norm"}},
  };
  return keys;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) invalid(section, "key outside a section");
    const bool field_section = section == "F" || section == "Gamma";
    if (!field_section && !known_keys().count(section)) invalid(section, "unknown section");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const std::string v = trim(node.data());
      cfg.snapshot.emplace_back(full, v);
      if (field_section) {
        FieldSpec& fs = section == "F" ? cfg.F : cfg.Gamma;
        if (key == "name") {
          fs.name = v;
          fs.params.clear();
        } else {
          fs.params[key] = parse_double(full, v);
        }
        continue;
      }
      if (!known_keys().at(section).count(key)) invalid(full, "unknown key");
      if (full == "run.command") cfg.command = v;
      else if (full == "run.d") cfg.d = static_cast<int>(parse_int(full, v));
      else if (full == "run.nu_sweep") cfg.nu_sweep = parse_list("nu_sweep", v);
      else if (full == "run.budget") cfg.budget = parse_int(full, v);
      else if (full == "run.seed") cfg.seed = static_cast<std::uint64_t>(parse_int(full, v));
      else if (full == "run.theta0") cfg.theta0 = parse_double(full, v);
      else if (full == "run.output_dir") cfg.output_dir = v;
      else if (full == "run.plot") cfg.plot = parse_bool(full, v);
      else if (full == "variants.kind") cfg.variant = v;
      else if (full == "variants.k") cfg.k_mod = parse_double(full, v);
      else if (full == "stationary_phase.n") cfg.sp_n = static_cast<int>(parse_int(full, v));
      else if (full == "stationary_phase.lambdas") cfg.lambdas = parse_list(full, v);
      else if (full == "stationary_phase.box") cfg.sp_box = parse_double(full, v);
      else if (full == "stationary_phase.shift") cfg.sp_shift = parse_double(full, v);
      else if (full == "stationary_phase.resolvent_radius") cfg.resolvent_radius = parse_double(full, v);
      else if (full == "measure.m_norm") cfg.m_norm = parse_double(full, v);
    }
  }
  if (std::find(std::begin(kCommands), std::end(kCommands), cfg.command) == std::end(kCommands))
    invalid("command", "unknown command '" + cfg.command + "'");
  if (cfg.d < 1 || cfg.d > kMaxHalfDim) invalid("d", "must be in 1.." + std::to_string(kMaxHalfDim));
  for (double nu : cfg.nu_sweep)
    if (!(nu > 0.0 && nu <= 1.0)) invalid("nu_sweep", "entries must lie in (0, 1], got " + num(nu));
  if (cfg.budget < 1000) invalid("budget", "must be at least 1000");
  if (!(cfg.theta0 > 0.0 && cfg.theta0 < 1.0)) invalid("theta0", "must lie in (0, 1)");
  if (cfg.sp_n < 1 || cfg.sp_n > 3) invalid("stationary_phase.n", "must be 1, 2 or 3");
  for (double l : cfg.lambdas)
    if (!(l >= 1.0)) invalid("stationary_phase.lambdas", "entries must be >= 1");
  if (!(cfg.sp_box > 0.0)) invalid("stationary_phase.box", "must be positive");
  if (!(cfg.resolvent_radius > 0.0)) invalid("stationary_phase.resolvent_radius", "must be positive");
  try {
    catalog_scalar(cfg.F.name, cfg.F.params, 2 * cfg.d);
  } catch (const Error& e) {
    invalid("F.name", e.what());
  }
  try {
    catalog_weight(cfg.Gamma.name, cfg.Gamma.params, 2 * cfg.d);
  } catch (const Error& e) {
    invalid("Gamma.name", e.what());
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file " + path.string());
  return parse_config(in);
}

void apply_overrides(RunConfig& cfg, const CliOverrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.budget) {
    if (*o.budget < 1000) invalid("budget", "must be at least 1000");
    cfg.budget = *o.budget;
  }
  if (o.out) cfg.output_dir = *o.out;
  if (o.command) {
    if (std::find(std::begin(kCommands), std::end(kCommands), *o.command) == std::end(kCommands))
      invalid("command", "unknown command '" + *o.command + "'");
    cfg.command = *o.command;
  }
  auto set = [&](const std::string& k, const std::string& v) {
    for (auto& [key, val] : cfg.snapshot)
      if (key == k) {
        val = v;
        return;
      }
    cfg.snapshot.emplace_back(k, v);
  };
  set("run.seed", std::to_string(cfg.seed));
  set("run.budget", std::to_string(cfg.budget));
  set("run.command", cfg.command);
}

int run(const RunConfig& cfg, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Outcome out;
    if (cfg.command == "verify-asymptotic") out = verify_asymptotic(cfg);
    else if (cfg.command == "surface-integral") out = surface_integral_cmd(cfg);
    else if (cfg.command == "geometry-check") out = geometry_check(cfg);
    else if (cfg.command == "measure-check") out = measure_check(cfg);
    else if (cfg.command == "variants") out = variants_cmd(cfg);
    else if (cfg.command == "stationary-phase") out = stationary_phase_cmd(cfg);
    else invalid("command", "unknown command '" + cfg.command + "'");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_outputs(cfg, out, wall);
    if (!out.pass) err << cfg.command << ": check failed\n";
    return out.pass ? 0 : 2;
  } catch (const Error& e) {
    err << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::MethodsDisagree:
      case ErrorCode::RemainderUnbounded:
      case ErrorCode::BoundViolated:
        return 2;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(const fs::path& config_file, const CliOverrides& overrides, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_file);
    apply_overrides(cfg, overrides);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return 1;
  }
  return run(cfg, err);
}

}  // namespace singint
