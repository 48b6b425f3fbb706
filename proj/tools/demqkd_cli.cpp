// Command-line front end. Talks to the library only through the C API.
#include <demqkd/demqkd.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kInfeasible = 4 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(demqkd_status s) {
  switch (s) {
    case DEMQKD_OK:
      return kOk;
    case DEMQKD_E_INVALID:
      return kUsage;
    case DEMQKD_E_PARSE:
      return kData;
    case DEMQKD_E_INFEASIBLE:
      return kInfeasible;
    default:
      return kInternal;
  }
}

void check(demqkd_status s) {
  if (s != DEMQKD_OK) throw Failure{exit_code(s), demqkd_last_error()};
}

[[noreturn]] void usage(const std::string& msg) { throw Failure{kUsage, msg}; }

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// "a:b:n" (n evenly spaced points, ends included) or "x,y,z".
std::vector<double> parse_grid(const std::string& text, const char* name) {
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (...) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
      usage(std::string(name) + ": '" + s + "' is not a number");
    return v;
  };
  std::vector<std::string> parts;
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) usage(std::string(name) + ": expected from:to:count");
    const double a = to_double(parts[0]), b = to_double(parts[1]);
    const double n = to_double(parts[2]);
    if (n < 2 || n != std::floor(n) || n > 1e7) usage(std::string(name) + ": count must be an integer >= 2");
    if (!(a < b)) usage(std::string(name) + ": from must be below to");
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(i + 1 == count ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
  if (out.empty()) usage(std::string(name) + ": empty grid");
  return out;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw Failure{kData, "cannot open " + path + " for writing"};
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }
  void finish() {
    os().flush();
    if (!os()) throw Failure{kData, "write failed"};
  }

 private:
  std::ofstream file_;
};

struct Common {
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output file (default stdout)");
  cmd->add_option("--format", c.format, "csv or summary")->check(CLI::IsMember({"csv", "summary"}));
}

// ---- sweep-eta ------------------------------------------------------------

struct SweepArgs {
  Common common;
  double from = 0.0;
  double to = 1.0;
  int steps = 101;
};

double symmetric_qber(double eta) {
  demqkd_symmetric_point p;
  check(demqkd_symmetric_curve_point(eta, &p));
  return p.qber;
}

void cmd_sweep_eta(const SweepArgs& a) {
  if (!(a.from >= 0 && a.from < a.to && a.to <= 1)) usage("need 0 <= from < to <= 1");
  if (a.steps < 2) usage("steps must be >= 2");
  Output out(a.common.out);
  auto& os = out.os();
  double best_gap = -1, best_eta = 0;
  if (a.common.format == "csv") os << "eta,qber,i_ab,i_ae\n";
  for (int i = 0; i < a.steps; ++i) {
    const double eta = i + 1 == a.steps ? a.to : a.from + (a.to - a.from) * i / (a.steps - 1);
    demqkd_symmetric_point p;
    check(demqkd_symmetric_curve_point(eta, &p));
    if (p.i_ae - p.i_ab > best_gap) {
      best_gap = p.i_ae - p.i_ab;
      best_eta = eta;
    }
    if (a.common.format == "csv") os << num(eta) << ',' << num(p.qber) << ',' << num(p.i_ab) << ',' << num(p.i_ae) << '\n';
  }
  if (a.common.format == "summary") {
    // eta at which the symmetric attack reaches QBER 0.11, by bisection
    double lo = 0, hi = 1;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      (symmetric_qber(mid) < 0.11 ? lo : hi) = mid;
    }
    os << "rows: " << a.steps << '\n'
       << "eta_at_qber_0.11: " << num(0.5 * (lo + hi)) << '\n'
       << "max_gap_i_ae_minus_i_ab: " << num(best_gap) << '\n'
       << "max_gap_eta: " << num(best_eta) << '\n';
  }
  out.finish();
}

// ---- security-region ------------------------------------------------------

struct RegionArgs {
  Common common;
  std::string eta_grid = "0:1:101";
  std::string qber_grid = "0:0.5:101";
};

void cmd_security_region(const RegionArgs& a) {
  const auto etas = parse_grid(a.eta_grid, "--eta");
  const auto qbers = parse_grid(a.qber_grid, "--qber");
  for (double v : etas)
    if (v < 0 || v > 1) usage("--eta values must lie in [0,1]");
  for (double v : qbers)
    if (v < 0 || v > 1) usage("--qber values must lie in [0,1]");
  Output out(a.common.out);
  auto& os = out.os();
  std::size_t counts[3] = {0, 0, 0};
  if (a.common.format == "csv") os << "eta,qber,region,delta,rate\n";
  for (double eta : etas)
    for (double q : qbers) {
      demqkd_assessment r;
      check(demqkd_classify(eta, q, &r));
      ++counts[r.region];
      if (a.common.format == "csv")
        os << num(eta) << ',' << num(q) << ',' << demqkd_region_name(r.region) << ',' << num(r.delta) << ','
           << num(r.rate) << '\n';
    }
  if (a.common.format == "summary")
    os << "points: " << etas.size() * qbers.size() << '\n'
       << "Secure: " << counts[DEMQKD_SECURE] << '\n'
       << "NotProven: " << counts[DEMQKD_NOT_PROVEN] << '\n'
       << "Insecure: " << counts[DEMQKD_INSECURE] << '\n'
       << "delta_star: " << num(demqkd_delta_star()) << '\n';
  out.finish();
}

// ---- audit ----------------------------------------------------------------

struct AuditArgs {
  Common common;
  std::string curves;
  double calibration = 1.0;
  double floor = 1e-4;
  double step = 1e-3;
  double dark_qber = 0.0;
  std::optional<double> measured_qber;
};

struct PairHandle {
  demqkd_pair* p = nullptr;
  ~PairHandle() { demqkd_pair_free(p); }
};

void cmd_audit(const AuditArgs& a) {
  if (!(a.dark_qber >= 0 && a.dark_qber <= 1)) usage("--dark-qber must lie in [0,1]");
  if (a.measured_qber && !(*a.measured_qber >= 0 && *a.measured_qber <= 1))
    usage("--measured-qber must lie in [0,1]");
  PairHandle pair;
  check(demqkd_pair_load(a.curves.c_str(), a.calibration, &pair.p));
  double t_from = 0, t_to = 0;
  check(demqkd_pair_support(pair.p, &t_from, &t_to));
  demqkd_mismatch m;
  check(demqkd_mismatch_eta(pair.p, t_from, t_to, a.floor, a.step, &m));
  double exact = 0, approx = 0;
  check(demqkd_qber_budgets(m.eta, &exact, &approx));
  const bool total = m.eta == 0.0;

  const double nan = std::nan("");
  double effective = nan;
  demqkd_assessment r{m.eta, nan, nan, nan, DEMQKD_NOT_PROVEN};
  if (a.measured_qber) {
    effective = std::max(0.0, *a.measured_qber - a.dark_qber);
    check(demqkd_classify(m.eta, effective, &r));
  }
  const char* direction = m.direction == DEMQKD_ONE_OVER_ZERO ? "eta1/eta0" : "eta0/eta1";

  Output out(a.common.out);
  auto& os = out.os();
  if (a.common.format == "csv") {
    os << "eta,t_min_ns,direction,qber_budget_exact,qber_budget_approx,measured_qber,dark_qber,"
          "effective_qber,delta,rate,region,total_mismatch\n";
    os << num(m.eta) << ',' << num(m.t_ns) << ',' << direction << ',' << num(exact) << ',' << num(approx)
       << ',' << (a.measured_qber ? num(*a.measured_qber) : "") << ',' << num(a.dark_qber) << ','
       << num(effective) << ',' << num(r.delta) << ',' << num(r.rate) << ','
       << (a.measured_qber ? demqkd_region_name(r.region) : "") << ',' << (total ? 1 : 0) << '\n';
  } else {
    os << "mismatch_eta: " << num(m.eta) << '\n'
       << "t_min_ns: " << num(m.t_ns) << '\n'
       << "direction: " << direction << '\n'
       << "floor: " << num(m.floor) << '\n'
       << "qber_budget_exact: " << num(exact) << '\n'
       << "qber_budget_approx_0.11_eta: " << num(approx) << '\n';
    if (a.measured_qber)
      os << "measured_qber: " << num(*a.measured_qber) << '\n'
         << "dark_qber: " << num(a.dark_qber) << '\n'
         << "effective_qber: " << num(effective) << '\n'
         << "delta: " << num(r.delta) << '\n'
         << "rate: " << num(r.rate) << '\n'
         << "region: " << demqkd_region_name(r.region) << '\n';
    if (total)
      os << "total_mismatch: yes (one detector is blind where the other clicks; "
            "Eve can copy the whole key without raising the QBER)\n";
    else
      os << "total_mismatch: no\n";
  }
  out.finish();
}

// ---- simulate -------------------------------------------------------------

struct SimArgs {
  Common common;
  std::string config;
  unsigned workers = 0;
};

void cmd_simulate(const SimArgs& a) {
  demqkd_sim_config* cfg = nullptr;
  check(demqkd_sim_config_load(a.config.c_str(), &cfg));
  std::unique_ptr<demqkd_sim_config, void (*)(demqkd_sim_config*)> cfg_guard(cfg, demqkd_sim_config_free);
  if (a.workers > 0) check(demqkd_sim_config_set_workers(cfg, a.workers));
  demqkd_sim_stats* stats = nullptr;
  check(demqkd_simulate(cfg, &stats));
  std::unique_ptr<demqkd_sim_stats, void (*)(demqkd_sim_stats*)> stats_guard(stats, demqkd_sim_stats_free);
  char* text = nullptr;
  check(demqkd_sim_stats_format(stats, a.common.format == "csv" ? DEMQKD_FORMAT_CSV : DEMQKD_FORMAT_SUMMARY,
                                &text));
  std::unique_ptr<char, void (*)(char*)> text_guard(text, demqkd_string_free);
  Output out(a.common.out);
  out.os() << text;
  out.finish();
}

// ---- qnd ------------------------------------------------------------------

struct QndArgs {
  Common common;
  demqkd_qnd_params p;
  QndArgs() { demqkd_qnd_default_params(&p); }
};

void cmd_qnd(const QndArgs& a) {
  demqkd_qnd_row* rows = nullptr;
  std::size_t n = 0;
  check(demqkd_qnd_table(&a.p, &rows, &n));
  std::unique_ptr<demqkd_qnd_row, void (*)(demqkd_qnd_row*)> guard(rows, demqkd_qnd_rows_free);
  Output out(a.common.out);
  auto& os = out.os();
  double total = 0, worst = 0;
  std::size_t collapsed = 0;
  if (a.common.format == "csv") os << "interval,t_start_ns,t_end_ns,probability,recovered_phase_deg,rms_ns\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i];
    total += r.probability;
    if (r.collapsed) {
      ++collapsed;
      double d = std::fmod(std::abs(r.recovered_phase - a.p.phase_deg), 360.0);
      worst = std::max(worst, std::min(d, 360.0 - d));
    }
    if (a.common.format == "csv")
      os << r.index << ',' << num(r.t_start_ns) << ',' << num(r.t_end_ns) << ',' << num(r.probability) << ','
         << num(r.recovered_phase) << ',' << num(r.rms_ns) << '\n';
  }
  if (a.common.format == "summary")
    os << "intervals: " << n << '\n'
       << "collapsed: " << collapsed << '\n'
       << "probability_sum: " << num(total) << '\n'
       << "phase_deg: " << num(a.p.phase_deg) << '\n'
       << "max_phase_error_deg: " << num(worst) << '\n';
  out.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detector efficiency mismatch attack toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(demqkd_version()));

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep-eta", "Symmetric-curve attack QBER and mutual information vs eta");
  c_sweep->add_option("--from", sweep.from, "First eta");
  c_sweep->add_option("--to", sweep.to, "Last eta");
  c_sweep->add_option("--steps", sweep.steps, "Number of rows (>= 2)");
  add_common(c_sweep, sweep.common);

  RegionArgs region;
  auto* c_region = app.add_subcommand("security-region", "Classify (eta, QBER) grid points");
  c_region->add_option("--eta", region.eta_grid, "Grid from:to:count or comma list");
  c_region->add_option("--qber", region.qber_grid, "Grid from:to:count or comma list");
  add_common(c_region, region.common);

  AuditArgs audit;
  auto* c_audit = app.add_subcommand("audit", "Mismatch and QBER budget of a measured curve file");
  c_audit->add_option("--curves", audit.curves, "Curve CSV file")->required();
  c_audit->add_option("--calibration", audit.calibration, "Efficiency scale factor");
  c_audit->add_option("--floor", audit.floor, "Relative efficiency floor");
  c_audit->add_option("--step", audit.step, "Time sampling step in ns");
  c_audit->add_option("--dark-qber", audit.dark_qber, "QBER attributed to dark counts");
  c_audit->add_option("--measured-qber", audit.measured_qber, "Observed QBER to classify");
  add_common(c_audit, audit.common);

  SimArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo run of a JSON configuration");
  c_sim->add_option("config", sim.config, "Configuration file")->required();
  c_sim->add_option("--workers", sim.workers, "Override worker thread count");
  add_common(c_sim, sim.common);

  QndArgs qnd;
  auto* c_qnd = app.add_subcommand("qnd", "Time-bin qubit under nondemolition timing projections");
  c_qnd->add_option("--phase", qnd.p.phase_deg, "Encoded phase in degrees");
  c_qnd->add_option("--resolution", qnd.p.resolution_ns, "Timing cell width in ns");
  c_qnd->add_option("--bins", qnd.p.bins, "Grid bins over both windows");
  c_qnd->add_option("--tau", qnd.p.tau_ns, "Pulse separation in ns");
  c_qnd->add_option("--delta", qnd.p.delta_per_ns, "Pulse bandwidth in 1/ns");
  c_qnd->add_option("--omega0", qnd.p.omega0_rad_per_ns, "Carrier frequency in rad/ns");
  c_qnd->add_option("--t0", qnd.p.t0_ns, "First pulse peak in ns");
  add_common(c_qnd, qnd.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (c_sweep->parsed()) cmd_sweep_eta(sweep);
    if (c_region->parsed()) cmd_security_region(region);
    if (c_audit->parsed()) cmd_audit(audit);
    if (c_sim->parsed()) cmd_simulate(sim);
    if (c_qnd->parsed()) cmd_qnd(qnd);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
