// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Uses only the public C interface and the command-line tool.

#include <demqkd/demqkd.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "oracle.hpp"

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string run_cli(const std::string& args, int* code) {
  const std::string cmd = std::string("\"") + DEMQKD_CLI + "\" " + args + " 2>/dev/null";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    *code = -1;
    return out;
  }
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  const int status = pclose(pipe);
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::map<std::string, std::string> summary(const std::string& text) {
  std::map<std::string, std::string> m;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) {
    const auto pos = line.find(": ");
    if (pos != std::string::npos) m[line.substr(0, pos)] = line.substr(pos + 2);
  }
  return m;
}

double num(const std::map<std::string, std::string>& m, const std::string& key) {
  const auto it = m.find(key);
  return it == m.end() ? std::numeric_limits<double>::quiet_NaN() : std::stod(it->second);
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "demqkd_acceptance";
  fs::create_directories(dir);
  return dir;
}

// ---- criteria -------------------------------------------------------------

Outcome threshold() {
  Outcome o;
  // 2 eta / (1 + 3 eta) = 0.11 solved by hand
  const double eta_star = 0.11 / (2 - 3 * 0.11);
  o.require(std::abs(eta_star - 0.065868) < 1e-4, "closed-form threshold off");
  int code = 0;
  const auto s = summary(run_cli("sweep-eta --format summary", &code));
  const double from_cli = num(s, "eta_at_qber_0.11");
  o.require(code == 0, "sweep-eta failed");
  o.require(std::abs(from_cli - 0.065868) < 1e-4, "sweep-eta threshold " + fmt("%.9g", from_cli));

  const auto csv = run_cli("sweep-eta --from 0.066 --to 1 --steps 2", &code);
  std::stringstream ss(csv);
  std::string header, row;
  std::getline(ss, header);
  std::getline(ss, row);
  const double q066 = std::stod(row.substr(row.find(',') + 1));
  o.require(code == 0 && row.rfind("0.066,", 0) == 0, "sweep-eta row for 0.066 missing");
  // 1e-4 is the stated tolerance of this criterion
  o.require(q066 <= 0.1101 + 1e-4, "qber(0.066) = " + fmt("%.9g", q066));
  if (o.ok)
    o.detail = "eta* = " + fmt("%.6f", from_cli) + ", qber(0.066) = " + fmt("%.6f", q066) +
               " (<= 0.1101 within 1e-4)";
  return o;
}

Outcome max_gap() {
  Outcome o;
  demqkd_symmetric_point p;
  o.require(demqkd_symmetric_curve_point(1.0 / 3, &p) == DEMQKD_OK, demqkd_last_error());
  const double gap = p.i_ae - p.i_ab;
  const double ref = oracle::h2(1.0 / 3) - 1.0 / 3;
  o.require(std::abs(gap - ref) < 1e-6, "gap " + fmt("%.9g", gap) + " vs " + fmt("%.9g", ref));
  o.require(std::abs(gap - 0.584963) < 1e-6, "gap " + fmt("%.9g", gap));
  if (o.ok) o.detail = "i_AE - i_AB at eta=1/3 = " + fmt("%.9f", gap);
  return o;
}

Outcome bound() {
  Outcome o;
  const double ds = demqkd_delta_star();
  o.require(std::abs(ds - 0.110028) < 1e-6, "delta* = " + fmt("%.9g", ds));
  double rate = 1;
  demqkd_pa_rate(ds, &rate);
  o.require(std::abs(rate) < 1e-8, "rate at delta* = " + fmt("%.3g", rate));

  const auto file = scratch() / "constant_30_to_1.csv";
  {
    std::ofstream f(file);
    f << "t_ns,eta0,eta1\n-1,0.15,0.005\n0,0.15,0.005\n1,0.15,0.005\n";
  }
  int code = 0;
  const auto s = summary(run_cli("audit --format summary --curves \"" + file.string() + "\"", &code));
  o.require(code == 0, "audit failed");
  const double approx = num(s, "qber_budget_approx_0.11_eta"), exact = num(s, "qber_budget_exact");
  o.require(std::abs(num(s, "mismatch_eta") - 1.0 / 30) < 1e-9, "mismatch is not 1/30");
  o.require(std::abs(approx - 0.003667) < 1e-6, "approximate budget " + fmt("%.9g", approx));
  o.require(std::abs(exact - 0.004104) < 1e-6, "exact budget " + fmt("%.9g", exact));
  if (o.ok)
    o.detail = "delta* = " + fmt("%.6f", ds) + "; audit 30:1 approx " + fmt("%.6f", approx) + ", exact " +
               fmt("%.6f", exact);
  return o;
}

std::vector<demqkd_efficiencies> random_quadruples(std::size_t n) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<demqkd_efficiencies> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({1 - u(rng), 1 - u(rng), 1 - u(rng), 1 - u(rng)});
  return out;
}

Outcome oracle_equivalence() {
  Outcome o;
  double worst = 0;
  for (const auto& e : random_quadruples(10000)) {
    demqkd_info c, t;
    if (demqkd_info_report(&e, &c) != DEMQKD_OK || demqkd_enumerate(&e, &t) != DEMQKD_OK) {
      o.require(false, demqkd_last_error());
      break;
    }
    const auto ref = oracle::info(oracle::joint(oracle::eff(e.e00, e.e10, e.e01, e.e11)));
    const double diffs[] = {c.p_arrive - t.p_arrive, c.qber - t.qber,      c.h_a - t.h_a,
                            c.h_a_given_e - t.h_a_given_e, c.h_a_given_b - t.h_a_given_b, c.i_ae - t.i_ae,
                            c.i_ab - t.i_ab,               c.i_ab - ref.i_ab,             c.i_ae - ref.i_ae};
    for (double d : diffs) worst = std::max(worst, std::abs(d));
    o.require(std::abs(c.h_a_given_e - c.qber) < 1e-12, "H(A|E) != QBER");
    o.require(std::abs(t.h_a_given_e - t.qber) < 1e-12, "enumerated H(A|E) != QBER");
  }
  o.require(worst < 1e-12, "max deviation " + fmt("%.3g", worst));
  if (o.ok) o.detail = "10000 quadruples, max deviation " + fmt("%.2g", worst);
  return o;
}

Outcome markov() {
  Outcome o;
  double worst = -1;
  for (const auto& e : random_quadruples(10000)) {
    demqkd_info c;
    demqkd_info_report(&e, &c);
    worst = std::max(worst, c.i_ab - c.i_ae);
  }
  o.require(worst <= 1e-12, "i_AB exceeds i_AE by " + fmt("%.3g", worst));
  if (o.ok) o.detail = "10000 quadruples, max(i_AB - i_AE) = " + fmt("%.3g", worst);
  return o;
}

struct Sim {
  demqkd_sim_summary summary{};
  std::string csv;
  bool ok = false;
};

Sim simulate(const std::string& json, unsigned workers) {
  Sim s;
  demqkd_sim_config* cfg = nullptr;
  if (demqkd_sim_config_parse(json.c_str(), nullptr, &cfg) != DEMQKD_OK) return s;
  demqkd_sim_stats* st = nullptr;
  char* text = nullptr;
  if (demqkd_sim_config_set_workers(cfg, workers) == DEMQKD_OK && demqkd_simulate(cfg, &st) == DEMQKD_OK &&
      demqkd_sim_stats_summary(st, &s.summary) == DEMQKD_OK &&
      demqkd_sim_stats_format(st, DEMQKD_FORMAT_CSV, &text) == DEMQKD_OK) {
    s.csv = text;
    s.ok = true;
  }
  demqkd_string_free(text);
  demqkd_sim_stats_free(st);
  demqkd_sim_config_free(cfg);
  return s;
}

Outcome monte_carlo() {
  Outcome o;
  const std::string sym = R"({
    "simulation": {"n_pulses": 1000000, "seed": 424242},
    "source": {"statistics": "single_photon"},
    "detectors": {"curve0": {"tabulated": [[0, 1], [1, 0.3333333333333333]]},
                  "curve1": {"tabulated": [[0, 0.3333333333333333], [1, 1]]}},
    "attack": {"t0": 0, "t1": 1, "statistics": "single_photon"}
  })";
  const auto a = simulate(sym, 1);
  o.require(a.ok, demqkd_last_error());
  if (!o.ok) return o;
  const double n = static_cast<double>(a.summary.kept);
  const double sigma = std::sqrt((1.0 / 3) * (2.0 / 3) / n);
  const double z = (a.summary.qber - 1.0 / 3) / sigma;
  o.require(std::abs(z) <= 3, "QBER " + fmt("%.6f", a.summary.qber) + " is " + fmt("%.2f", z) + " sigma off");
  for (unsigned w : {2u, 4u, 7u}) {
    const auto b = simulate(sym, w);
    o.require(b.ok && b.csv == a.csv, "result differs with " + std::to_string(w) + " workers");
  }

  const std::string total = R"({
    "simulation": {"n_pulses": 1000000, "seed": 7},
    "source": {"statistics": "single_photon"},
    "detectors": {"curve0": {"tabulated": [[0, 0.5], [1, 0]]}, "curve1": {"tabulated": [[0, 0], [1, 0.5]]}},
    "attack": {"t0": 0, "t1": 1, "statistics": "single_photon"}
  })";
  const auto t = simulate(total, 3);
  o.require(t.ok && t.summary.kept > 0, "total-mismatch run failed");
  o.require(t.summary.errors == 0 && t.summary.qber == 0.0, "total mismatch QBER " + fmt("%.3g", t.summary.qber));
  o.require(t.summary.eve_agree == t.summary.kept && t.summary.eve_agreement == 1.0,
            "Eve agreement " + fmt("%.9g", t.summary.eve_agreement));
  if (o.ok)
    o.detail = "QBER " + fmt("%.5f", a.summary.qber) + " (" + fmt("%+.2f", z) + " sigma, " +
               std::to_string(a.summary.kept) + " kept); total mismatch QBER 0, agreement 1; identical for 1/2/4/7 workers";
  return o;
}

Outcome mixtures() {
  Outcome o;
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10000; ++k) {
    const int n = 2 + static_cast<int>(u(rng) * 5);
    std::vector<double> w;
    std::vector<demqkd_efficiencies> comps;
    double sum = 0, best = 1;
    for (int i = 0; i < n; ++i) {
      comps.push_back({1 - u(rng), 1 - u(rng), 1 - u(rng), 1 - u(rng)});
      w.push_back(1 - u(rng));
      sum += w.back();
      const auto& e = comps.back();
      best = std::min(best, oracle::joint(oracle::eff(e.e00, e.e10, e.e01, e.e11)).qber());
    }
    for (double& x : w) x /= sum;
    double q = 0;
    if (demqkd_mixture_qber(w.data(), comps.data(), comps.size(), &q) != DEMQKD_OK) {
      o.require(false, demqkd_last_error());
      break;
    }
    worst = std::min(worst, q - best);
  }
  o.require(worst >= -1e-12, "mixture below best component by " + fmt("%.3g", -worst));
  if (o.ok) o.detail = "10000 mixtures, min(mixture - best component) = " + fmt("%.3g", worst);
  return o;
}

double phase_error(double got, double want) {
  const double d = std::fmod(std::abs(got - want), 360.0);
  return std::min(d, 360.0 - d);
}

Outcome qnd_suite() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  double worst_sum = 0, worst_phase = 0, worst_cross = 0, worst_rms_ratio = 0;
  int configs = 0;
  for (int k = 0; k < 100; ++k) {
    demqkd_qnd_params p;
    demqkd_qnd_default_params(&p);
    p.t0_ns = 0.45 + 1.1 * u(rng);
    const double dt = 2 * p.tau_ns / static_cast<double>(p.bins);
    p.resolution_ns = dt * static_cast<double>(5 + static_cast<int>(u(rng) * 300));
    for (double phi : {0.0, 90.0, 180.0, 270.0}) {
      p.phase_deg = phi;
      demqkd_qnd_row* rows = nullptr;
      std::size_t n = 0;
      if (demqkd_qnd_table(&p, &rows, &n) != DEMQKD_OK) {
        o.require(false, demqkd_last_error());
        return o;
      }
      double sum = 0;
      std::vector<std::size_t> hit;
      for (std::size_t i = 0; i < n; ++i) {
        sum += rows[i].probability;
        if (!rows[i].collapsed) continue;
        worst_phase = std::max(worst_phase, phase_error(rows[i].recovered_phase, phi));
        worst_rms_ratio = std::max(worst_rms_ratio, rows[i].rms_ns / p.resolution_ns);
        if (rows[i].probability > 1e-6) hit.push_back(i);
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1));
      demqkd_qnd_rows_free(rows);
      // re-project the likely cells against every cell
      std::vector<double> probs(n);
      for (std::size_t i : hit) {
        if (demqkd_qnd_reprojection(&p, i, probs.data(), n) != DEMQKD_OK) {
          o.require(false, demqkd_last_error());
          return o;
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j)
            o.require(std::abs(probs[j] - 1) < 1e-12, "self re-projection " + fmt("%.17g", probs[j]));
          else
            worst_cross = std::max(worst_cross, probs[j]);
        }
      }
      ++configs;
    }
  }
  o.require(worst_sum <= 1e-10, "completeness off by " + fmt("%.3g", worst_sum));
  o.require(worst_cross <= 1e-12, "cross-cell probability " + fmt("%.3g", worst_cross));
  o.require(worst_phase <= 1e-9, "phase error " + fmt("%.3g", worst_phase) + " deg");
  o.require(worst_rms_ratio <= 1, "post-collapse RMS exceeds resolution");
  if (o.ok)
    o.detail = std::to_string(configs) + " configs; |sum-1| <= " + fmt("%.2g", worst_sum) + ", cross <= " +
               fmt("%.2g", worst_cross) + ", phase err <= " + fmt("%.2g", worst_phase) + " deg, rms/res <= " +
               fmt("%.3f", worst_rms_ratio);
  return o;
}

double pair_mismatch(const demqkd_curve* c0, const demqkd_curve* c1, Outcome& o) {
  demqkd_pair* p = nullptr;
  double eta = std::numeric_limits<double>::quiet_NaN();
  double a = 0, b = 0;
  demqkd_mismatch m;
  if (demqkd_pair_create(c0, c1, 0, 0, &p) == DEMQKD_OK && demqkd_pair_support(p, &a, &b) == DEMQKD_OK &&
      demqkd_mismatch_eta(p, a, b, 1e-4, 1e-3, &m) == DEMQKD_OK)
    eta = m.eta;
  else
    o.require(false, demqkd_last_error());
  demqkd_pair_free(p);
  return eta;
}

Outcome countermeasure() {
  Outcome o;
  demqkd_curve *g0 = nullptr, *g1 = nullptr, *s0 = nullptr, *s1 = nullptr;
  demqkd_curve_gate(0.0, 1.0, 0.05, 0.1, &g0);
  demqkd_curve_gate(0.5, 1.0, 0.05, 0.1, &g1);
  demqkd_curve_smear(g0, DEMQKD_JITTER_GAUSSIAN, 0.3, 1e-3, &s0);
  demqkd_curve_smear(g1, DEMQKD_JITTER_GAUSSIAN, 0.3, 1e-3, &s1);
  o.require(g0 && g1 && s0 && s1, demqkd_last_error());
  if (o.ok) {
    const double before = pair_mismatch(g0, g1, o);
    const double after = pair_mismatch(s0, s1, o);
    o.require(after > before, "eta " + fmt("%.6g", before) + " -> " + fmt("%.6g", after));
    if (o.ok) o.detail = "mismatch eta " + fmt("%.6g", before) + " -> " + fmt("%.6g", after) + " after 0.3 ns jitter";
  }
  demqkd_curve_free(g0);
  demqkd_curve_free(g1);
  demqkd_curve_free(s0);
  demqkd_curve_free(s1);
  return o;
}

// Sifted per-pulse rates of the attack with double clicks split evenly. A
// single photon clicks at most one detector.
struct Rates {
  double r0 = 0, r1 = 0, errors = 0;
};

Rates attack_rates(const oracle::Eff& e, double mu0, double mu1, bool single) {
  Rates r;
  for (int ab = 0; ab < 2; ++ab)
    for (int a = 0; a < 2; ++a)
      for (int eb = 0; eb < 2; ++eb)
        for (int x = 0; x < 2; ++x) {
          const double pe = eb == ab ? (x == a ? 1.0 : 0.0) : 0.5;
          const double w = 0.5 * 0.5 * 0.5 * pe * 0.5;
          const double mu = x == 0 ? mu0 : mu1;
          const int sent_basis = 1 - eb, sent_bit = 1 - x;
          double p[2];
          for (int d = 0; d < 2; ++d) {
            const double s = ab == sent_basis ? (d == sent_bit ? 1.0 : 0.0) : 0.5;
            p[d] = single ? s * e[d][x] : -std::expm1(-mu * s * e[d][x]);
          }
          const double c0 = single ? p[0] : p[0] * (1 - p[1]) + 0.5 * p[0] * p[1];
          const double c1 = single ? p[1] : p[1] * (1 - p[0]) + 0.5 * p[0] * p[1];
          r.r0 += w * c0;
          r.r1 += w * c1;
          r.errors += w * (a == 0 ? c1 : c0);
        }
  return r;
}

Outcome optimizer() {
  Outcome o;
  struct Case {
    std::vector<std::vector<double>> c0, c1;  // tabulated (t, eta) or a gate {center, width, edge, peak}
    bool gates;
    std::vector<double> ts, mus;
    demqkd_photon_stats stats;
  };
  std::vector<double> wide;
  for (int i = 0; i <= 30; ++i) wide.push_back(-1.5 + 0.1 * i);
  const Case cases[] = {
      // second detector twice as efficient
      {{{-0.5, 1.0, 0.02, 0.1}}, {{0.5, 1.0, 0.02, 0.2}}, true, {-0.8, -0.5, -0.2, 0.2, 0.5, 0.8}, {0.5, 1, 2},
       DEMQKD_PHOTONS_COHERENT},
      // mirrored gates
      {{{-0.3, 1.0, 0.1, 0.1}}, {{0.3, 1.0, 0.1, 0.1}}, true, wide, {1}, DEMQKD_PHOTONS_SINGLE},
      {{{-0.3, 1.0, 0.1, 0.15}}, {{0.3, 1.0, 0.1, 0.15}}, true, wide, {0.5, 1, 2}, DEMQKD_PHOTONS_COHERENT},
      // blind zones
      {{{-1, 0.1}, {0, 0.1}, {0.01, 0}, {1, 0}}, {{-1, 0}, {-0.01, 0}, {0, 0.1}, {1, 0.1}}, false,
       {-1, -0.6, -0.2, 0.2, 0.6, 1}, {1}, DEMQKD_PHOTONS_COHERENT},
  };
  auto make = [](const std::vector<std::vector<double>>& spec, bool gate) {
    demqkd_curve* c = nullptr;
    if (gate) {
      demqkd_curve_gate(spec[0][0], spec[0][1], spec[0][2], spec[0][3], &c);
    } else {
      std::vector<double> t, e;
      for (const auto& r : spec) {
        t.push_back(r[0]);
        e.push_back(r[1]);
      }
      demqkd_curve_tabulated(t.data(), e.data(), t.size(), &c);
    }
    return c;
  };
  int agreed = 0;
  for (const auto& c : cases) {
    demqkd_curve* a = make(c.c0, c.gates);
    demqkd_curve* b = make(c.c1, c.gates);
    demqkd_pair* p = nullptr;
    demqkd_pair_create(a, b, 0, 0, &p);
    demqkd_equal_rate_optimum got{};
    const auto st = demqkd_optimize_equal_rates(p, c.ts.data(), c.ts.size(), c.mus.data(), c.mus.size(), c.stats, &got);
    // exhaustive search
    double best_q = std::numeric_limits<double>::infinity();
    std::tuple<double, double, double, double> arg{};
    for (double t0 : c.ts)
      for (double t1 : c.ts)
        for (double m0 : c.mus)
          for (double m1 : c.mus) {
            double e00, e10, e01, e11;
            demqkd_pair_eval(p, t0, &e00, &e10);
            demqkd_pair_eval(p, t1, &e01, &e11);
            const auto r = attack_rates(oracle::eff(e00, e10, e01, e11), m0, m1, c.stats == DEMQKD_PHOTONS_SINGLE);
            if (!(r.r0 + r.r1 > 0) || std::abs(r.r0 - r.r1) > 1e-3 * (r.r0 + r.r1)) continue;
            const double q = r.errors / (r.r0 + r.r1);
            const auto key = std::make_tuple(t0, t1, m0, m1);
            if (q < best_q - 1e-12 || (std::abs(q - best_q) <= 1e-12 && key < arg)) {
              best_q = q;
              arg = key;
            }
          }
    const bool match = st == DEMQKD_OK && std::isfinite(best_q) && std::abs(got.qber - best_q) < 1e-12 &&
                       std::make_tuple(got.t0_ns, got.t1_ns, got.mu0, got.mu1) == arg;
    o.require(match, "case " + std::to_string(agreed + 1) + ": optimizer qber " + fmt("%.9g", got.qber) +
                         ", exhaustive " + fmt("%.9g", best_q));
    agreed += match ? 1 : 0;
    demqkd_pair_free(p);
    demqkd_curve_free(a);
    demqkd_curve_free(b);
  }
  if (o.ok) o.detail = std::to_string(agreed) + " synthetic pairs, argmin and QBER identical to exhaustive search";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "threshold reproduction", 1, threshold},
      {2, "maximum information gap", 1, max_gap},
      {3, "security bound and 30:1 audit", 1, bound},
      {4, "closed forms equal enumeration", 30, oracle_equivalence},
      {5, "Markov property", 30, markov},
      {6, "Monte Carlo fidelity", 60, monte_carlo},
      {7, "mixture bound", 30, mixtures},
      {8, "nondemolition measurement suite", 30, qnd_suite},
      {9, "jitter countermeasure", 30, countermeasure},
      {10, "equal-rate optimizer vs exhaustive search", 30, optimizer},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = c.run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.ok && secs > c.budget_s) o = {false, "took " + fmt("%.2f", secs) + " s, budget " + fmt("%.0f", c.budget_s) + " s"};
    std::printf("%s criterion %d: %s: %s [%.2f s]\n", o.ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.ok ? 0 : 1;
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
