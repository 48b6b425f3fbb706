#include "demqkd/demqkd.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "attack.hpp"
#include "curve_io.hpp"
#include "curves.hpp"
#include "error.hpp"
#include "montecarlo.hpp"
#include "qnd.hpp"
#include "security.hpp"
#include "sim_config.hpp"

using namespace demqkd;

struct demqkd_curve {
  curves::EfficiencyCurve curve;
};
struct demqkd_pair {
  curves::DetectorPair pair;
};
struct demqkd_sim_config {
  montecarlo::SimConfig cfg;
};
struct demqkd_sim_stats {
  montecarlo::SimStats stats;
};

namespace {

thread_local std::string g_error;

demqkd_status fail(demqkd_status s, const char* msg) {
  g_error = msg;
  return s;
}

template <typename F>
demqkd_status guard(F&& f) {
  try {
    f();
    g_error.clear();
    return DEMQKD_OK;
  } catch (const ParseError& e) {
    return fail(DEMQKD_E_PARSE, e.what());
  } catch (const Infeasible& e) {
    return fail(DEMQKD_E_INFEASIBLE, e.what());
  } catch (const InvalidArgument& e) {
    return fail(DEMQKD_E_INVALID, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DEMQKD_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DEMQKD_E_INTERNAL, e.what());
  } catch (...) {
    return fail(DEMQKD_E_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (!p) throw InvalidArgument(std::string(name) + " must not be NULL");
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

analytics::AttackEfficiencies to_cpp(const demqkd_efficiencies& e) { return {e.e00, e.e10, e.e01, e.e11}; }

demqkd_info to_c(const analytics::InfoReport& r) {
  return {r.p_arrive, r.qber, r.h_a, r.h_a_given_e, r.h_a_given_b, r.i_ae, r.i_ab};
}

qnd::TimeGrid qnd_grid(const demqkd_qnd_params& p) {
  if (p.bins < 2 || p.bins % 2 != 0) throw InvalidArgument("bins must be a positive even number");
  if (!(p.tau_ns > 0.0) || !std::isfinite(p.tau_ns)) throw InvalidArgument("tau must be > 0");
  qnd::TimeGrid grid;
  grid.t_start = 0.0;
  grid.n_bins = p.bins;
  grid.tau = p.tau_ns;
  grid.dt = 2.0 * p.tau_ns / static_cast<double>(p.bins);
  return grid;
}

}  // namespace

extern "C" {

const char* demqkd_last_error(void) { return g_error.c_str(); }

const char* demqkd_version(void) { return "1.0.0"; }

void demqkd_string_free(char* s) { std::free(s); }

demqkd_status demqkd_curve_gate(double center_ns, double plateau_width_ns, double edge_scale_ns,
                                double peak_efficiency, demqkd_curve** out) {
  return guard([&] {
    need(out, "out");
    *out = new demqkd_curve{
        curves::EfficiencyCurve::gate({center_ns, plateau_width_ns, edge_scale_ns, peak_efficiency})};
  });
}

demqkd_status demqkd_curve_tabulated(const double* t_ns, const double* eta, size_t n, demqkd_curve** out) {
  return guard([&] {
    need(out, "out");
    if (n > 0) {
      need(t_ns, "t_ns");
      need(eta, "eta");
    }
    std::vector<curves::Sample> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = {t_ns[i], eta[i]};
    *out = new demqkd_curve{curves::EfficiencyCurve::tabulated(std::move(s))};
  });
}

demqkd_status demqkd_curve_smear(const demqkd_curve* curve, demqkd_jitter_kind kind, double scale_ns,
                                 double grid_step_ns, demqkd_curve** out) {
  return guard([&] {
    need(curve, "curve");
    need(out, "out");
    if (kind != DEMQKD_JITTER_GAUSSIAN && kind != DEMQKD_JITTER_UNIFORM)
      throw InvalidArgument("unknown jitter kind");
    const curves::JitterDistribution j{
        kind == DEMQKD_JITTER_GAUSSIAN ? curves::JitterKind::Gaussian : curves::JitterKind::Uniform, scale_ns};
    *out = new demqkd_curve{curves::jitter_smear(curve->curve, j, grid_step_ns)};
  });
}

double demqkd_curve_eval(const demqkd_curve* curve, double t_ns) {
  if (!curve) return std::numeric_limits<double>::quiet_NaN();
  return curve->curve.eval(t_ns);
}

void demqkd_curve_free(demqkd_curve* curve) { delete curve; }

demqkd_status demqkd_pair_create(const demqkd_curve* curve0, const demqkd_curve* curve1, double dark0,
                                 double dark1, demqkd_pair** out) {
  return guard([&] {
    need(curve0, "curve0");
    need(curve1, "curve1");
    need(out, "out");
    *out = new demqkd_pair{curves::DetectorPair(curve0->curve, curve1->curve, dark0, dark1)};
  });
}

demqkd_status demqkd_pair_load(const char* path, double calibration, demqkd_pair** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new demqkd_pair{curves::load_curve_csv(path, calibration).pair};
  });
}

demqkd_status demqkd_pair_support(const demqkd_pair* pair, double* t_from, double* t_to) {
  return guard([&] {
    need(pair, "pair");
    need(t_from, "t_from");
    need(t_to, "t_to");
    const auto [a, b] = pair->pair.support();
    *t_from = a;
    *t_to = b;
  });
}

demqkd_status demqkd_pair_eval(const demqkd_pair* pair, double t_ns, double* eta0, double* eta1) {
  return guard([&] {
    need(pair, "pair");
    if (eta0) *eta0 = pair->pair.curve0.eval(t_ns);
    if (eta1) *eta1 = pair->pair.curve1.eval(t_ns);
  });
}

void demqkd_pair_free(demqkd_pair* pair) { delete pair; }

demqkd_status demqkd_mismatch_eta(const demqkd_pair* pair, double t_from, double t_to, double floor,
                                  double step_ns, demqkd_mismatch* out) {
  return guard([&] {
    need(pair, "pair");
    need(out, "out");
    const auto r = curves::mismatch_eta(pair->pair, t_from, t_to, {floor, step_ns});
    *out = {r.eta, r.t,
            r.direction == curves::MismatchDirection::OneOverZero ? DEMQKD_ONE_OVER_ZERO : DEMQKD_ZERO_OVER_ONE,
            r.floor, r.step};
  });
}

demqkd_status demqkd_attack_efficiencies(const demqkd_pair* pair, double t0_ns, double t1_ns,
                                         demqkd_efficiencies* out) {
  return guard([&] {
    need(pair, "pair");
    need(out, "out");
    const auto e = analytics::attack_efficiencies(pair->pair, {t0_ns, t1_ns});
    *out = {e.e00, e.e10, e.e01, e.e11};
  });
}

demqkd_status demqkd_info_report(const demqkd_efficiencies* e, demqkd_info* out) {
  return guard([&] {
    need(e, "e");
    need(out, "out");
    *out = to_c(analytics::info_report(to_cpp(*e)));
  });
}

demqkd_status demqkd_enumerate(const demqkd_efficiencies* e, demqkd_info* out) {
  return guard([&] {
    need(e, "e");
    need(out, "out");
    const auto r = attack::enumerate_table(to_cpp(*e), {});
    if (std::isnan(r.qber)) throw Infeasible("no pulse reaches Bob's detectors");
    *out = to_c(r.info);
  });
}

demqkd_status demqkd_symmetric_curve_point(double eta, demqkd_symmetric_point* out) {
  return guard([&] {
    need(out, "out");
    const auto p = analytics::symmetric_curve_point(eta);
    *out = {p.qber, p.i_ab, p.i_ae};
  });
}

demqkd_status demqkd_optimize_equal_rates(const demqkd_pair* pair, const double* t_grid, size_t n_t,
                                          const double* mu_grid, size_t n_mu, demqkd_photon_stats stats,
                                          demqkd_equal_rate_optimum* out) {
  return guard([&] {
    need(pair, "pair");
    need(t_grid, "t_grid");
    need(mu_grid, "mu_grid");
    need(out, "out");
    attack::PhotonStatistics ps;
    switch (stats) {
      case DEMQKD_PHOTONS_SINGLE:
        ps = attack::PhotonStatistics::SinglePhoton;
        break;
      case DEMQKD_PHOTONS_COHERENT:
        ps = attack::PhotonStatistics::Coherent;
        break;
      case DEMQKD_PHOTONS_FOCK:
        ps = attack::PhotonStatistics::Fock;
        break;
      default:
        throw InvalidArgument("unknown photon statistics");
    }
    const auto o = attack::optimize_equal_rates(pair->pair, {t_grid, n_t}, {mu_grid, n_mu}, ps);
    *out = {o.timing.t0, o.timing.t1, o.mu0, o.mu1, o.qber, o.rate0, o.rate1};
  });
}

double demqkd_binary_entropy(double x) {
  try {
    return analytics::binary_entropy(x);
  } catch (...) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double demqkd_delta_star(void) { return security::delta_star(); }

demqkd_status demqkd_worst_case_qber(double delta, double eta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = security::worst_case_qber(delta, eta);
  });
}

demqkd_status demqkd_actual_delta(double measured_qber, double eta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = security::actual_delta(measured_qber, eta);
  });
}

demqkd_status demqkd_pa_rate(double delta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = security::pa_rate(delta);
  });
}

demqkd_status demqkd_qber_budgets(double eta, double* exact, double* approx) {
  return guard([&] {
    need(exact, "exact");
    need(approx, "approx");
    *exact = security::exact_qber_budget(eta);
    *approx = security::approx_qber_budget(eta);
  });
}

demqkd_status demqkd_classify(double eta, double measured_qber, demqkd_assessment* out) {
  return guard([&] {
    need(out, "out");
    const auto a = security::classify(eta, measured_qber);
    demqkd_region r = DEMQKD_NOT_PROVEN;
    if (a.region == security::Region::Secure) r = DEMQKD_SECURE;
    if (a.region == security::Region::Insecure) r = DEMQKD_INSECURE;
    *out = {a.eta, a.measured_qber, a.delta, a.rate, r};
  });
}

demqkd_status demqkd_mixture_qber(const double* weights, const demqkd_efficiencies* components, size_t n,
                                  double* out) {
  return guard([&] {
    need(weights, "weights");
    need(components, "components");
    need(out, "out");
    std::vector<std::pair<double, analytics::AttackEfficiencies>> mix;
    mix.reserve(n);
    for (size_t i = 0; i < n; ++i) mix.emplace_back(weights[i], to_cpp(components[i]));
    *out = security::mixture_qber(mix);
  });
}

const char* demqkd_region_name(demqkd_region region) {
  switch (region) {
    case DEMQKD_SECURE:
      return "Secure";
    case DEMQKD_NOT_PROVEN:
      return "NotProven";
    case DEMQKD_INSECURE:
      return "Insecure";
  }
  return "unknown";
}

demqkd_status demqkd_sim_config_parse(const char* json, const char* base_dir, demqkd_sim_config** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = new demqkd_sim_config{montecarlo::parse_sim_config(json, base_dir ? base_dir : ".")};
  });
}

demqkd_status demqkd_sim_config_load(const char* path, demqkd_sim_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(std::string("cannot open ") + path);
    std::ostringstream text;
    text << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    *out = new demqkd_sim_config{montecarlo::parse_sim_config(text.str(), dir.empty() ? "." : dir.string())};
  });
}

demqkd_status demqkd_sim_config_set_workers(demqkd_sim_config* cfg, unsigned workers) {
  return guard([&] {
    need(cfg, "cfg");
    if (workers == 0) throw InvalidArgument("workers must be positive");
    cfg->cfg.workers = workers;
  });
}

void demqkd_sim_config_free(demqkd_sim_config* cfg) { delete cfg; }

demqkd_status demqkd_simulate(const demqkd_sim_config* cfg, demqkd_sim_stats** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new demqkd_sim_stats{montecarlo::run(cfg->cfg)};
  });
}

demqkd_status demqkd_sim_stats_summary(const demqkd_sim_stats* stats, demqkd_sim_summary* out) {
  return guard([&] {
    need(stats, "stats");
    need(out, "out");
    const auto& s = stats->stats;
    *out = {s.sent,      s.basis_matched, s.detected,      s.sifted,          s.kept,
            s.errors,    s.double_clicks, s.clicks[0],     s.clicks[1],       s.eve_agree,
            s.qber(),    s.qber_stderr(), s.p_arrive(),    s.eve_agreement(), s.attack_active ? 1 : 0};
  });
}

demqkd_status demqkd_sim_stats_format(const demqkd_sim_stats* stats, demqkd_format format, char** out) {
  return guard([&] {
    need(stats, "stats");
    need(out, "out");
    if (format == DEMQKD_FORMAT_CSV)
      *out = dup(montecarlo::stats_to_csv(stats->stats));
    else if (format == DEMQKD_FORMAT_SUMMARY)
      *out = dup(montecarlo::stats_to_json(stats->stats));
    else
      throw InvalidArgument("unknown format");
  });
}

void demqkd_sim_stats_free(demqkd_sim_stats* stats) { delete stats; }

void demqkd_qnd_default_params(demqkd_qnd_params* out) {
  if (!out) return;
  *out = {0.0, 0.05, 4000, 2.0, 10.0, 50.0, 1.0};
}

demqkd_status demqkd_qnd_table(const demqkd_qnd_params* params, demqkd_qnd_row** rows, size_t* n_rows) {
  return guard([&] {
    need(params, "params");
    need(rows, "rows");
    need(n_rows, "n_rows");
    const auto& p = *params;
    const auto grid = qnd_grid(p);
    const auto state = qnd::make_qubit_state(p.phase_deg, p.t0_ns, grid, p.omega0_rad_per_ns, p.delta_per_ns);
    const auto n = qnd::interval_count(grid, p.resolution_ns);
    std::vector<demqkd_qnd_row> table(n);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 0; i < n; ++i) {
      const auto proj = qnd::project_timing(state, i, p.resolution_ns);
      auto& r = table[i];
      r.index = i;
      r.t_start_ns = grid.t_start + static_cast<double>(i) * p.resolution_ns;
      r.t_end_ns = std::min(r.t_start_ns + p.resolution_ns, grid.t_start + grid.tau);
      r.probability = proj.probability;
      r.collapsed = proj.collapsed ? 1 : 0;
      r.recovered_phase = proj.collapsed ? qnd::recovered_phase(*proj.collapsed) : nan;
      r.rms_ns = proj.collapsed ? qnd::rms_duration(*proj.collapsed) : nan;
    }
    auto* buf = static_cast<demqkd_qnd_row*>(std::malloc(sizeof(demqkd_qnd_row) * (n ? n : 1)));
    if (!buf) throw std::bad_alloc();
    std::copy(table.begin(), table.end(), buf);
    *rows = buf;
    *n_rows = n;
  });
}

void demqkd_qnd_rows_free(demqkd_qnd_row* rows) { std::free(rows); }

demqkd_status demqkd_qnd_reprojection(const demqkd_qnd_params* params, size_t collapse_index, double* probs,
                                      size_t n_probs) {
  return guard([&] {
    need(params, "params");
    need(probs, "probs");
    const auto& p = *params;
    const auto grid = qnd_grid(p);
    const auto state = qnd::make_qubit_state(p.phase_deg, p.t0_ns, grid, p.omega0_rad_per_ns, p.delta_per_ns);
    const auto n = qnd::interval_count(grid, p.resolution_ns);
    if (n_probs != n) throw InvalidArgument("expected " + std::to_string(n) + " cells");
    const auto first = qnd::project_timing(state, collapse_index, p.resolution_ns);
    if (!first.collapsed) throw Infeasible("cell " + std::to_string(collapse_index) + " has zero probability");
    for (size_t j = 0; j < n; ++j) probs[j] = qnd::project_timing(*first.collapsed, j, p.resolution_ns).probability;
  });
}

}  // extern "C"
