/*
 * C interface to the detector-efficiency-mismatch toolkit: efficiency curves,
 * faked-states attack analytics, security bounds, the pulse-level BB84
 * simulator and the time-bin nondemolition-measurement model.
 *
 * Objects are opaque handles created by the create, load and parse functions and
 * released with the matching *_free. Every fallible call returns a
 * demqkd_status; on failure demqkd_last_error() describes the problem.
 * Handles are immutable after creation and may be shared between threads.
 */
#ifndef DEMQKD_DEMQKD_H
#define DEMQKD_DEMQKD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DEMQKD_BUILDING)
#    define DEMQKD_API __declspec(dllexport)
#  else
#    define DEMQKD_API __declspec(dllimport)
#  endif
#else
#  define DEMQKD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum demqkd_status {
  DEMQKD_OK = 0,
  DEMQKD_E_INVALID = 1,    /* bad argument or configuration */
  DEMQKD_E_PARSE = 2,      /* malformed or unreadable data file */
  DEMQKD_E_INFEASIBLE = 3, /* the requested quantity does not exist for this input */
  DEMQKD_E_INTERNAL = 4
} demqkd_status;

/* Message for the last failed call on this thread. Never NULL. */
DEMQKD_API const char* demqkd_last_error(void);
DEMQKD_API const char* demqkd_version(void);
DEMQKD_API void demqkd_string_free(char* s);

typedef enum demqkd_format { DEMQKD_FORMAT_CSV = 0, DEMQKD_FORMAT_SUMMARY = 1 } demqkd_format;

/* ---- efficiency curves ------------------------------------------------- */

typedef struct demqkd_curve demqkd_curve;
typedef struct demqkd_pair demqkd_pair;

typedef enum demqkd_jitter_kind { DEMQKD_JITTER_GAUSSIAN = 0, DEMQKD_JITTER_UNIFORM = 1 } demqkd_jitter_kind;

DEMQKD_API demqkd_status demqkd_curve_gate(double center_ns, double plateau_width_ns, double edge_scale_ns,
                                           double peak_efficiency, demqkd_curve** out);
DEMQKD_API demqkd_status demqkd_curve_tabulated(const double* t_ns, const double* eta, size_t n,
                                                demqkd_curve** out);
DEMQKD_API demqkd_status demqkd_curve_smear(const demqkd_curve* curve, demqkd_jitter_kind kind,
                                            double scale_ns, double grid_step_ns, demqkd_curve** out);
DEMQKD_API double demqkd_curve_eval(const demqkd_curve* curve, double t_ns);
DEMQKD_API void demqkd_curve_free(demqkd_curve* curve);

DEMQKD_API demqkd_status demqkd_pair_create(const demqkd_curve* curve0, const demqkd_curve* curve1,
                                            double dark0, double dark1, demqkd_pair** out);
/* Reads a processed (t_ns,eta0,eta1) or raw count CSV file. */
DEMQKD_API demqkd_status demqkd_pair_load(const char* path, double calibration, demqkd_pair** out);
DEMQKD_API demqkd_status demqkd_pair_support(const demqkd_pair* pair, double* t_from, double* t_to);
DEMQKD_API demqkd_status demqkd_pair_eval(const demqkd_pair* pair, double t_ns, double* eta0, double* eta1);
DEMQKD_API void demqkd_pair_free(demqkd_pair* pair);

typedef enum demqkd_direction {
  DEMQKD_ONE_OVER_ZERO = 0, /* eta1/eta0 attains the minimum */
  DEMQKD_ZERO_OVER_ONE = 1  /* eta0/eta1 attains the minimum */
} demqkd_direction;

typedef struct demqkd_mismatch {
  double eta;
  double t_ns;
  demqkd_direction direction;
  double floor;
  double step_ns;
} demqkd_mismatch;

DEMQKD_API demqkd_status demqkd_mismatch_eta(const demqkd_pair* pair, double t_from, double t_to,
                                             double floor, double step_ns, demqkd_mismatch* out);

/* ---- attack analytics -------------------------------------------------- */

/* e<detector><timing>: e10 = eta1(t0). */
typedef struct demqkd_efficiencies {
  double e00, e10, e01, e11;
} demqkd_efficiencies;

typedef struct demqkd_info {
  double p_arrive;
  double qber;
  double h_a;
  double h_a_given_e;
  double h_a_given_b;
  double i_ae;
  double i_ab;
} demqkd_info;

typedef struct demqkd_symmetric_point {
  double qber;
  double i_ab;
  double i_ae;
} demqkd_symmetric_point;

DEMQKD_API demqkd_status demqkd_attack_efficiencies(const demqkd_pair* pair, double t0_ns, double t1_ns,
                                                    demqkd_efficiencies* out);
/* Closed-form report. */
DEMQKD_API demqkd_status demqkd_info_report(const demqkd_efficiencies* e, demqkd_info* out);
/* Same quantities by exhaustive enumeration of the attack tree. */
DEMQKD_API demqkd_status demqkd_enumerate(const demqkd_efficiencies* e, demqkd_info* out);
DEMQKD_API demqkd_status demqkd_symmetric_curve_point(double eta, demqkd_symmetric_point* out);
DEMQKD_API double demqkd_binary_entropy(double x);

typedef enum demqkd_photon_stats {
  DEMQKD_PHOTONS_SINGLE = 0,
  DEMQKD_PHOTONS_COHERENT = 1,
  DEMQKD_PHOTONS_FOCK = 2 /* brightness must be a whole number */
} demqkd_photon_stats;

typedef struct demqkd_equal_rate_optimum {
  double t0_ns;
  double t1_ns;
  double mu0;
  double mu1;
  double qber;
  double rate0;
  double rate1;
} demqkd_equal_rate_optimum;

/* Lowest-QBER grid point whose two detection rates agree within 1e-3 of their sum. */
DEMQKD_API demqkd_status demqkd_optimize_equal_rates(const demqkd_pair* pair, const double* t_grid, size_t n_t,
                                                     const double* mu_grid, size_t n_mu,
                                                     demqkd_photon_stats stats, demqkd_equal_rate_optimum* out);

/* ---- security bound ---------------------------------------------------- */

typedef enum demqkd_region { DEMQKD_SECURE = 0, DEMQKD_NOT_PROVEN = 1, DEMQKD_INSECURE = 2 } demqkd_region;

typedef struct demqkd_assessment {
  double eta;
  double measured_qber;
  double delta; /* NaN when undefined */
  double rate;  /* NaN when undefined */
  demqkd_region region;
} demqkd_assessment;

DEMQKD_API double demqkd_delta_star(void);
DEMQKD_API demqkd_status demqkd_worst_case_qber(double delta, double eta, double* out);
DEMQKD_API demqkd_status demqkd_actual_delta(double measured_qber, double eta, double* out);
DEMQKD_API demqkd_status demqkd_pa_rate(double delta, double* out);
/* exact: worst-case QBER at delta_star; approx: 0.11 * eta. */
DEMQKD_API demqkd_status demqkd_qber_budgets(double eta, double* exact, double* approx);
DEMQKD_API demqkd_status demqkd_classify(double eta, double measured_qber, demqkd_assessment* out);
/* QBER of Eve switching between n timing choices; weights sum to 1. */
DEMQKD_API demqkd_status demqkd_mixture_qber(const double* weights, const demqkd_efficiencies* components, size_t n,
                                             double* out);
DEMQKD_API const char* demqkd_region_name(demqkd_region region);

/* ---- Monte Carlo simulation -------------------------------------------- */

typedef struct demqkd_sim_config demqkd_sim_config;
typedef struct demqkd_sim_stats demqkd_sim_stats;

typedef struct demqkd_sim_summary {
  uint64_t sent;
  uint64_t basis_matched;
  uint64_t detected;
  uint64_t sifted;
  uint64_t kept;
  uint64_t errors;
  uint64_t double_clicks;
  uint64_t clicks0;
  uint64_t clicks1;
  uint64_t eve_agree;
  double qber;
  double qber_stderr;
  double p_arrive;
  double eve_agreement;
  int attack_active;
} demqkd_sim_summary;

/* JSON configuration text; relative curve paths resolve against base_dir. */
DEMQKD_API demqkd_status demqkd_sim_config_parse(const char* json, const char* base_dir,
                                                 demqkd_sim_config** out);
DEMQKD_API demqkd_status demqkd_sim_config_load(const char* path, demqkd_sim_config** out);
DEMQKD_API demqkd_status demqkd_sim_config_set_workers(demqkd_sim_config* cfg, unsigned workers);
DEMQKD_API void demqkd_sim_config_free(demqkd_sim_config* cfg);

DEMQKD_API demqkd_status demqkd_simulate(const demqkd_sim_config* cfg, demqkd_sim_stats** out);
DEMQKD_API demqkd_status demqkd_sim_stats_summary(const demqkd_sim_stats* stats, demqkd_sim_summary* out);
/* Caller releases *out with demqkd_string_free. */
DEMQKD_API demqkd_status demqkd_sim_stats_format(const demqkd_sim_stats* stats, demqkd_format format,
                                                 char** out);
DEMQKD_API void demqkd_sim_stats_free(demqkd_sim_stats* stats);

/* ---- time-bin nondemolition measurement -------------------------------- */

typedef struct demqkd_qnd_params {
  double phase_deg;
  double resolution_ns; /* whole multiple of the bin width */
  size_t bins;          /* grid bins over both windows; tau = bins/2 * dt */
  double tau_ns;
  double delta_per_ns;  /* pulse bandwidth */
  double omega0_rad_per_ns;
  double t0_ns;         /* first pulse peak, measured from the grid start */
} demqkd_qnd_params;

typedef struct demqkd_qnd_row {
  size_t index;
  double t_start_ns;
  double t_end_ns;
  double probability;
  int collapsed;          /* 0 when the cell has zero probability */
  double recovered_phase; /* degrees; NaN unless collapsed */
  double rms_ns;          /* post-collapse pulse duration; NaN unless collapsed */
} demqkd_qnd_row;

DEMQKD_API void demqkd_qnd_default_params(demqkd_qnd_params* out);
/* One row per timing cell of the early window. Free with demqkd_qnd_rows_free. */
DEMQKD_API demqkd_status demqkd_qnd_table(const demqkd_qnd_params* params, demqkd_qnd_row** rows,
                                          size_t* n_rows);
DEMQKD_API void demqkd_qnd_rows_free(demqkd_qnd_row* rows);
/* Collapse onto cell `collapse_index`, then write the probability of every cell
   of the same partition to probs[0..n_probs). n_probs must equal the row count
   of demqkd_qnd_table. */
DEMQKD_API demqkd_status demqkd_qnd_reprojection(const demqkd_qnd_params* params, size_t collapse_index,
                                                 double* probs, size_t n_probs);

#ifdef __cplusplus
}
#endif

#endif /* DEMQKD_DEMQKD_H */
