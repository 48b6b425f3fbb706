#include <doctest.h>

#include <demqkd/demqkd.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

std::string last_error() { return demqkd_last_error(); }

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "demqkd_capi_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

const char* kConfig = R"({
  "simulation": {"n_pulses": 20000, "seed": 11},
  "source": {"statistics": "single_photon"},
  "detectors": {"curve0": {"tabulated": [[0, 0.6], [1, 0.2]]}, "curve1": {"tabulated": [[0, 0.2], [1, 0.6]]}},
  "attack": {"t0": 0, "t1": 1, "statistics": "single_photon"}
})";

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::string(demqkd_version()) == "1.0.0");
  double out = 0;
  CHECK(demqkd_pa_rate(1.5, &out) == DEMQKD_E_INVALID);
  CHECK_FALSE(last_error().empty());
  CHECK(demqkd_pa_rate(0.1, &out) == DEMQKD_OK);
  CHECK(last_error().empty());
  CHECK(demqkd_pa_rate(0.1, nullptr) == DEMQKD_E_INVALID);
  CHECK(last_error().find("NULL") != std::string::npos);
  demqkd_string_free(nullptr);
}

TEST_CASE("curve handles") {
  demqkd_curve* g = nullptr;
  REQUIRE(demqkd_curve_gate(0, 1, 0.05, 0.2, &g) == DEMQKD_OK);
  CHECK(demqkd_curve_eval(g, 0) == doctest::Approx(0.2).epsilon(1e-3));
  CHECK(demqkd_curve_eval(g, 5) < 1e-12);
  CHECK(std::isnan(demqkd_curve_eval(nullptr, 0)));

  demqkd_curve* bad = nullptr;
  CHECK(demqkd_curve_gate(0, 1, 0.05, 1.5, &bad) == DEMQKD_E_INVALID);
  CHECK(bad == nullptr);

  const double t[] = {0, 1, 2};
  const double e[] = {0.1, 0.3, 0.1};
  demqkd_curve* tab = nullptr;
  REQUIRE(demqkd_curve_tabulated(t, e, 3, &tab) == DEMQKD_OK);
  CHECK(demqkd_curve_eval(tab, 0.5) == doctest::Approx(0.2));
  const double backwards[] = {1, 0, 2};
  demqkd_curve* tb = nullptr;
  CHECK(demqkd_curve_tabulated(backwards, e, 3, &tb) == DEMQKD_E_INVALID);
  CHECK(demqkd_curve_tabulated(nullptr, e, 3, &tb) == DEMQKD_E_INVALID);

  demqkd_curve* smeared = nullptr;
  REQUIRE(demqkd_curve_smear(g, DEMQKD_JITTER_GAUSSIAN, 0.1, 0.005, &smeared) == DEMQKD_OK);
  CHECK(demqkd_curve_eval(smeared, 0) < demqkd_curve_eval(g, 0));
  CHECK(demqkd_curve_eval(smeared, 0.55) > demqkd_curve_eval(g, 0.55));
  CHECK(demqkd_curve_smear(g, DEMQKD_JITTER_UNIFORM, -1, 0.005, &tb) == DEMQKD_E_INVALID);
  CHECK(demqkd_curve_smear(g, static_cast<demqkd_jitter_kind>(9), 0.1, 0.005, &tb) == DEMQKD_E_INVALID);

  demqkd_curve_free(smeared);
  demqkd_curve_free(tab);
  demqkd_curve_free(g);
  demqkd_curve_free(nullptr);
}

TEST_CASE("pairs and the mismatch search") {
  demqkd_curve *c0 = nullptr, *c1 = nullptr;
  REQUIRE(demqkd_curve_gate(0, 1, 0.05, 0.2, &c0) == DEMQKD_OK);
  REQUIRE(demqkd_curve_gate(0.3, 1, 0.05, 0.2, &c1) == DEMQKD_OK);
  demqkd_pair* p = nullptr;
  REQUIRE(demqkd_pair_create(c0, c1, 0, 0, &p) == DEMQKD_OK);
  // the pair owns copies
  demqkd_curve_free(c0);
  demqkd_curve_free(c1);
  double e0 = 0, e1 = 0;
  REQUIRE(demqkd_pair_eval(p, 0.15, &e0, &e1) == DEMQKD_OK);
  CHECK(e0 == doctest::Approx(e1));

  demqkd_mismatch m;
  REQUIRE(demqkd_mismatch_eta(p, -1, 1.5, 1e-4, 1e-3, &m) == DEMQKD_OK);
  CHECK(m.eta < 0.01);
  CHECK(m.floor == 1e-4);
  CHECK(demqkd_mismatch_eta(p, 1, -1, 1e-4, 1e-3, &m) == DEMQKD_E_INVALID);

  demqkd_efficiencies e;
  REQUIRE(demqkd_attack_efficiencies(p, -0.45, 0.75, &e) == DEMQKD_OK);
  CHECK(e.e00 > e.e10);
  CHECK(e.e11 > e.e01);
  demqkd_pair_free(p);
  demqkd_pair_free(nullptr);

  const double t[] = {0, 1};
  const double z[] = {0, 0};
  demqkd_curve* dead = nullptr;
  REQUIRE(demqkd_curve_tabulated(t, z, 2, &dead) == DEMQKD_OK);
  REQUIRE(demqkd_pair_create(dead, dead, 0, 0, &p) == DEMQKD_OK);
  CHECK(demqkd_mismatch_eta(p, 0, 1, 1e-4, 1e-3, &m) == DEMQKD_E_INFEASIBLE);
  demqkd_pair_free(p);
  demqkd_curve_free(dead);
}

TEST_CASE("curve files through the C interface") {
  const auto ok = scratch("pair.csv");
  write_file(ok, "t_ns,eta0,eta1\n0,0.3,0.01\n1,0.3,0.01\n");
  demqkd_pair* p = nullptr;
  REQUIRE(demqkd_pair_load(ok.string().c_str(), 1.0, &p) == DEMQKD_OK);
  double a = 0, b = 0;
  REQUIRE(demqkd_pair_support(p, &a, &b) == DEMQKD_OK);
  CHECK(a == 0);
  CHECK(b == 1);
  demqkd_pair_free(p);

  const auto bad = scratch("bad.csv");
  write_file(bad, "t_ns,eta0,eta1\n0,0.3,0.01\n1,x,0.01\n");
  p = nullptr;
  CHECK(demqkd_pair_load(bad.string().c_str(), 1.0, &p) == DEMQKD_E_PARSE);
  CHECK(last_error().find("3") != std::string::npos);
  CHECK(p == nullptr);
  CHECK(demqkd_pair_load(scratch("missing.csv").string().c_str(), 1.0, &p) == DEMQKD_E_PARSE);
  CHECK(demqkd_pair_load(nullptr, 1.0, &p) == DEMQKD_E_INVALID);
}

TEST_CASE("analytics through the C interface") {
  const demqkd_efficiencies e{0.1, 0.01, 0.02, 0.2};
  demqkd_info closed, enumerated;
  REQUIRE(demqkd_info_report(&e, &closed) == DEMQKD_OK);
  REQUIRE(demqkd_enumerate(&e, &enumerated) == DEMQKD_OK);
  CHECK(std::abs(closed.qber - enumerated.qber) < 1e-12);
  CHECK(std::abs(closed.i_ab - enumerated.i_ab) < 1e-12);
  CHECK(closed.qber == doctest::Approx((0.04 + 0.02) / (0.1 + 0.06 + 0.03 + 0.2)));
  CHECK(std::abs(closed.h_a_given_e - closed.qber) < 1e-12);

  const demqkd_efficiencies zero{0, 0, 0, 0};
  CHECK(demqkd_info_report(&zero, &closed) == DEMQKD_E_INFEASIBLE);
  CHECK(demqkd_enumerate(&zero, &closed) == DEMQKD_E_INFEASIBLE);
  const demqkd_efficiencies over{1.5, 0, 0, 1};
  CHECK(demqkd_info_report(&over, &closed) == DEMQKD_E_INVALID);

  demqkd_symmetric_point s;
  REQUIRE(demqkd_symmetric_curve_point(1.0 / 3, &s) == DEMQKD_OK);
  CHECK(s.qber == doctest::Approx(1.0 / 3));
  CHECK(demqkd_symmetric_curve_point(-0.1, &s) == DEMQKD_E_INVALID);
  CHECK(demqkd_binary_entropy(0.5) == 1.0);
  CHECK(std::isnan(demqkd_binary_entropy(2)));
}

TEST_CASE("security bound through the C interface") {
  CHECK(std::abs(demqkd_delta_star() - 0.110028) < 1e-6);
  double exact = 0, approx = 0;
  REQUIRE(demqkd_qber_budgets(1.0 / 30, &exact, &approx) == DEMQKD_OK);
  CHECK(std::abs(exact - 0.004104) < 1e-6);
  CHECK(std::abs(approx - 0.003667) < 1e-6);
  double w = 0, d = 0;
  REQUIRE(demqkd_worst_case_qber(0.2, 0.5, &w) == DEMQKD_OK);
  REQUIRE(demqkd_actual_delta(w, 0.5, &d) == DEMQKD_OK);
  CHECK(d == doctest::Approx(0.2));
  CHECK(demqkd_actual_delta(0, 0, &d) == DEMQKD_E_INFEASIBLE);

  demqkd_assessment a;
  REQUIRE(demqkd_classify(0.9, 0.05, &a) == DEMQKD_OK);
  CHECK(a.region == DEMQKD_SECURE);
  REQUIRE(demqkd_classify(0.05, 0.02, &a) == DEMQKD_OK);
  CHECK(a.region == DEMQKD_NOT_PROVEN);
  REQUIRE(demqkd_classify(0.0, 0.0, &a) == DEMQKD_OK);
  CHECK(a.region == DEMQKD_INSECURE);
  CHECK(std::isnan(a.delta));
  CHECK(std::string(demqkd_region_name(DEMQKD_SECURE)) == "Secure");
  CHECK(std::string(demqkd_region_name(DEMQKD_NOT_PROVEN)) == "NotProven");
  CHECK(std::string(demqkd_region_name(DEMQKD_INSECURE)) == "Insecure");

  const double weights[] = {0.5, 0.5};
  const demqkd_efficiencies comps[] = {{1, 0, 0, 1}, {1, 1, 1, 1}};
  double q = 0;
  REQUIRE(demqkd_mixture_qber(weights, comps, 2, &q) == DEMQKD_OK);
  CHECK(q == doctest::Approx(0.4));
  const double bad_weights[] = {0.5, 0.2};
  CHECK(demqkd_mixture_qber(bad_weights, comps, 2, &q) == DEMQKD_E_INVALID);
  CHECK(demqkd_mixture_qber(nullptr, comps, 2, &q) == DEMQKD_E_INVALID);
}

TEST_CASE("equal-rate optimizer through the C interface") {
  demqkd_curve *c0 = nullptr, *c1 = nullptr;
  REQUIRE(demqkd_curve_gate(0, 1, 0.05, 0.2, &c0) == DEMQKD_OK);
  REQUIRE(demqkd_curve_gate(0.5, 1, 0.05, 0.2, &c1) == DEMQKD_OK);
  demqkd_pair* p = nullptr;
  REQUIRE(demqkd_pair_create(c0, c1, 0, 0, &p) == DEMQKD_OK);
  const double t[] = {-0.45, -0.2, 0.25, 0.7, 0.95};
  const double mu[] = {0.5, 1, 2};
  demqkd_equal_rate_optimum o;
  REQUIRE(demqkd_optimize_equal_rates(p, t, 5, mu, 3, DEMQKD_PHOTONS_COHERENT, &o) == DEMQKD_OK);
  CHECK(o.qber < 0.01);
  CHECK(std::abs(o.rate0 - o.rate1) <= 1e-3 * (o.rate0 + o.rate1));
  CHECK(demqkd_optimize_equal_rates(p, t, 5, mu, 3, static_cast<demqkd_photon_stats>(7), &o) == DEMQKD_E_INVALID);
  const double far[] = {10, 11};
  CHECK(demqkd_optimize_equal_rates(p, far, 2, mu, 3, DEMQKD_PHOTONS_SINGLE, &o) == DEMQKD_E_INFEASIBLE);
  demqkd_pair_free(p);
  demqkd_curve_free(c0);
  demqkd_curve_free(c1);
}

TEST_CASE("simulation handles") {
  demqkd_sim_config* cfg = nullptr;
  REQUIRE(demqkd_sim_config_parse(kConfig, nullptr, &cfg) == DEMQKD_OK);
  demqkd_sim_stats* s1 = nullptr;
  REQUIRE(demqkd_simulate(cfg, &s1) == DEMQKD_OK);
  REQUIRE(demqkd_sim_config_set_workers(cfg, 5) == DEMQKD_OK);
  demqkd_sim_stats* s5 = nullptr;
  REQUIRE(demqkd_simulate(cfg, &s5) == DEMQKD_OK);

  demqkd_sim_summary a, b;
  REQUIRE(demqkd_sim_stats_summary(s1, &a) == DEMQKD_OK);
  REQUIRE(demqkd_sim_stats_summary(s5, &b) == DEMQKD_OK);
  CHECK(a.sent == 20000);
  CHECK(a.kept == b.kept);
  CHECK(a.errors == b.errors);
  CHECK(a.attack_active == 1);
  CHECK(a.qber == doctest::Approx(0.8 / (0.6 + 0.6 + 0.6 + 0.6)).epsilon(0.05));

  char *csv = nullptr, *json = nullptr;
  REQUIRE(demqkd_sim_stats_format(s1, DEMQKD_FORMAT_CSV, &csv) == DEMQKD_OK);
  REQUIRE(demqkd_sim_stats_format(s1, DEMQKD_FORMAT_SUMMARY, &json) == DEMQKD_OK);
  CHECK(std::strncmp(csv, "sent,", 5) == 0);
  CHECK(json[0] == '{');
  char* csv5 = nullptr;
  REQUIRE(demqkd_sim_stats_format(s5, DEMQKD_FORMAT_CSV, &csv5) == DEMQKD_OK);
  CHECK(std::string(csv) == std::string(csv5));
  CHECK(demqkd_sim_stats_format(s1, static_cast<demqkd_format>(4), &csv5) == DEMQKD_E_INVALID);
  demqkd_string_free(csv);
  demqkd_string_free(csv5);
  demqkd_string_free(json);

  demqkd_sim_stats_free(s1);
  demqkd_sim_stats_free(s5);
  demqkd_sim_config_free(cfg);
  demqkd_sim_stats_free(nullptr);
  demqkd_sim_config_free(nullptr);
}

TEST_CASE("simulation configuration errors") {
  demqkd_sim_config* cfg = nullptr;
  CHECK(demqkd_sim_config_parse("{broken", nullptr, &cfg) == DEMQKD_E_PARSE);
  CHECK(demqkd_sim_config_parse(R"({"detectors": {}, "bogus": 1})", nullptr, &cfg) == DEMQKD_E_INVALID);
  CHECK(cfg == nullptr);
  CHECK(demqkd_sim_config_load(scratch("nope.json").string().c_str(), &cfg) == DEMQKD_E_PARSE);

  const auto path = scratch("cfg.json");
  write_file(path, kConfig);
  REQUIRE(demqkd_sim_config_load(path.string().c_str(), &cfg) == DEMQKD_OK);
  CHECK(demqkd_sim_config_set_workers(cfg, 0) == DEMQKD_E_INVALID);
  demqkd_sim_config_free(cfg);
  CHECK(demqkd_simulate(nullptr, nullptr) == DEMQKD_E_INVALID);
}

TEST_CASE("nondemolition table") {
  demqkd_qnd_params p;
  demqkd_qnd_default_params(&p);
  CHECK(p.bins == 4000);
  CHECK(p.tau_ns == 2.0);
  p.phase_deg = 90;
  demqkd_qnd_row* rows = nullptr;
  size_t n = 0;
  REQUIRE(demqkd_qnd_table(&p, &rows, &n) == DEMQKD_OK);
  CHECK(n == 40);
  double sum = 0;
  int collapsed = 0;
  for (size_t i = 0; i < n; ++i) {
    sum += rows[i].probability;
    CHECK(rows[i].index == i);
    CHECK(rows[i].t_end_ns - rows[i].t_start_ns == doctest::Approx(0.05));
    if (rows[i].collapsed) {
      ++collapsed;
      CHECK(std::abs(rows[i].recovered_phase - 90) < 1e-9);
      CHECK(rows[i].rms_ns <= 0.05);
    } else {
      CHECK(std::isnan(rows[i].recovered_phase));
    }
  }
  CHECK(std::abs(sum - 1) < 1e-10);
  CHECK(collapsed > 0);
  demqkd_qnd_rows_free(rows);

  p.bins = 4001;
  CHECK(demqkd_qnd_table(&p, &rows, &n) == DEMQKD_E_INVALID);
  demqkd_qnd_default_params(&p);
  p.resolution_ns = 0.0015;
  CHECK(demqkd_qnd_table(&p, &rows, &n) == DEMQKD_E_INVALID);
  demqkd_qnd_default_params(&p);
  p.delta_per_ns = 3;
  CHECK(demqkd_qnd_table(&p, &rows, &n) == DEMQKD_E_INVALID);
  CHECK(demqkd_qnd_table(nullptr, &rows, &n) == DEMQKD_E_INVALID);
  demqkd_qnd_rows_free(nullptr);
}

TEST_CASE("nondemolition re-projection") {
  demqkd_qnd_params p;
  demqkd_qnd_default_params(&p);
  std::vector<double> probs(40);
  REQUIRE(demqkd_qnd_reprojection(&p, 20, probs.data(), probs.size()) == DEMQKD_OK);
  for (size_t j = 0; j < probs.size(); ++j) CHECK(probs[j] == doctest::Approx(j == 20 ? 1.0 : 0.0).epsilon(1e-12));
  CHECK(demqkd_qnd_reprojection(&p, 20, probs.data(), 39) == DEMQKD_E_INVALID);
  CHECK(demqkd_qnd_reprojection(&p, 40, probs.data(), 40) == DEMQKD_E_INVALID);
  CHECK(demqkd_qnd_reprojection(nullptr, 0, probs.data(), 40) == DEMQKD_E_INVALID);
}
