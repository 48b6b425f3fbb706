#include "sim_config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "curve_io.hpp"
#include "error.hpp"

namespace demqkd::montecarlo {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InvalidArgument(path + ": " + msg);
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (auto allowed : keys) known = known || k == allowed;
    if (!known) fail(path.empty() ? k : path + "." + k, "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& obj, const std::string& path, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) fail(path + "." + key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& path, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

PhotonStatistics parse_statistics(const std::string& s, const std::string& path) {
  if (s == "single_photon") return PhotonStatistics::SinglePhoton;
  if (s == "coherent") return PhotonStatistics::Coherent;
  if (s == "fock") return PhotonStatistics::Fock;
  fail(path, "expected single_photon, coherent or fock");
}

curves::EfficiencyCurve parse_curve(const json& j, const std::string& path, const std::string& base_dir) {
  require_object(j, path);
  int sources = 0;
  for (const char* k : {"gate", "constant", "tabulated", "file"}) sources += j.contains(k);
  if (sources != 1) fail(path, "exactly one of gate, constant, tabulated, file is required");

  try {
    if (j.contains("gate")) {
      allow_keys(j, path, {"gate"});
      const std::string p = path + ".gate";
      const auto& g = require_object(j.at("gate"), p);
      allow_keys(g, p, {"center", "plateau_width", "edge_scale", "peak_efficiency"});
      curves::GateShape shape;
      shape.center = get_number(g, p, "center", shape.center);
      shape.plateau_width = get_number(g, p, "plateau_width", shape.plateau_width);
      shape.edge_scale = get_number(g, p, "edge_scale", shape.edge_scale);
      shape.peak_efficiency = get_number(g, p, "peak_efficiency", shape.peak_efficiency);
      return curves::EfficiencyCurve::gate(shape);
    }
    if (j.contains("constant")) {
      allow_keys(j, path, {"constant"});
      const std::string p = path + ".constant";
      const auto& c = require_object(j.at("constant"), p);
      allow_keys(c, p, {"eta", "from", "to"});
      return curves::EfficiencyCurve::constant(get_number(c, p, "eta", 0.1), get_number(c, p, "from", -100.0),
                                               get_number(c, p, "to", 100.0));
    }
    if (j.contains("tabulated")) {
      allow_keys(j, path, {"tabulated"});
      const auto& rows = j.at("tabulated");
      if (!rows.is_array()) fail(path + ".tabulated", "expected an array of [t, eta] pairs");
      std::vector<curves::Sample> samples;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
          fail(path + ".tabulated[" + std::to_string(i) + "]", "expected [t, eta]");
        samples.push_back({r[0].get<double>(), r[1].get<double>()});
      }
      return curves::EfficiencyCurve::tabulated(std::move(samples));
    }
    allow_keys(j, path, {"file", "column", "calibration"});
    const auto file = get_string(j, path, "file", "");
    const auto column = get_string(j, path, "column", "eta0");
    if (column != "eta0" && column != "eta1") fail(path + ".column", "expected eta0 or eta1");
    std::filesystem::path fp(file);
    if (fp.is_relative()) fp = std::filesystem::path(base_dir) / fp;
    auto loaded = curves::load_curve_csv(fp.string(), get_number(j, path, "calibration", 1.0));
    return column == "eta0" ? loaded.pair.curve0 : loaded.pair.curve1;
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    fail(path, what);
  }
}

double round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

ordered_json stats_object(const SimStats& s) {
  ordered_json j;
  j["sent"] = s.sent;
  j["basis_matched"] = s.basis_matched;
  j["detected"] = s.detected;
  j["sifted"] = s.sifted;
  j["kept"] = s.kept;
  j["errors"] = s.errors;
  j["qber"] = round9(s.qber());
  j["qber_stderr"] = round9(s.qber_stderr());
  j["p_arrive"] = round9(s.p_arrive());
  j["double_clicks"] = s.double_clicks;
  j["clicks0"] = s.clicks[0];
  j["clicks1"] = s.clicks[1];
  j["click_rate0"] = round9(s.click_rate(0));
  j["click_rate1"] = round9(s.click_rate(1));
  static constexpr const char* kBasis[2] = {"Z", "X"};
  static constexpr const char* kOutcome[4] = {"none", "click0", "click1", "double"};
  for (int b = 0; b < 2; ++b)
    for (int k = 0; k < 4; ++k)
      j[std::string("coinc_") + kBasis[b] + "_" + kOutcome[k]] = s.coincidences[b][k];
  j["attack_active"] = s.attack_active;
  j["bob_agreement"] = round9(s.bob_agreement());
  j["eve_agreement"] = s.attack_active ? ordered_json(round9(s.eve_agreement())) : ordered_json(nullptr);
  return j;
}

}  // namespace

SimConfig parse_sim_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("configuration is not valid JSON: ") + e.what());
  }
  require_object(root, "config");
  allow_keys(root, "", {"simulation", "source", "detectors", "attack"});

  if (!root.contains("detectors")) fail("detectors", "missing");
  const auto& det = require_object(root.at("detectors"), "detectors");
  allow_keys(det, "detectors", {"curve0", "curve1", "dark0", "dark1"});
  if (!det.contains("curve0")) fail("detectors.curve0", "missing");
  if (!det.contains("curve1")) fail("detectors.curve1", "missing");
  const double dark0 = get_number(det, "detectors", "dark0", 0.0);
  const double dark1 = get_number(det, "detectors", "dark1", 0.0);
  if (!(dark0 >= 0 && dark0 < 1)) fail("detectors.dark0", "must lie in [0,1)");
  if (!(dark1 >= 0 && dark1 < 1)) fail("detectors.dark1", "must lie in [0,1)");
  SimConfig cfg(curves::DetectorPair(parse_curve(det.at("curve0"), "detectors.curve0", base_dir),
                                     parse_curve(det.at("curve1"), "detectors.curve1", base_dir), dark0,
                                     dark1));

  if (root.contains("simulation")) {
    const auto& sim = require_object(root.at("simulation"), "simulation");
    allow_keys(sim, "simulation",
               {"n_pulses", "seed", "workers", "channel_transmittance", "nominal_arrival_time",
                "double_click_policy"});
    cfg.n_pulses = get_count(sim, "simulation", "n_pulses", cfg.n_pulses);
    cfg.seed = get_count(sim, "simulation", "seed", cfg.seed);
    cfg.workers = static_cast<unsigned>(get_count(sim, "simulation", "workers", cfg.workers));
    cfg.channel_transmittance = get_number(sim, "simulation", "channel_transmittance", cfg.channel_transmittance);
    cfg.nominal_arrival_time = get_number(sim, "simulation", "nominal_arrival_time", cfg.nominal_arrival_time);
    const auto policy = get_string(sim, "simulation", "double_click_policy", "random_assign");
    if (policy == "random_assign")
      cfg.double_click_policy = DoubleClickPolicy::RandomAssign;
    else if (policy == "discard")
      cfg.double_click_policy = DoubleClickPolicy::Discard;
    else
      fail("simulation.double_click_policy", "expected random_assign or discard");
    if (cfg.n_pulses == 0) fail("simulation.n_pulses", "must be positive");
    if (cfg.workers == 0) fail("simulation.workers", "must be positive");
    if (!(cfg.channel_transmittance > 0 && cfg.channel_transmittance <= 1))
      fail("simulation.channel_transmittance", "must lie in (0,1]");
  }

  if (root.contains("source")) {
    const auto& src = require_object(root.at("source"), "source");
    allow_keys(src, "source", {"statistics", "mu"});
    cfg.alice_stats = parse_statistics(get_string(src, "source", "statistics", "single_photon"), "source.statistics");
    cfg.alice_mu = get_number(src, "source", "mu", cfg.alice_mu);
    if (!(cfg.alice_mu >= 0)) fail("source.mu", "must be >= 0");
  }

  if (root.contains("attack")) {
    const auto& atk = require_object(root.at("attack"), "attack");
    allow_keys(atk, "attack", {"enabled", "t0", "t1", "statistics", "mu_t0", "mu_t1"});
    bool enabled = true;
    if (atk.contains("enabled")) {
      if (!atk.at("enabled").is_boolean()) fail("attack.enabled", "expected true or false");
      enabled = atk.at("enabled").get<bool>();
    }
    AttackConfig a;
    a.timing.t0 = get_number(atk, "attack", "t0", 0.0);
    a.timing.t1 = get_number(atk, "attack", "t1", 0.0);
    a.stats = parse_statistics(get_string(atk, "attack", "statistics", "single_photon"), "attack.statistics");
    a.mu_t0 = get_number(atk, "attack", "mu_t0", 1.0);
    a.mu_t1 = get_number(atk, "attack", "mu_t1", 1.0);
    if (!(a.mu_t0 >= 0)) fail("attack.mu_t0", "must be >= 0");
    if (!(a.mu_t1 >= 0)) fail("attack.mu_t1", "must be >= 0");
    if (enabled) cfg.attack = a;
  }

  validate(cfg);
  return cfg;
}

std::string stats_to_json(const SimStats& stats) { return stats_object(stats).dump(2) + "\n"; }

std::string stats_to_csv(const SimStats& stats) {
  const auto j = stats_object(stats);
  std::ostringstream head, row;
  bool first = true;
  for (const auto& [k, v] : j.items()) {
    if (!first) {
      head << ',';
      row << ',';
    }
    first = false;
    head << k;
    if (v.is_null())
      row << "";
    else
      row << v.dump();
  }
  return head.str() + "\n" + row.str() + "\n";
}

}  // namespace demqkd::montecarlo
