#include "montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace demqkd::montecarlo {

namespace {

using attack::Basis;
using attack::ClickProbs;
using attack::FakedState;

Basis basis_of(int b) { return b ? Basis::X : Basis::Z; }

// Joint distribution of (detector 0 fired, detector 1 fired) once dark
// counts are OR-ed onto the signal clicks.
struct FireDistribution {
  double none, only0, only1, both;
};

FireDistribution fire_distribution(ClickProbs s, bool exclusive, double d0, double d1) {
  if (exclusive) {
    const double quiet = 1 - s.p0 - s.p1;
    const double only0 = (s.p0 + quiet * d0) * (1 - d1);
    const double only1 = (s.p1 + quiet * d1) * (1 - d0);
    const double none = quiet * (1 - d0) * (1 - d1);
    return {none, only0, only1, 1 - none - only0 - only1};
  }
  const double q0 = 1 - (1 - s.p0) * (1 - d0);
  const double q1 = 1 - (1 - s.p1) * (1 - d1);
  return {(1 - q0) * (1 - q1), q0 * (1 - q1), q1 * (1 - q0), q0 * q1};
}

double kept_probability(const FireDistribution& f, DoubleClickPolicy policy) {
  return f.only0 + f.only1 + (policy == DoubleClickPolicy::RandomAssign ? f.both : 0.0);
}

void check_stats(PhotonStatistics stats, double mu, const char* field) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidArgument(std::string(field) + " must be >= 0");
  if (stats == PhotonStatistics::Fock && mu != std::floor(mu))
    throw InvalidArgument(std::string(field) + " must be an integer photon number for Fock states");
}

// Signal probability that Alice's pulse is non-empty when Eve intercepts it.
double alice_nonempty(const SimConfig& cfg) {
  switch (cfg.alice_stats) {
    case PhotonStatistics::SinglePhoton:
      return 1.0;
    case PhotonStatistics::Coherent:
      return -std::expm1(-cfg.alice_mu);
    case PhotonStatistics::Fock:
      return cfg.alice_mu >= 1.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

SimStats run_range(const SimConfig& cfg, std::uint64_t begin, std::uint64_t end) {
  SimStats st;
  st.attack_active = cfg.attack.has_value();
  const double p_nonempty = alice_nonempty(cfg);
  const double eta_nominal[2] = {cfg.pair.curve0.eval(cfg.nominal_arrival_time),
                                 cfg.pair.curve1.eval(cfg.nominal_arrival_time)};

  for (std::uint64_t i = begin; i < end; ++i) {
    CounterStream rng(cfg.seed, i);
    const Basis alice_basis = basis_of(rng.bit());
    const int alice_bit = rng.bit();

    // Pulse reaching Bob, if any, and the statistics governing its clicks.
    bool has_pulse = true;
    FakedState pulse;
    PhotonStatistics stats;
    double eta[2];
    int eve_bit = -1;
    if (cfg.attack) {
      const Basis eve_basis = basis_of(rng.bit());
      const int coin = rng.bit();
      const bool nonempty = rng.bernoulli(p_nonempty);
      has_pulse = nonempty;
      const int measured = eve_basis == alice_basis ? alice_bit : coin;
      if (nonempty) eve_bit = measured;
      pulse = attack::faked_state_for(eve_basis, measured, cfg.attack->timing);
      pulse.mu = measured == 0 ? cfg.attack->mu_t0 : cfg.attack->mu_t1;
      stats = cfg.attack->stats;
      eta[0] = cfg.pair.curve0.eval(pulse.timing);
      eta[1] = cfg.pair.curve1.eval(pulse.timing);
    } else {
      pulse = {alice_basis, alice_bit, cfg.nominal_arrival_time, 1.0};
      stats = cfg.alice_stats;
      if (stats == PhotonStatistics::SinglePhoton) {
        has_pulse = rng.bernoulli(cfg.channel_transmittance);
      } else if (stats == PhotonStatistics::Coherent) {
        pulse.mu = cfg.alice_mu * cfg.channel_transmittance;
      } else {
        // Each of the n photons survives the channel independently.
        const auto n = static_cast<std::uint64_t>(cfg.alice_mu);
        std::uint64_t survivors = 0;
        for (std::uint64_t k = 0; k < n; ++k) survivors += rng.bernoulli(cfg.channel_transmittance);
        pulse.mu = static_cast<double>(survivors);
      }
      eta[0] = eta_nominal[0];
      eta[1] = eta_nominal[1];
    }
    const Basis bob_basis = basis_of(rng.bit());

    bool fire[2] = {false, false};
    if (has_pulse) {
      const ClickProbs cp = attack::bob_click_probs(pulse, bob_basis, eta[0], eta[1], stats);
      if (stats == PhotonStatistics::SinglePhoton) {
        const double u = rng.uniform();
        fire[0] = u < cp.p0;
        fire[1] = !fire[0] && u < cp.p0 + cp.p1;
      } else {
        fire[0] = rng.bernoulli(cp.p0);
        fire[1] = rng.bernoulli(cp.p1);
      }
    }
    fire[0] = rng.bernoulli(cfg.pair.dark0) || fire[0];
    fire[1] = rng.bernoulli(cfg.pair.dark1) || fire[1];
    const int assign_coin = rng.bit();

    ++st.sent;
    const bool matched = bob_basis == alice_basis;
    st.basis_matched += matched;
    st.clicks[0] += fire[0];
    st.clicks[1] += fire[1];
    const int coinc = fire[0] && fire[1] ? kDoubleClick : fire[0] ? kClick0 : fire[1] ? kClick1 : kNoClick;
    ++st.coincidences[bob_basis == Basis::Z ? 0 : 1][coinc];
    if (coinc == kNoClick) continue;
    ++st.detected;
    int bob_bit = fire[0] ? 0 : 1;
    if (coinc == kDoubleClick) {
      ++st.double_clicks;
      if (cfg.double_click_policy == DoubleClickPolicy::Discard) bob_bit = -1;
      else bob_bit = assign_coin;
    }
    if (!matched) continue;
    ++st.sifted;
    if (bob_bit < 0) continue;
    ++st.kept;
    st.errors += bob_bit != alice_bit;
    st.eve_agree += eve_bit == alice_bit;
  }
  return st;
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (cfg.n_pulses == 0) throw InvalidArgument("n_pulses must be positive");
  if (!(cfg.channel_transmittance > 0.0 && cfg.channel_transmittance <= 1.0))
    throw InvalidArgument("channel_transmittance must lie in (0,1]");
  check_stats(cfg.alice_stats, cfg.alice_mu, "alice_mu");
  if (!std::isfinite(cfg.nominal_arrival_time))
    throw InvalidArgument("nominal_arrival_time must be finite");
  if (cfg.workers == 0) throw InvalidArgument("workers must be positive");
  if (cfg.attack) {
    if (!std::isfinite(cfg.attack->timing.t0) || !std::isfinite(cfg.attack->timing.t1))
      throw InvalidArgument("attack timings must be finite");
    check_stats(cfg.attack->stats, cfg.attack->mu_t0, "mu_t0");
    check_stats(cfg.attack->stats, cfg.attack->mu_t1, "mu_t1");
  }
}

SimStats& SimStats::operator+=(const SimStats& o) {
  sent += o.sent;
  basis_matched += o.basis_matched;
  detected += o.detected;
  sifted += o.sifted;
  kept += o.kept;
  errors += o.errors;
  double_clicks += o.double_clicks;
  for (int d = 0; d < 2; ++d) clicks[d] += o.clicks[d];
  for (int b = 0; b < 2; ++b)
    for (int k = 0; k < 4; ++k) coincidences[b][k] += o.coincidences[b][k];
  eve_agree += o.eve_agree;
  attack_active = attack_active || o.attack_active;
  return *this;
}

double SimStats::qber() const { return kept ? static_cast<double>(errors) / kept : 0.0; }

double SimStats::qber_stderr() const {
  if (!kept) return 0.0;
  const double q = qber();
  return std::sqrt(q * (1 - q) / static_cast<double>(kept));
}

double SimStats::p_arrive() const {
  return basis_matched ? static_cast<double>(kept) / basis_matched : 0.0;
}

double SimStats::click_rate(int detector) const {
  return sent ? static_cast<double>(clicks[detector]) / sent : 0.0;
}

double SimStats::eve_agreement() const { return kept ? static_cast<double>(eve_agree) / kept : 0.0; }

double SimStats::bob_agreement() const { return kept ? 1.0 - qber() : 0.0; }

SimStats run(const SimConfig& cfg) {
  validate(cfg);
  const std::uint64_t workers = std::min<std::uint64_t>(cfg.workers, cfg.n_pulses);
  if (workers <= 1) return run_range(cfg, 0, cfg.n_pulses);

  std::vector<SimStats> parts(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::uint64_t chunk = cfg.n_pulses / workers;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = w * chunk;
    const std::uint64_t end = w + 1 == workers ? cfg.n_pulses : begin + chunk;
    threads.emplace_back([&, w, begin, end] { parts[w] = run_range(cfg, begin, end); });
  }
  for (auto& t : threads) t.join();
  SimStats total;
  for (const auto& p : parts) total += p;
  return total;
}

double sifted_rate_no_attack(const SimConfig& cfg) {
  validate(cfg);
  const double t_nom = cfg.nominal_arrival_time;
  const bool exclusive = cfg.alice_stats == PhotonStatistics::SinglePhoton;
  double rate = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double eta = cfg.pair.curve(a).eval(t_nom);
    double p_signal = 0.0;
    switch (cfg.alice_stats) {
      case PhotonStatistics::SinglePhoton:
        p_signal = cfg.channel_transmittance * eta;
        break;
      case PhotonStatistics::Coherent:
        p_signal = -std::expm1(-cfg.alice_mu * cfg.channel_transmittance * eta);
        break;
      case PhotonStatistics::Fock:
        p_signal = 1 - std::pow(1 - cfg.channel_transmittance * eta, cfg.alice_mu);
        break;
    }
    const ClickProbs cp = a == 0 ? ClickProbs{p_signal, 0.0} : ClickProbs{0.0, p_signal};
    rate += 0.5 * kept_probability(fire_distribution(cp, exclusive, cfg.pair.dark0, cfg.pair.dark1),
                                   cfg.double_click_policy);
  }
  // Bases match half the time; Alice's bit is uniform.
  return 0.5 * rate;
}

namespace {

// Kept probability per pulse, conditional on Eve resending at timing slot `slot`.
double slot_rate(const SimConfig& cfg, PhotonStatistics stats, int slot, double mu) {
  const auto& atk = *cfg.attack;
  const double t = slot == 0 ? atk.timing.t0 : atk.timing.t1;
  const double eta0 = cfg.pair.curve0.eval(t), eta1 = cfg.pair.curve1.eval(t);
  FakedState f = attack::faked_state_for(Basis::Z, slot, atk.timing);
  f.mu = mu;
  const bool exclusive = stats == PhotonStatistics::SinglePhoton;
  // Matched bases: Bob in Eve's basis (split) or in the faked-state basis (full), 1/4 each.
  const auto split = fire_distribution(attack::bob_click_probs(f, Basis::Z, eta0, eta1, stats), exclusive,
                                       cfg.pair.dark0, cfg.pair.dark1);
  const auto full = fire_distribution(attack::bob_click_probs(f, Basis::X, eta0, eta1, stats), exclusive,
                                      cfg.pair.dark0, cfg.pair.dark1);
  const auto dark = fire_distribution({0.0, 0.0}, exclusive, cfg.pair.dark0, cfg.pair.dark1);
  const double nonempty = alice_nonempty(cfg);
  const double with_pulse =
      0.25 * kept_probability(split, cfg.double_click_policy) + 0.25 * kept_probability(full, cfg.double_click_policy);
  return nonempty * with_pulse + (1 - nonempty) * 0.5 * kept_probability(dark, cfg.double_click_policy);
}

}  // namespace

double sifted_rate_attack(const SimConfig& cfg, double mu_t0, double mu_t1) {
  validate(cfg);
  if (!cfg.attack) throw InvalidArgument("attack configuration required");
  const auto stats = cfg.attack->stats;
  check_stats(stats, mu_t0, "mu_t0");
  check_stats(stats, mu_t1, "mu_t1");
  return 0.5 * slot_rate(cfg, stats, 0, mu_t0) + 0.5 * slot_rate(cfg, stats, 1, mu_t1);
}

std::pair<double, double> brightness_to_match_rate(const SimConfig& cfg, double target_rate) {
  validate(cfg);
  if (!cfg.attack) throw InvalidArgument("attack configuration required");
  if (!(target_rate > 0.0)) throw InvalidArgument("target rate must be > 0");
  constexpr auto stats = PhotonStatistics::Coherent;
  double mu[2];
  for (int slot = 0; slot < 2; ++slot) {
    const double lo_rate = slot_rate(cfg, stats, slot, 0.0);
    const double hi_rate = slot_rate(cfg, stats, slot, kMaxBrightness);
    if (target_rate > hi_rate || target_rate < lo_rate) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "target sifted rate %.9g unreachable at timing t%d; achievable range [%.9g, %.9g]",
                    target_rate, slot, lo_rate, hi_rate);
      throw Infeasible(buf);
    }
    double lo = 0.0, hi = kMaxBrightness;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double r = slot_rate(cfg, stats, slot, mid);
      if (std::abs(r - target_rate) <= 1e-12 * target_rate) {
        lo = hi = mid;
        break;
      }
      (r < target_rate ? lo : hi) = mid;
    }
    mu[slot] = 0.5 * (lo + hi);
  }
  return {mu[0], mu[1]};
}

}  // namespace demqkd::montecarlo
