#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "attack.hpp"
#include "curves.hpp"

namespace demqkd::montecarlo {

using attack::PhotonStatistics;

enum class DoubleClickPolicy { Discard, RandomAssign };

struct AttackConfig {
  analytics::AttackTiming timing;
  PhotonStatistics stats = PhotonStatistics::SinglePhoton;
  double mu_t0 = 1.0;  // brightness of pulses resent at t0
  double mu_t1 = 1.0;
};

struct SimConfig {
  explicit SimConfig(curves::DetectorPair p) : pair(std::move(p)) {}

  std::uint64_t n_pulses = 1'000'000;
  std::uint64_t seed = 1;
  curves::DetectorPair pair;
  double channel_transmittance = 1.0;
  PhotonStatistics alice_stats = PhotonStatistics::SinglePhoton;
  double alice_mu = 1.0;  // ignored for single-photon sources
  std::optional<AttackConfig> attack;
  double nominal_arrival_time = 0.0;  // ns
  DoubleClickPolicy double_click_policy = DoubleClickPolicy::RandomAssign;
  unsigned workers = 1;
};

// Throws InvalidArgument naming the offending field.
void validate(const SimConfig& cfg);

// Index into SimStats::coincidences[bob_basis][...].
enum Coincidence { kNoClick = 0, kClick0 = 1, kClick1 = 2, kDoubleClick = 3 };

struct SimStats {
  std::uint64_t sent = 0;
  std::uint64_t basis_matched = 0;  // Alice and Bob chose the same basis
  std::uint64_t detected = 0;       // at least one detector fired
  std::uint64_t sifted = 0;         // detected with matching bases
  std::uint64_t kept = 0;           // sifted and assigned a bit
  std::uint64_t errors = 0;         // kept with Bob's bit != Alice's bit
  std::uint64_t double_clicks = 0;
  std::array<std::uint64_t, 2> clicks{};  // per detector, all gates
  std::array<std::array<std::uint64_t, 4>, 2> coincidences{};  // [bob basis Z/X][Coincidence]
  std::uint64_t eve_agree = 0;  // kept bits where Eve's record equals Alice's bit
  bool attack_active = false;

  SimStats& operator+=(const SimStats& o);

  double qber() const;
  double qber_stderr() const;
  double p_arrive() const;  // kept / basis_matched
  double click_rate(int detector) const;
  double eve_agreement() const;
  double bob_agreement() const;
};

// Pulse-level simulation. Bit-identical for a fixed seed at any worker count.
SimStats run(const SimConfig& cfg);

// Probability, per sent pulse, that a bit is kept after sifting, computed in
// closed form from the configuration (no attack / attack with the given
// per-timing brightness).
double sifted_rate_no_attack(const SimConfig& cfg);
double sifted_rate_attack(const SimConfig& cfg, double mu_t0, double mu_t1);

// Brightness per timing slot such that the attacked sifted rate equals
// `target_rate` within 1e-6 relative, found by bisection on [0, 1e4] with the
// coherent model. Requires cfg.attack. Throws Infeasible with the maximum
// achievable rate when the target is out of reach.
std::pair<double, double> brightness_to_match_rate(const SimConfig& cfg, double target_rate);

inline constexpr double kMaxBrightness = 1e4;

}  // namespace demqkd::montecarlo
