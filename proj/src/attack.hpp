#pragma once

#include <array>
#include <span>
#include <vector>

#include "analytics.hpp"
#include "curves.hpp"

namespace demqkd::attack {

using analytics::AttackEfficiencies;
using analytics::AttackTiming;

enum class Basis { Z, X };

inline Basis opposite(Basis b) { return b == Basis::Z ? Basis::X : Basis::Z; }

// Photon-number model of a pulse hitting Bob's detectors.
//   SinglePhoton: exactly one photon, detectors mutually exclusive, mu unused.
//   Coherent:     Poissonian with mean mu, p_b = 1 - exp(-mu s_b eta_b).
//   Fock:         exactly n = mu photons, p_b = 1 - (1 - s_b eta_b)^n.
// In the multi-photon models the two detectors click independently.
enum class PhotonStatistics { SinglePhoton, Coherent, Fock };

// Pulse Eve resends to Bob.
struct FakedState {
  Basis basis = Basis::Z;
  int bit = 0;
  double timing = 0.0;  // ns
  double mu = 1.0;      // mean photon number
};

// Opposite bit in the opposite basis, timed at t_{eve_bit}.
FakedState faked_state_for(Basis eve_basis, int eve_bit, const AttackTiming& timing);

// Fraction of the pulse routed to each detector when Bob measures in `bob_basis`.
std::array<double, 2> split_fractions(const FakedState& f, Basis bob_basis);

struct ClickProbs {
  double p0;
  double p1;
};

// Per-detector click probabilities without dark counts, given the two
// detector efficiencies at the pulse timing.
ClickProbs bob_click_probs(const FakedState& f, Basis bob_basis, double eta0, double eta1,
                           PhotonStatistics stats = PhotonStatistics::SinglePhoton);
ClickProbs bob_click_probs(const FakedState& f, Basis bob_basis, const curves::DetectorPair& pair,
                           PhotonStatistics stats = PhotonStatistics::SinglePhoton);

// Eve's brightness per timing slot.
struct Brightness {
  double mu0 = 1.0;  // pulses sent at t0
  double mu1 = 1.0;  // pulses sent at t1
  PhotonStatistics stats = PhotonStatistics::SinglePhoton;
};

// One branch of the attack tree. Outcome probabilities of a branch sum to 1;
// in multi-photon models a double click is split evenly between the bits.
struct EnumerationRow {
  Basis alice_basis;
  int alice_bit;
  Basis eve_basis;
  int eve_bit;
  Basis bob_basis;
  double weight;  // probability of the branch
  double click0;
  double click1;
  double lost;
  bool sifted() const { return alice_basis == bob_basis; }
};

struct EnumerationResult {
  std::vector<EnumerationRow> rows;
  double p_arrive = 0;       // P(detected | sifted)
  double qber = 0;
  double rate0 = 0;          // P(sifted and Bob registers 0) per pulse
  double rate1 = 0;
  double eve_agreement = 0;  // P(Eve's bit == Alice's bit | kept)
  analytics::InfoReport info;  // tables built from the joint distribution of the rows
};

// Exhaustive enumeration of Alice's state, Eve's basis and outcome, and Bob's
// basis. Eve reads Alice's bit in the matching basis and a fair coin otherwise.
EnumerationResult enumerate_table(const AttackEfficiencies& e, const Brightness& brightness = {});
EnumerationResult enumerate_table(const curves::DetectorPair& pair, const AttackTiming& timing,
                                  const Brightness& brightness = {});

struct EqualRateOptimum {
  AttackTiming timing;
  double mu0;
  double mu1;
  double qber;
  double rate0;
  double rate1;
};

inline constexpr double kEqualRateTolerance = 1e-3;
inline constexpr double kQberTieTolerance = 1e-12;

// Grid search over (t0, t1, mu0, mu1) for the lowest QBER with
// |rate0 - rate1| <= 1e-3 (rate0 + rate1). QBERs within 1e-12 count as ties,
// which go to the lexicographically smallest (t0, t1, mu0, mu1). Throws Infeasible naming the closest candidate
// when nothing satisfies the rate constraint.
EqualRateOptimum optimize_equal_rates(const curves::DetectorPair& pair, std::span<const double> t_grid,
                                      std::span<const double> mu_grid,
                                      PhotonStatistics stats = PhotonStatistics::Coherent);

}  // namespace demqkd::attack
