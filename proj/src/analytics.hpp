#pragma once

#include <array>
#include <cmath>

#include "curves.hpp"

namespace demqkd::analytics {

// Eve's two resend timings: t0 suppresses detector 1, t1 suppresses detector 0.
struct AttackTiming {
  double t0 = 0.0;
  double t1 = 0.0;
};

// The four efficiency evaluations that enter every attack formula.
// Naming is e<detector><timing>: e10 = eta1(t0).
struct AttackEfficiencies {
  double e00 = 1.0;  // eta0(t0)
  double e10 = 0.0;  // eta1(t0)
  double e01 = 0.0;  // eta0(t1)
  double e11 = 1.0;  // eta1(t1)

  // Efficiency of `detector` for a pulse sent at timing slot `slot`.
  double at(int detector, int slot) const {
    if (detector == 0) return slot == 0 ? e00 : e01;
    return slot == 0 ? e10 : e11;
  }
};

// Index of Eve's measurement record, with Alice's basis taken as Z.
enum EveOutcome { kEveZ0 = 0, kEveZ1 = 1, kEveX0 = 2, kEveX1 = 3 };

// Probability tables for the sifted, detected events of the attack,
// Alice's basis taken as Z. Entropies in bits.
struct InfoReport {
  double p_arrive = 0;
  double qber = 0;
  double h_a = 0;
  double h_a_given_e = 0;
  double h_a_given_b = 0;
  double i_ae = 0;
  double i_ab = 0;
  std::array<double, 2> p_a{};
  std::array<std::array<double, 4>, 2> p_e_given_a{};  // [a][e]
  std::array<double, 4> p_e{};
  std::array<std::array<double, 2>, 4> p_a_given_e{};  // [e][a]
  std::array<std::array<double, 2>, 2> p_b_given_a{};  // [a][b]
};

AttackEfficiencies attack_efficiencies(const curves::DetectorPair& pair, const AttackTiming& timing);

// Arrival probability for sifted events given Alice sent Z0.
double p_arrive_given_z0(const AttackEfficiencies& e);
// Arrival probability for sifted events averaged over Alice's four states.
double p_arrive(const AttackEfficiencies& e);
// Probability that a sifted pulse is detected with the wrong bit.
double p_error(const AttackEfficiencies& e);
// Throws Infeasible when p_arrive(e) == 0.
double qber_attack(const AttackEfficiencies& e);

// Throws Infeasible when p_arrive(e) == 0.
InfoReport info_report(const AttackEfficiencies& e);

struct SymmetricPoint {
  double qber;
  double i_ab;
  double i_ae;
};

// Symmetric curves e = (1, eta, eta, 1).
SymmetricPoint symmetric_curve_point(double eta);

// h(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0.
double binary_entropy(double x);

// Shannon entropy in bits of a discrete distribution, 0 log 0 = 0.
template <std::size_t N>
double entropy(const std::array<double, N>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

}  // namespace demqkd::analytics
