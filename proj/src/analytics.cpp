#include "analytics.hpp"

#include <algorithm>

#include "error.hpp"

namespace demqkd::analytics {

namespace {

double arrival_sum(const AttackEfficiencies& e) {
  for (double v : {e.e00, e.e10, e.e01, e.e11})
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("attack efficiencies must lie in [0,1]");
  return e.e00 + 3 * e.e01 + 3 * e.e10 + e.e11;
}

}  // namespace

AttackEfficiencies attack_efficiencies(const curves::DetectorPair& pair, const AttackTiming& timing) {
  return {pair.curve0.eval(timing.t0), pair.curve1.eval(timing.t0), pair.curve0.eval(timing.t1),
          pair.curve1.eval(timing.t1)};
}

double p_arrive_given_z0(const AttackEfficiencies& e) { return (e.e00 + e.e01 + 2 * e.e10) / 4; }

double p_arrive(const AttackEfficiencies& e) { return arrival_sum(e) / 8; }

double p_error(const AttackEfficiencies& e) { return (2 * e.e01 + 2 * e.e10) / 8; }

double qber_attack(const AttackEfficiencies& e) {
  const double s = arrival_sum(e);
  if (!(s > 0.0)) throw Infeasible("no arrivals: every efficiency seen by the faked states is zero");
  return (2 * e.e01 + 2 * e.e10) / s;
}

InfoReport info_report(const AttackEfficiencies& e) {
  InfoReport r;
  const double s = arrival_sum(e);
  if (!(s > 0.0)) throw Infeasible("no arrivals: every efficiency seen by the faked states is zero");
  r.p_arrive = p_arrive(e);
  r.qber = qber_attack(e);

  const double d0 = e.e00 + e.e01 + 2 * e.e10;
  const double d1 = e.e11 + e.e10 + 2 * e.e01;
  r.p_a = {d0 / s, d1 / s};
  r.h_a = entropy(r.p_a);

  // A conditional on a null event is left uniform; it carries zero weight.
  if (d0 > 0)
    r.p_e_given_a[0] = {(e.e00 + e.e10) / d0, 0.0, e.e10 / d0, e.e01 / d0};
  else
    r.p_e_given_a[0] = {0.25, 0.25, 0.25, 0.25};
  // A=1 mirrors A=0 with the bits of Eve's records flipped and e00<->e11, e01<->e10.
  if (d1 > 0)
    r.p_e_given_a[1] = {0.0, (e.e11 + e.e01) / d1, e.e10 / d1, e.e01 / d1};
  else
    r.p_e_given_a[1] = {0.25, 0.25, 0.25, 0.25};

  for (int k = 0; k < 4; ++k) {
    r.p_e[k] = r.p_e_given_a[0][k] * r.p_a[0] + r.p_e_given_a[1][k] * r.p_a[1];
    for (int a = 0; a < 2; ++a)
      r.p_a_given_e[k][a] = r.p_e[k] > 0 ? r.p_a[a] * r.p_e_given_a[a][k] / r.p_e[k] : r.p_a[a];
  }
  double h_ae = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 4; ++k) {
      const double joint = r.p_a[a] * r.p_e_given_a[a][k];
      if (joint > 0) h_ae -= joint * std::log2(r.p_a_given_e[k][a]);
    }
  r.h_a_given_e = h_ae;

  const double b00 = d0 > 0 ? (e.e00 + e.e01) / d0 : 0.5;
  const double b11 = d1 > 0 ? (e.e11 + e.e10) / d1 : 0.5;
  r.p_b_given_a[0] = {b00, 1 - b00};
  r.p_b_given_a[1] = {1 - b11, b11};

  std::array<double, 4> joint_ab{};
  std::array<double, 2> p_b{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      joint_ab[2 * a + b] = r.p_a[a] * r.p_b_given_a[a][b];
      p_b[b] += joint_ab[2 * a + b];
    }
  r.h_a_given_b = entropy(joint_ab) - entropy(p_b);

  r.i_ae = std::clamp(r.h_a - r.h_a_given_e, 0.0, 1.0);
  r.i_ab = std::clamp(r.h_a - r.h_a_given_b, 0.0, 1.0);
  return r;
}

SymmetricPoint symmetric_curve_point(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in [0,1]");
  const double q = 2 * eta / (1 + 3 * eta);
  return {q, 1 - binary_entropy(q), 1 - q};
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("binary entropy argument must lie in [0,1]");
  return entropy(std::array<double, 2>{x, 1 - x});
}

}  // namespace demqkd::analytics
