#include "security.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace demqkd::security {

namespace {

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0,1]");
}

double bisect_pa_zero() {
  double lo = 0.0, hi = 0.5;  // pa_rate(lo) = 1 > 0, pa_rate(hi) = -1 < 0
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (pa_rate(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Secure:
      return "Secure";
    case Region::NotProven:
      return "NotProven";
    case Region::Insecure:
      return "Insecure";
  }
  return "?";
}

double worst_case_qber(double delta, double eta) {
  check_unit(delta, "delta");
  check_unit(eta, "eta");
  const double den = 1 + eta * delta - delta;
  if (den == 0.0) return 1.0;  // delta = 1 forces every detected bit to be an error
  return eta * delta / den;
}

double actual_delta(double measured_qber, double eta) {
  check_unit(measured_qber, "measured QBER");
  check_unit(eta, "eta");
  const double den = eta + (1 - eta) * measured_qber;
  if (den == 0.0) throw Infeasible("bound undefined at total mismatch with zero QBER");
  return measured_qber / den;
}

double pa_rate(double delta) {
  check_unit(delta, "delta");
  return 1 - 2 * analytics::binary_entropy(delta);
}

double delta_star() {
  static const double value = bisect_pa_zero();
  return value;
}

double exact_qber_budget(double eta) { return worst_case_qber(delta_star(), eta); }

double approx_qber_budget(double eta) {
  check_unit(eta, "eta");
  return 0.11 * eta;
}

double symmetric_attack_qber(double eta) { return analytics::symmetric_curve_point(eta).qber; }

SecurityAssessment classify(double eta, double measured_qber) {
  check_unit(eta, "eta");
  check_unit(measured_qber, "measured QBER");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  SecurityAssessment out{eta, measured_qber, nan, nan, Region::NotProven};
  if (eta > 0.0 || measured_qber > 0.0) {
    out.delta = actual_delta(measured_qber, eta);
    out.rate = pa_rate(out.delta);
  }
  if (measured_qber >= symmetric_attack_qber(eta))
    out.region = Region::Insecure;
  else if (out.delta < delta_star())
    out.region = Region::Secure;
  return out;
}

double mixture_qber(std::span<const std::pair<double, analytics::AttackEfficiencies>> components) {
  if (components.empty()) throw InvalidArgument("mixture needs at least one component");
  double weight_sum = 0.0, err = 0.0, arrive = 0.0;
  for (const auto& [w, e] : components) {
    if (!(w > 0.0)) throw InvalidArgument("mixture weights must be positive");
    const double pa = analytics::p_arrive(e);
    if (!(pa > 0.0)) throw InvalidArgument("mixture component with no arrivals");
    weight_sum += w;
    err += w * analytics::p_error(e);
    arrive += w * pa;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) throw InvalidArgument("mixture weights must sum to 1");
  if (!(arrive > 0.0)) throw Infeasible("pooled arrival probability is zero");
  return err / arrive;
}

}  // namespace demqkd::security
