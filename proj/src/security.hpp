#pragma once

#include <span>
#include <string_view>
#include <utility>

#include "analytics.hpp"

namespace demqkd::security {

enum class Region { Secure, NotProven, Insecure };

std::string_view to_string(Region r);

struct SecurityAssessment {
  double eta;
  double measured_qber;
  double delta;  // NaN when undefined (eta = 0 with zero QBER)
  double rate;   // 1 - 2 h(delta), NaN with delta
  Region region;
};

// Lowest QBER Bob can observe when the actual bit error rate is `delta` and
// the detectors have mismatch `eta`: eta*delta / (1 + eta*delta - delta).
double worst_case_qber(double delta, double eta);

// Actual bit error rate implied by a measured QBER: q / (eta + (1-eta) q).
// Throws Infeasible at eta = 0 with q = 0, where any delta is consistent.
double actual_delta(double measured_qber, double eta);

// Key rate after privacy amplification, 1 - 2 h(delta).
double pa_rate(double delta);

// Zero of pa_rate on (0, 1/2), located once by bisection to 1e-9.
double delta_star();

// QBER budgets for a mismatch eta: the exact worst-case bound at delta_star()
// and the linearised 0.11*eta rule of thumb.
double exact_qber_budget(double eta);
double approx_qber_budget(double eta);

// QBER reached by the symmetric-curve intercept-resend attack, 2 eta / (1 + 3 eta).
double symmetric_attack_qber(double eta);

// Insecure when the symmetric attack fits under the observed QBER; otherwise
// Secure when delta < delta_star(), else NotProven. Boundaries go to the more
// pessimistic region. `measured_qber` should exclude dark count errors.
SecurityAssessment classify(double eta, double measured_qber);

// QBER of an attack that mixes several timing pairs: pooled error
// probability over pooled arrival probability.
double mixture_qber(std::span<const std::pair<double, analytics::AttackEfficiencies>> components);

}  // namespace demqkd::security
