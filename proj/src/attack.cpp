#include "attack.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <tuple>

#include "error.hpp"

namespace demqkd::attack {

namespace {

constexpr Basis kBases[2] = {Basis::Z, Basis::X};

double click_probability(double split, double eta, double mu, PhotonStatistics stats) {
  const double p = split * eta;
  switch (stats) {
    case PhotonStatistics::SinglePhoton:
      return p;
    case PhotonStatistics::Coherent:
      return -std::expm1(-mu * p);
    case PhotonStatistics::Fock:
      return 1.0 - std::pow(1.0 - p, mu);
  }
  return p;
}

void check_mu(double mu, PhotonStatistics stats) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidArgument("brightness must be >= 0");
  if (stats == PhotonStatistics::Fock && mu != std::floor(mu))
    throw InvalidArgument("Fock brightness must be an integer photon number");
}

struct Totals {
  double sifted_weight = 0;
  double detected = 0;
  double errors = 0;
  double rate[2] = {0, 0};
  double eve_agree = 0;
};

// Walks every branch of the attack tree; `sink` sees each row.
template <typename Sink>
Totals walk(const AttackEfficiencies& e, const Brightness& br, Sink&& sink) {
  Totals tot;
  for (Basis ab : kBases)
    for (int a = 0; a < 2; ++a)
      for (Basis eb : kBases) {
        const bool same = eb == ab;
        for (int ebit = 0; ebit < 2; ++ebit) {
          const double p_eve = same ? (ebit == a ? 1.0 : 0.0) : 0.5;
          if (p_eve == 0.0) continue;
          FakedState f = faked_state_for(eb, ebit, {0.0, 1.0});
          f.mu = ebit == 0 ? br.mu0 : br.mu1;
          for (Basis bb : kBases) {
            const auto cp = bob_click_probs(f, bb, e.at(0, ebit), e.at(1, ebit), br.stats);
            double c0 = cp.p0, c1 = cp.p1;
            if (br.stats != PhotonStatistics::SinglePhoton) {
              const double both = cp.p0 * cp.p1;
              c0 = cp.p0 * (1 - cp.p1) + 0.5 * both;
              c1 = cp.p1 * (1 - cp.p0) + 0.5 * both;
            }
            const EnumerationRow row{ab, a, eb, ebit, bb, 0.25 * 0.5 * p_eve * 0.5, c0, c1,
                                     1.0 - c0 - c1};
            sink(row);
            if (!row.sifted()) continue;
            tot.sifted_weight += row.weight;
            tot.detected += row.weight * (c0 + c1);
            tot.errors += row.weight * (a == 0 ? c1 : c0);
            tot.rate[0] += row.weight * c0;
            tot.rate[1] += row.weight * c1;
            if (ebit == a) tot.eve_agree += row.weight * (c0 + c1);
          }
        }
      }
  return tot;
}

void fill_info(const std::vector<EnumerationRow>& rows, analytics::InfoReport& info) {
  using analytics::entropy;
  // joint[a][e][b] over sifted detections, Eve's basis relabelled relative to Alice's.
  double joint[2][4][2] = {};
  double total = 0;
  for (const auto& r : rows) {
    if (!r.sifted()) continue;
    const int e = (r.eve_basis == r.alice_basis ? 0 : 2) + r.eve_bit;
    joint[r.alice_bit][e][0] += r.weight * r.click0;
    joint[r.alice_bit][e][1] += r.weight * r.click1;
    total += r.weight * (r.click0 + r.click1);
  }
  std::array<double, 8> p_ae{};
  std::array<double, 4> p_ab{};
  std::array<double, 2> p_b{};
  info.p_a = {};
  info.p_e = {};
  for (int a = 0; a < 2; ++a)
    for (int e = 0; e < 4; ++e)
      for (int b = 0; b < 2; ++b) {
        const double p = joint[a][e][b] / total;
        info.p_a[a] += p;
        info.p_e[e] += p;
        p_ae[4 * a + e] += p;
        p_ab[2 * a + b] += p;
        p_b[b] += p;
      }
  for (int a = 0; a < 2; ++a) {
    for (int e = 0; e < 4; ++e)
      info.p_e_given_a[a][e] = info.p_a[a] > 0 ? p_ae[4 * a + e] / info.p_a[a] : 0.25;
    for (int b = 0; b < 2; ++b)
      info.p_b_given_a[a][b] = info.p_a[a] > 0 ? p_ab[2 * a + b] / info.p_a[a] : 0.5;
  }
  for (int e = 0; e < 4; ++e)
    for (int a = 0; a < 2; ++a)
      info.p_a_given_e[e][a] = info.p_e[e] > 0 ? p_ae[4 * a + e] / info.p_e[e] : info.p_a[a];
  info.h_a = entropy(info.p_a);
  info.h_a_given_e = entropy(p_ae) - entropy(info.p_e);
  info.h_a_given_b = entropy(p_ab) - entropy(p_b);
  info.i_ae = info.h_a - info.h_a_given_e;
  info.i_ab = info.h_a - info.h_a_given_b;
}

}  // namespace

FakedState faked_state_for(Basis eve_basis, int eve_bit, const AttackTiming& timing) {
  if (eve_bit != 0 && eve_bit != 1) throw InvalidArgument("bit must be 0 or 1");
  return {opposite(eve_basis), 1 - eve_bit, eve_bit == 0 ? timing.t0 : timing.t1, 1.0};
}

std::array<double, 2> split_fractions(const FakedState& f, Basis bob_basis) {
  if (bob_basis != f.basis) return {0.5, 0.5};
  return f.bit == 0 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
}

ClickProbs bob_click_probs(const FakedState& f, Basis bob_basis, double eta0, double eta1,
                           PhotonStatistics stats) {
  check_mu(f.mu, stats);
  const auto s = split_fractions(f, bob_basis);
  return {click_probability(s[0], eta0, f.mu, stats), click_probability(s[1], eta1, f.mu, stats)};
}

ClickProbs bob_click_probs(const FakedState& f, Basis bob_basis, const curves::DetectorPair& pair,
                           PhotonStatistics stats) {
  return bob_click_probs(f, bob_basis, pair.curve0.eval(f.timing), pair.curve1.eval(f.timing), stats);
}

EnumerationResult enumerate_table(const AttackEfficiencies& e, const Brightness& brightness) {
  for (double v : {e.e00, e.e10, e.e01, e.e11})
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("attack efficiencies must lie in [0,1]");
  check_mu(brightness.mu0, brightness.stats);
  check_mu(brightness.mu1, brightness.stats);

  EnumerationResult out;
  out.rows.reserve(24);
  const Totals tot = walk(e, brightness, [&](const EnumerationRow& r) { out.rows.push_back(r); });
  out.p_arrive = tot.detected / tot.sifted_weight;
  out.rate0 = tot.rate[0];
  out.rate1 = tot.rate[1];
  if (tot.detected > 0) {
    out.qber = tot.errors / tot.detected;
    out.eve_agreement = tot.eve_agree / tot.detected;
    fill_info(out.rows, out.info);
    out.info.p_arrive = out.p_arrive;
    out.info.qber = out.qber;
  } else {
    out.qber = out.eve_agreement = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

EnumerationResult enumerate_table(const curves::DetectorPair& pair, const AttackTiming& timing,
                                  const Brightness& brightness) {
  return enumerate_table(analytics::attack_efficiencies(pair, timing), brightness);
}

EqualRateOptimum optimize_equal_rates(const curves::DetectorPair& pair, std::span<const double> t_grid,
                                      std::span<const double> mu_grid, PhotonStatistics stats) {
  if (t_grid.empty() || mu_grid.empty()) throw InvalidArgument("optimizer grids must be nonempty");
  for (double mu : mu_grid) check_mu(mu, stats);

  std::vector<double> eta0(t_grid.size()), eta1(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    eta0[i] = pair.curve0.eval(t_grid[i]);
    eta1[i] = pair.curve1.eval(t_grid[i]);
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  EqualRateOptimum best{{}, 0, 0, inf, 0, 0};
  bool feasible = false;
  EqualRateOptimum closest{{}, 0, 0, inf, 0, 0};
  double closest_gap = inf;
  auto key = [](const EqualRateOptimum& o) {
    return std::tuple(o.timing.t0, o.timing.t1, o.mu0, o.mu1);
  };

  for (std::size_t i0 = 0; i0 < t_grid.size(); ++i0)
    for (std::size_t i1 = 0; i1 < t_grid.size(); ++i1) {
      const AttackEfficiencies e{eta0[i0], eta1[i0], eta0[i1], eta1[i1]};
      for (double mu0 : mu_grid)
        for (double mu1 : mu_grid) {
          const Totals tot = walk(e, {mu0, mu1, stats}, [](const EnumerationRow&) {});
          if (!(tot.detected > 0)) continue;
          const double r0 = tot.rate[0], r1 = tot.rate[1];
          const EqualRateOptimum cand{{t_grid[i0], t_grid[i1]}, mu0, mu1, tot.errors / tot.detected, r0, r1};
          const double gap = std::abs(r0 - r1);
          if (gap <= kEqualRateTolerance * (r0 + r1)) {
            // mirror-image timings tie up to rounding
            const bool tie = std::abs(cand.qber - best.qber) <= kQberTieTolerance;
            if (!feasible || (!tie && cand.qber < best.qber) || (tie && key(cand) < key(best)))
              best = cand;
            feasible = true;
          } else if (gap / (r0 + r1) < closest_gap) {
            closest_gap = gap / (r0 + r1);
            closest = cand;
          }
        }
    }
  if (!feasible) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "no grid point equalises the bit rates; closest: t0=%.9g t1=%.9g mu0=%.9g mu1=%.9g "
                  "qber=%.9g rate0=%.9g rate1=%.9g",
                  closest.timing.t0, closest.timing.t1, closest.mu0, closest.mu1, closest.qber,
                  closest.rate0, closest.rate1);
    throw Infeasible(buf);
  }
  return best;
}

}  // namespace demqkd::attack
