#include "curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace demqkd::curves {

namespace {

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// ln(1e12): logistic(-x) < 1e-12 beyond this many edge scales.
constexpr double kGateTailScales = 27.7;

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0,1]");
}

}  // namespace

EfficiencyCurve EfficiencyCurve::gate(const GateShape& shape) {
  if (!std::isfinite(shape.center)) throw InvalidArgument("gate center must be finite");
  if (!(shape.plateau_width >= 0.0) || !std::isfinite(shape.plateau_width))
    throw InvalidArgument("gate plateau_width must be >= 0");
  if (!(shape.edge_scale > 0.0) || !std::isfinite(shape.edge_scale))
    throw InvalidArgument("gate edge_scale must be > 0");
  check_unit(shape.peak_efficiency, "gate peak_efficiency");
  return EfficiencyCurve(shape);
}

EfficiencyCurve EfficiencyCurve::tabulated(std::vector<Sample> samples) {
  if (samples.empty()) throw InvalidArgument("tabulated curve needs at least one sample");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].t) || !std::isfinite(samples[i].eta))
      throw InvalidArgument("sample " + std::to_string(i) + " is not finite");
    if (i > 0 && !(samples[i].t > samples[i - 1].t))
      throw InvalidArgument("sample " + std::to_string(i) + ": times must be strictly increasing");
    samples[i].eta = clamp01(samples[i].eta);
  }
  return EfficiencyCurve(Table{std::move(samples)});
}

EfficiencyCurve EfficiencyCurve::constant(double eta, double t_from, double t_to) {
  check_unit(eta, "constant efficiency");
  if (!(t_to > t_from)) throw InvalidArgument("constant curve needs t_to > t_from");
  return tabulated({{t_from, eta}, {t_to, eta}});
}

double EfficiencyCurve::eval(double t) const {
  if (const auto* g = std::get_if<GateShape>(&rep_)) {
    const double half = 0.5 * g->plateau_width;
    const double rise = logistic((t - (g->center - half)) / g->edge_scale);
    const double fall = logistic(((g->center + half) - t) / g->edge_scale);
    return clamp01(g->peak_efficiency * rise * fall);
  }
  const auto& s = std::get<Table>(rep_).samples;
  if (t < s.front().t || t > s.back().t) return 0.0;
  if (t == s.back().t) return s.back().eta;
  auto hi = std::upper_bound(s.begin(), s.end(), t,
                             [](double v, const Sample& smp) { return v < smp.t; });
  auto lo = hi - 1;
  const double frac = (t - lo->t) / (hi->t - lo->t);
  return clamp01(lo->eta + (hi->eta - lo->eta) * frac);
}

std::span<const Sample> EfficiencyCurve::samples() const {
  if (const auto* tab = std::get_if<Table>(&rep_)) return tab->samples;
  return {};
}

std::pair<double, double> EfficiencyCurve::support() const {
  if (const auto* g = std::get_if<GateShape>(&rep_)) {
    const double reach = 0.5 * g->plateau_width + kGateTailScales * g->edge_scale;
    return {g->center - reach, g->center + reach};
  }
  const auto& s = std::get<Table>(rep_).samples;
  return {s.front().t, s.back().t};
}

double EfficiencyCurve::peak() const {
  if (const auto* g = std::get_if<GateShape>(&rep_)) return eval(g->center);
  const auto& s = std::get<Table>(rep_).samples;
  return std::max_element(s.begin(), s.end(),
                          [](const Sample& a, const Sample& b) { return a.eta < b.eta; })
      ->eta;
}

EfficiencyCurve EfficiencyCurve::shifted(double dt) const {
  if (const auto* g = std::get_if<GateShape>(&rep_)) {
    GateShape moved = *g;
    moved.center += dt;
    return EfficiencyCurve(moved);
  }
  auto s = std::get<Table>(rep_).samples;
  for (auto& smp : s) smp.t += dt;
  return EfficiencyCurve(Table{std::move(s)});
}

DetectorPair::DetectorPair(EfficiencyCurve c0, EfficiencyCurve c1, double d0, double d1)
    : curve0(std::move(c0)), curve1(std::move(c1)), dark0(d0), dark1(d1) {
  if (!(d0 >= 0.0 && d0 < 1.0) || !(d1 >= 0.0 && d1 < 1.0))
    throw InvalidArgument("dark count probabilities must lie in [0,1)");
}

DetectorPair DetectorPair::swapped() const { return DetectorPair(curve1, curve0, dark1, dark0); }

std::pair<double, double> DetectorPair::support() const {
  const auto [a0, b0] = curve0.support();
  const auto [a1, b1] = curve1.support();
  return {std::min(a0, a1), std::max(b0, b1)};
}

EfficiencyCurve from_samples(std::span<const CountRow> rows, double calibration) {
  if (rows.empty()) throw InvalidArgument("no calibration rows");
  if (!(calibration > 0.0) || !std::isfinite(calibration))
    throw InvalidArgument("calibration factor must be > 0");
  std::vector<Sample> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = "row " + std::to_string(i) + ": ";
    if (!(r.gates > 0.0) || !(r.dark_gates > 0.0))
      throw InvalidArgument(where + "gate counts must be > 0");
    if (!(r.counts >= 0.0) || !(r.dark_counts >= 0.0))
      throw InvalidArgument(where + "negative counts");
    if (i > 0 && !(r.t > rows[i - 1].t))
      throw InvalidArgument(where + "times must be strictly increasing");
    const double eta = calibration * (r.counts / r.gates - r.dark_counts / r.dark_gates);
    out.push_back({r.t, clamp01(eta)});
  }
  return EfficiencyCurve::tabulated(std::move(out));
}

MismatchResult mismatch_eta(const DetectorPair& pair, double t_from, double t_to,
                            const MismatchOptions& opts) {
  if (!(opts.floor > 0.0)) throw InvalidArgument("mismatch floor must be > 0");
  if (!(opts.step > 0.0)) throw InvalidArgument("mismatch step must be > 0");
  if (!(t_to >= t_from) || !std::isfinite(t_from) || !std::isfinite(t_to))
    throw InvalidArgument("mismatch domain is empty");

  const auto n = static_cast<std::size_t>(std::floor((t_to - t_from) / opts.step + 1e-9)) + 1;
  std::vector<double> e0(n), e1(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_from + static_cast<double>(i) * opts.step;
    e0[i] = pair.curve0.eval(t);
    e1[i] = pair.curve1.eval(t);
    peak = std::max({peak, e0[i], e1[i]});
  }
  const double threshold = opts.floor * peak;
  constexpr double inf = std::numeric_limits<double>::infinity();

  MismatchResult best{inf, 0.0, MismatchDirection::OneOverZero, opts.floor, opts.step};
  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (peak <= 0.0 || std::max(e0[i], e1[i]) < threshold) continue;
    const double t = t_from + static_cast<double>(i) * opts.step;
    const double r10 = e0[i] > 0.0 ? e1[i] / e0[i] : inf;
    const double r01 = e1[i] > 0.0 ? e0[i] / e1[i] : inf;
    if (!found || r10 < best.eta) best = {r10, t, MismatchDirection::OneOverZero, opts.floor, opts.step};
    found = true;
    if (r01 < best.eta) best = {r01, t, MismatchDirection::ZeroOverOne, opts.floor, opts.step};
  }
  if (!found) throw Infeasible("curves below floor everywhere");
  best.eta = std::min(best.eta, 1.0);
  return best;
}

EfficiencyCurve jitter_smear(const EfficiencyCurve& curve, const JitterDistribution& jitter,
                             double grid_step) {
  if (!(grid_step > 0.0)) throw InvalidArgument("grid_step must be > 0");
  if (!(jitter.scale > 0.0) || !std::isfinite(jitter.scale))
    throw InvalidArgument("jitter scale must be > 0");

  // Kernel nodes on [-reach, reach]; trapezoid weights normalised to unit mass.
  const double reach = jitter.kind == JitterKind::Gaussian ? 5.0 * jitter.scale : jitter.scale;
  const double node_step = std::min(grid_step, jitter.scale / 50.0);
  const auto m = static_cast<std::size_t>(std::ceil(2.0 * reach / node_step));
  const double d = 2.0 * reach / static_cast<double>(m);
  std::vector<double> offsets(m + 1), weights(m + 1);
  double total = 0.0;
  for (std::size_t j = 0; j <= m; ++j) {
    const double u = -reach + static_cast<double>(j) * d;
    double density = 1.0;
    if (jitter.kind == JitterKind::Gaussian) {
      const double z = u / jitter.scale;
      density = std::exp(-0.5 * z * z);
    }
    const double w = (j == 0 || j == m) ? 0.5 * density : density;
    offsets[j] = u;
    weights[j] = w;
    total += w;
  }
  for (auto& w : weights) w /= total;

  const auto [a, b] = curve.support();
  const double lo = a - 5.0 * jitter.scale;
  const double hi = b + 5.0 * jitter.scale;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / grid_step)) + 1;
  std::vector<Sample> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = lo + static_cast<double>(k) * grid_step;
    double acc = 0.0;
    for (std::size_t j = 0; j <= m; ++j) acc += weights[j] * curve.eval(t - offsets[j]);
    out[k] = {t, clamp01(acc)};
  }
  return EfficiencyCurve::tabulated(std::move(out));
}

std::vector<ShiftPoint> eta_vs_shift(const DetectorPair& pair, std::span<const double> shifts,
                                     double t_from, double t_to, const MismatchOptions& opts) {
  std::vector<ShiftPoint> out;
  out.reserve(shifts.size());
  for (double s : shifts) {
    const DetectorPair moved(pair.curve0, pair.curve1.shifted(s), pair.dark0, pair.dark1);
    out.push_back({s, mismatch_eta(moved, t_from, t_to, opts).eta});
  }
  return out;
}

double integral(const EfficiencyCurve& curve) {
  if (curve.is_tabulated()) {
    const auto s = curve.samples();
    double acc = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i)
      acc += 0.5 * (s[i].eta + s[i - 1].eta) * (s[i].t - s[i - 1].t);
    return acc;
  }
  // Composite Simpson over the numerical support.
  const auto [a, b] = curve.support();
  constexpr std::size_t n = 200000;
  const double h = (b - a) / n;
  double acc = curve.eval(a) + curve.eval(b);
  for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * curve.eval(a + h * i);
  return acc * h / 3.0;
}

}  // namespace demqkd::curves
