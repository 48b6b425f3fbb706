#include "qnd.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <numbers>

#include "error.hpp"

namespace demqkd::qnd {

namespace {

std::size_t whole_bins(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw InvalidArgument(std::string(what) + " must be a positive whole multiple of dt");
  return static_cast<std::size_t>(rounded);
}

double mass(const std::vector<std::complex<double>>& a, std::size_t from, std::size_t to) {
  double m = 0.0;
  for (std::size_t k = from; k < to && k < a.size(); ++k) m += std::norm(a[k]);
  return m;
}

}  // namespace

std::size_t TimeGrid::tau_bins() const { return whole_bins(tau, dt, "tau"); }

void validate(const TimeGrid& grid) {
  if (!(grid.dt > 0.0) || !std::isfinite(grid.dt)) throw InvalidArgument("dt must be > 0");
  if (!std::isfinite(grid.t_start)) throw InvalidArgument("t_start must be finite");
  if (grid.n_bins < 2 * grid.tau_bins()) throw InvalidArgument("grid must span both pulse windows");
}

TimeBinState::TimeBinState(TimeGrid grid, std::vector<std::complex<double>> amplitudes, double phase_deg)
    : grid_(grid), amps_(std::move(amplitudes)), phase_deg_(phase_deg) {
  if (amps_.size() != grid_.n_bins) throw InvalidArgument("amplitude count must equal n_bins");
}

double TimeBinState::norm_squared() const { return mass(amps_, 0, amps_.size()); }

double TimeBinState::early_mass() const { return mass(amps_, 0, grid_.tau_bins()); }

double TimeBinState::late_mass() const {
  const auto tb = grid_.tau_bins();
  return mass(amps_, tb, 2 * tb);
}

TimeBinState make_qubit_state(double phase_deg, double t0, const TimeGrid& grid, double omega0, double delta) {
  validate(grid);
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("pulse bandwidth must be > 0");
  if (grid.tau * delta < kMinSeparation)
    throw InvalidArgument("pulse duration 1/delta must be at least 10x shorter than tau");
  const double reach = kPulseHalfWindow / delta;
  if (t0 - reach < grid.t_start || t0 + reach > grid.t_start + grid.tau)
    throw InvalidArgument("pulses extend outside the grid windows");

  const auto tb = grid.tau_bins();
  const double norm = std::pow(2.0 * delta * delta / std::numbers::pi, 0.25);
  const double scale = norm * std::sqrt(grid.dt) / std::numbers::sqrt2;
  const auto phase = std::polar(1.0, phase_deg * std::numbers::pi / 180.0);

  std::vector<std::complex<double>> amps(grid.n_bins);
  for (std::size_t k = 0; k < tb; ++k) {
    const double x = grid.bin_center(k) - t0;
    // The late pulse sees the same offset from t0 + tau one window later.
    const auto xi = scale * std::exp(std::complex<double>(-delta * delta * x * x, -omega0 * x));
    amps[k] = xi;
    amps[k + tb] = phase * xi;
  }
  double total = mass(amps, 0, amps.size());
  const double inv = 1.0 / std::sqrt(total);
  for (auto& a : amps) a *= inv;
  return TimeBinState(grid, std::move(amps), phase_deg);
}

std::size_t interval_count(const TimeGrid& grid, double resolution) {
  const auto rb = whole_bins(resolution, grid.dt, "resolution");
  const auto tb = grid.tau_bins();
  return (tb + rb - 1) / rb;
}

Projection project_timing(const TimeBinState& state, std::size_t i, double resolution) {
  const auto& grid = state.grid();
  const auto rb = whole_bins(resolution, grid.dt, "resolution");
  const auto tb = grid.tau_bins();
  if (i >= interval_count(grid, resolution)) throw InvalidArgument("interval index outside the early window");
  const std::size_t lo = i * rb;
  const std::size_t hi = std::min(lo + rb, tb);

  const auto& a = state.amplitudes();
  const double p = mass(a, lo, hi) + mass(a, lo + tb, hi + tb);
  if (!(p > 0.0) || !std::isnormal(p)) return {p, std::nullopt};

  std::vector<std::complex<double>> out(a.size());
  const double inv = 1.0 / std::sqrt(p);
  for (std::size_t k = lo; k < hi; ++k) {
    out[k] = a[k] * inv;
    out[k + tb] = a[k + tb] * inv;
  }
  return {p, TimeBinState(grid, std::move(out), state.constructed_phase())};
}

double recovered_phase(const TimeBinState& state) {
  const auto tb = state.grid().tau_bins();
  if (!(state.early_mass() > 0.0) || !(state.late_mass() > 0.0)) throw Infeasible("qubit destroyed");
  const auto& a = state.amplitudes();
  std::complex<double> overlap{};
  for (std::size_t k = 0; k < tb; ++k) overlap += std::conj(a[k]) * a[k + tb];
  double deg = std::arg(overlap) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

double rms_duration(const TimeBinState& state) {
  const auto& grid = state.grid();
  const auto tb = grid.tau_bins();
  const auto& a = state.amplitudes();
  double w = 0.0, m1 = 0.0;
  for (std::size_t k = 0; k < tb; ++k) {
    const double p = std::norm(a[k]) + std::norm(a[k + tb]);
    w += p;
    m1 += p * grid.bin_center(k);
  }
  if (!(w > 0.0)) throw Infeasible("empty state has no duration");
  const double mean = m1 / w;
  double m2 = 0.0;
  for (std::size_t k = 0; k < tb; ++k) {
    const double p = std::norm(a[k]) + std::norm(a[k + tb]);
    const double d = grid.bin_center(k) - mean;
    m2 += p * d * d;
  }
  return std::sqrt(m2 / w);
}

}  // namespace demqkd::qnd
