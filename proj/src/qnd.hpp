#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace demqkd::qnd {

// Discretised time axis. The early window is bins [0, tau_bins) and the late
// window bins [tau_bins, 2 tau_bins).
struct TimeGrid {
  double t_start = 0.0;  // ns
  double dt = 1e-3;      // ns
  std::size_t n_bins = 4000;
  double tau = 2.0;      // ns, pulse separation; an exact multiple of dt

  std::size_t tau_bins() const;
  double bin_center(std::size_t k) const { return t_start + (static_cast<double>(k) + 0.5) * dt; }
};

// Throws InvalidArgument unless dt > 0, tau is a whole number of bins and the
// grid covers both windows.
void validate(const TimeGrid& grid);

// Single-photon time-bin qubit sampled on a grid. Immutable.
class TimeBinState {
 public:
  TimeBinState(TimeGrid grid, std::vector<std::complex<double>> amplitudes, double phase_deg);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amps_; }
  // Phase used at construction; bookkeeping only.
  double constructed_phase() const { return phase_deg_; }

  double norm_squared() const;
  double early_mass() const;
  double late_mass() const;

 private:
  TimeGrid grid_;
  std::vector<std::complex<double>> amps_;
  double phase_deg_;
};

// Early pulse must sit this many 1/delta from either edge of the early window.
inline constexpr double kPulseHalfWindow = 4.0;
// Minimum tau * delta.
inline constexpr double kMinSeparation = 10.0;

// (1/sqrt 2)[xi(t, t0) + e^{i phase} xi(t, t0 + tau)] at bin centres, with the
// Gaussian envelope xi(t, t0) = (2 delta^2/pi)^{1/4} exp(-i omega0 (t-t0) - delta^2 (t-t0)^2),
// renormalised to unit norm.
TimeBinState make_qubit_state(double phase_deg, double t0, const TimeGrid& grid, double omega0,
                              double delta);

// Number of cells of width `resolution` needed to cover the early window.
std::size_t interval_count(const TimeGrid& grid, double resolution);

struct Projection {
  double probability;
  std::optional<TimeBinState> collapsed;  // empty when the probability is zero
};

// Projector onto cell i of the early window together with its copy delayed
// by tau. The last cell is truncated at the window end.
Projection project_timing(const TimeBinState& state, std::size_t i, double resolution);

// Phase (degrees, [0,360)) of the overlap between the late window shifted
// back by tau and the early window. Throws Infeasible("qubit destroyed") when
// either window is empty.
double recovered_phase(const TimeBinState& state);

// Root-mean-square duration of one pulse, with the late window folded onto
// the early one.
double rms_duration(const TimeBinState& state);

}  // namespace demqkd::qnd
