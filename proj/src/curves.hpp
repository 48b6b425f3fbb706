#pragma once

#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace demqkd::curves {

// Gated detector window: rising and falling logistic edges around a plateau.
struct GateShape {
  double center = 0.0;          // ns
  double plateau_width = 1.0;   // ns, distance between the two half-height points
  double edge_scale = 0.05;     // ns, logistic scale of each edge
  double peak_efficiency = 0.1;
};

struct Sample {
  double t;    // ns
  double eta;
};

// Time-dependent detection efficiency of one detector.
// Immutable after construction; eval() is always within [0,1].
class EfficiencyCurve {
 public:
  static EfficiencyCurve gate(const GateShape& shape);
  // Samples must have strictly increasing t; eta is clamped into [0,1].
  static EfficiencyCurve tabulated(std::vector<Sample> samples);
  // Tabulated curve equal to `eta` on [t_from, t_to] and 0 outside.
  static EfficiencyCurve constant(double eta, double t_from, double t_to);

  double eval(double t) const;

  bool is_tabulated() const { return std::holds_alternative<Table>(rep_); }
  const GateShape* gate_shape() const { return std::get_if<GateShape>(&rep_); }
  std::span<const Sample> samples() const;

  // Interval outside of which the curve is zero (tabulated) or below
  // 1e-12 of its peak (gate).
  std::pair<double, double> support() const;
  double peak() const;

  // Same curve translated later in time by `dt`.
  EfficiencyCurve shifted(double dt) const;

 private:
  struct Table {
    std::vector<Sample> samples;
  };
  using Rep = std::variant<GateShape, Table>;
  explicit EfficiencyCurve(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

struct DetectorPair {
  EfficiencyCurve curve0;
  EfficiencyCurve curve1;
  double dark0 = 0.0;  // per-gate dark count probability, [0,1)
  double dark1 = 0.0;

  DetectorPair(EfficiencyCurve c0, EfficiencyCurve c1, double d0 = 0.0, double d1 = 0.0);

  const EfficiencyCurve& curve(int bit) const { return bit == 0 ? curve0 : curve1; }
  double dark(int bit) const { return bit == 0 ? dark0 : dark1; }
  DetectorPair swapped() const;
  std::pair<double, double> support() const;
};

enum class JitterKind { Gaussian, Uniform };

struct JitterDistribution {
  JitterKind kind = JitterKind::Gaussian;
  double scale = 0.1;  // ns: standard deviation (gaussian) or half-width (uniform)
};

// One raw calibration measurement at a single delay setting.
struct CountRow {
  double t;            // ns
  double counts;
  double gates;
  double dark_counts;
  double dark_gates;
};

// Dark-subtracted efficiencies as a tabulated curve:
// eta_i = clamp(calibration * (counts/gates - dark_counts/dark_gates), 0, 1).
EfficiencyCurve from_samples(std::span<const CountRow> rows, double calibration = 1.0);

// Which ratio attains the mismatch minimum.
enum class MismatchDirection {
  OneOverZero,  // eta1(t)/eta0(t): detector 1 suppressed
  ZeroOverOne,  // eta0(t)/eta1(t): detector 0 suppressed
};

struct MismatchOptions {
  double floor = 1e-4;  // relative to the global peak of both curves on the domain
  double step = 1e-3;   // ns
};

struct MismatchResult {
  double eta;
  double t;
  MismatchDirection direction;
  double floor;
  double step;
};

// Minimum over the sampled domain of eta1/eta0 and eta0/eta1, restricted to
// points where max(eta0, eta1) >= floor * peak. Ties go to the earliest t,
// and at equal t to OneOverZero.
MismatchResult mismatch_eta(const DetectorPair& pair, double t_from, double t_to,
                            const MismatchOptions& opts = {});

// Convolution of the curve with the jitter density, tabulated on a grid of
// `grid_step` that extends the input support by 5*scale on each side.
EfficiencyCurve jitter_smear(const EfficiencyCurve& curve, const JitterDistribution& jitter,
                             double grid_step);

struct ShiftPoint {
  double shift;
  double eta;
};

// mismatch_eta with curve1 translated by each shift.
std::vector<ShiftPoint> eta_vs_shift(const DetectorPair& pair, std::span<const double> shifts,
                                     double t_from, double t_to, const MismatchOptions& opts = {});

// Exact integral of a tabulated curve; adaptive-free dense trapezoid for gates.
double integral(const EfficiencyCurve& curve);

}  // namespace demqkd::curves
