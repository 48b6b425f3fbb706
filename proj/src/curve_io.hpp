#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "curves.hpp"

namespace demqkd::curves {

// Curve data files (UTF-8 CSV, header row, '#' comment lines ignored).
//   processed: t_ns,eta0,eta1
//   raw:       t_ns,counts0,gates0,counts1,gates1,dark0,dark_gates0,dark1,dark_gates1
// Raw files are dark-subtracted via from_samples; the pair's dark count
// probabilities are the pooled dark ratios of each detector. `calibration`
// scales the efficiencies of either form.
enum class CurveFileKind { Processed, Raw };

struct CurveFile {
  CurveFileKind kind;
  DetectorPair pair;
};

CurveFile read_curve_csv(std::istream& in, double calibration = 1.0);
CurveFile load_curve_csv(const std::string& path, double calibration = 1.0);

// Processed form, one row per time in `times`.
void write_curve_csv(std::ostream& out, const DetectorPair& pair, std::span<const double> times);

}  // namespace demqkd::curves
