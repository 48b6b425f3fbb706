#include "curve_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace demqkd::curves {

namespace {

constexpr std::string_view kProcessedHeader = "t_ns,eta0,eta1";
constexpr std::string_view kRawHeader =
    "t_ns,counts0,gates0,counts1,gates1,dark0,dark_gates0,dark1,dark_gates1";

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::string canonical_header(std::string_view line) {
  std::string out;
  for (char c : line)
    if (c != ' ' && c != '\t' && c != '\r') out.push_back(c);
  // UTF-8 byte order mark
  if (out.rfind("\xEF\xBB\xBF", 0) == 0) out.erase(0, 3);
  return out;
}

std::vector<double> parse_fields(std::string_view line, std::size_t expected, std::size_t lineno) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    const auto field = trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
    if (field.empty()) throw ParseError("empty field " + std::to_string(out.size() + 1), lineno);
    const std::string text(field);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE)
      throw ParseError("not a number: '" + text + "'", lineno);
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.size() != expected)
    throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                         std::to_string(out.size()),
                     lineno);
  return out;
}

}  // namespace

CurveFile read_curve_csv(std::istream& in, double calibration) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<CurveFileKind> kind;
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;

  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!kind) {
      const auto header = canonical_header(body);
      if (header == kProcessedHeader)
        kind = CurveFileKind::Processed;
      else if (header == kRawHeader)
        kind = CurveFileKind::Raw;
      else
        throw ParseError("unrecognised header '" + std::string(body) + "'", lineno);
      continue;
    }
    const std::size_t width = *kind == CurveFileKind::Processed ? 3 : 9;
    auto fields = parse_fields(body, width, lineno);
    if (!rows.empty() && !(fields[0] > rows.back().second[0]))
      throw ParseError("times must be strictly increasing", lineno);
    rows.emplace_back(lineno, std::move(fields));
  }
  if (!kind) throw ParseError("missing header row");
  if (rows.empty()) throw ParseError("no data rows");

  if (*kind == CurveFileKind::Processed) {
    std::vector<Sample> s0, s1;
    for (const auto& [ln, f] : rows) {
      for (std::size_t c = 1; c <= 2; ++c)
        if (!(f[c] >= 0.0 && f[c] <= 1.0)) throw ParseError("efficiency outside [0,1]", ln);
      s0.push_back({f[0], calibration * f[1]});
      s1.push_back({f[0], calibration * f[2]});
    }
    return {*kind, DetectorPair(EfficiencyCurve::tabulated(std::move(s0)),
                                EfficiencyCurve::tabulated(std::move(s1)))};
  }

  std::vector<CountRow> r0, r1;
  double dark_sum[2] = {0, 0}, dark_gate_sum[2] = {0, 0};
  for (const auto& [ln, f] : rows) {
    for (double v : f)
      if (v < 0.0) throw ParseError("negative count", ln);
    if (!(f[2] > 0 && f[4] > 0 && f[6] > 0 && f[8] > 0))
      throw ParseError("gate counts must be > 0", ln);
    r0.push_back({f[0], f[1], f[2], f[5], f[6]});
    r1.push_back({f[0], f[3], f[4], f[7], f[8]});
    dark_sum[0] += f[5];
    dark_gate_sum[0] += f[6];
    dark_sum[1] += f[7];
    dark_gate_sum[1] += f[8];
  }
  const double d0 = dark_sum[0] / dark_gate_sum[0];
  const double d1 = dark_sum[1] / dark_gate_sum[1];
  if (d0 >= 1.0 || d1 >= 1.0) throw ParseError("dark count probability must be < 1");
  return {*kind, DetectorPair(from_samples(r0, calibration), from_samples(r1, calibration), d0, d1)};
}

CurveFile load_curve_csv(const std::string& path, double calibration) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open curve file '" + path + "'");
  return read_curve_csv(in, calibration);
}

void write_curve_csv(std::ostream& out, const DetectorPair& pair, std::span<const double> times) {
  out << kProcessedHeader << '\n';
  char buf[96];
  for (double t : times) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", t, pair.curve0.eval(t), pair.curve1.eval(t));
    out << buf;
  }
}

}  // namespace demqkd::curves
