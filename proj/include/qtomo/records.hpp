#pragma once

// Simulated measurement outcomes and their CSV form.
//
// Column layout per family (unused columns are left empty):
//   homodyne  s1 = phi                          o1 = q
//   squeezed  s1 = phi, s2 = Re zeta, s3 = Im zeta  o1 = q
//   parity    s1 = Re beta, s2 = Im beta, s3 = proposal radius  o1 = +-1
//   spin      s1 = theta, s2 = phi, s3 = s      o1 = m
//   pauli     s1 = axis (0 x, 1 y, 2 z)         o1 = m = +-1/2
//   kerr      s1 = psi                          o1 = phi

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"

namespace qtomo {

enum class Family { homodyne, squeezed, parity, spin, pauli, kerr };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::homodyne: return "homodyne";
    case Family::squeezed: return "squeezed";
    case Family::parity: return "parity";
    case Family::spin: return "spin";
    case Family::pauli: return "pauli";
    case Family::kerr: return "kerr";
  }
  return "?";
}

inline Family family_from_name(const std::string& name) {
  for (Family f : {Family::homodyne, Family::squeezed, Family::parity, Family::spin, Family::pauli, Family::kerr})
    if (name == family_name(f)) return f;
  throw FormatError("unknown quorum family: " + name);
}

// Number of setting columns used by each family.
inline int setting_arity(Family f) {
  switch (f) {
    case Family::homodyne:
    case Family::pauli:
    case Family::kerr: return 1;
    default: return 3;
  }
}

struct MeasurementRecord {
  Family family;
  std::array<double, 3> setting{};
  double outcome = 0.0;
  friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

using RecordSet = std::vector<MeasurementRecord>;

inline void require_family(const RecordSet& records, Family f) {
  for (const auto& r : records)
    if (r.family != f)
      throw PreconditionError(std::string("records from quorum '") + family_name(r.family) +
                              "' cannot be used with method '" + family_name(f) + "'");
}

inline constexpr const char* kCsvHeader = "quorum,s1,s2,s3,o1";

namespace detail {
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_csv(std::ostream& out, const RecordSet& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << family_name(r.family);
    const int used = setting_arity(r.family);
    for (int i = 0; i < 3; ++i) {
      out << ',';
      if (i < used) out << detail::format_g17(r.setting[i]);
    }
    out << ',' << detail::format_g17(r.outcome) << '\n';
  }
}

inline RecordSet read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty record file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw FormatError("record file header must be '" + std::string(kCsvHeader) + "'");
  RecordSet out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (cells.size() != 5) throw FormatError("record row must have 5 columns" + where);
    MeasurementRecord r{family_from_name(cells[0])};
    const int used = setting_arity(r.family);
    auto parse = [&](const std::string& s) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &pos);
      } catch (const std::exception&) {
        throw FormatError("malformed number '" + s + "'" + where);
      }
      if (pos != s.size() || !std::isfinite(v)) throw FormatError("malformed number '" + s + "'" + where);
      return v;
    };
    for (int i = 0; i < 3; ++i) {
      if (i < used)
        r.setting[i] = parse(cells[1 + i]);
      else if (!cells[1 + i].empty())
        throw FormatError("unexpected setting column for this quorum" + where);
    }
    r.outcome = parse(cells[4]);
    out.push_back(r);
  }
  return out;
}

}  // namespace qtomo
