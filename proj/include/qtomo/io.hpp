#pragma once

// JSON files: operators and states, quorum specs, dual sets, reconstruction
// results. Every document written here carries "version": kFormatVersion;
// readers accept documents without a version field and reject any other
// version. Field layouts are listed in formats.md.

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "qtomo/frames.hpp"
#include "qtomo/quorums.hpp"
#include "qtomo/recon.hpp"
#include "qtomo/records.hpp"

namespace qtomo {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline void check_version(const json& j) {
  if (!j.is_object()) throw FormatError("expected a JSON object");
  if (j.contains("version") && j.at("version") != kFormatVersion)
    throw FormatError("unsupported format version " + j.at("version").dump());
}

// Runs f, turning nlohmann type and key errors into FormatError.
template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed ") + what + ": " + e.what());
  }
}

inline json complex_pair(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError("complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

// --- operators and states ----------------------------------------------------

inline json operator_to_json(const Operator& a) {
  json entries = json::array();
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) entries.push_back(detail::complex_pair(a.matrix()(r, c)));
  return {{"version", kFormatVersion}, {"dim", a.dim()}, {"entries", std::move(entries)}};
}

inline json state_to_json(const DensityMatrix& rho) {
  json j = operator_to_json(rho.op());
  j["trace"] = rho.op().trace().real();
  j["purity"] = rho.purity();
  return j;
}

// {"dim": d, "entries": [[re, im], ...]} row-major with exactly d^2 entries.
inline Operator operator_from_json(const json& j) {
  detail::check_version(j);
  return detail::guarded("operator", [&] {
    const int dim = j.at("dim").get<int>();
    if (dim < 1) throw FormatError("operator dim must be positive");
    const json& entries = j.at("entries");
    if (!entries.is_array() || entries.size() != static_cast<std::size_t>(dim) * dim)
      throw FormatError("operator of dim " + std::to_string(dim) + " needs " + std::to_string(dim * dim) +
                        " entries, got " + std::to_string(entries.is_array() ? entries.size() : 0));
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) m(r, c) = detail::complex_from(entries[static_cast<std::size_t>(r * dim + c)]);
    return Operator(m);
  });
}

inline DensityMatrix state_from_json(const json& j) { return DensityMatrix(operator_from_json(j)); }

// --- quorum specs and duals ----------------------------------------------------

namespace detail {

inline json elements_to_json(const std::vector<FrameElement>& elements) {
  json out = json::array();
  for (const auto& e : elements) {
    json op = operator_to_json(e.op);
    op.erase("version");
    out.push_back({{"label", {{"quorum", e.label.quorum}, {"coords", e.label.coords}}},
                   {"weight", e.weight},
                   {"operator", std::move(op)}});
  }
  return out;
}

inline std::vector<FrameElement> elements_from_json(const json& j, int dim) {
  return guarded("quorum elements", [&] {
    const json& arr = j.at("elements");
    if (!arr.is_array() || arr.empty()) throw FormatError("\"elements\" must be a non-empty array");
    std::vector<FrameElement> out;
    for (const auto& e : arr) {
      SettingLabel label;
      if (e.contains("label")) {
        const json& l = e.at("label");
        label.quorum = l.value("quorum", std::string{});
        if (l.contains("coords")) label.coords = l.at("coords").get<std::vector<double>>();
      }
      const double w = e.value("weight", 1.0);
      Operator op = operator_from_json(e.at("operator"));
      if (op.dim() != dim) throw FormatError("element operator dim differs from the quorum dim");
      out.push_back({std::move(label), w, std::move(op)});
    }
    return out;
  });
}

inline QuorumDescriptor descriptor_from_json(const json& b) {
  return guarded("builtin quorum", [&] {
    QuorumDescriptor q;
    q.family = b.at("family").get<std::string>();
    q.dim = b.value("dim", q.dim);
    if (b.contains("spin")) q.spin = half_integer_from(b.at("spin").get<double>());
    q.directions = b.value("directions", q.directions);
    q.seed = b.value("seed", q.seed);
    q.grid = b.value("grid", q.grid);
    q.extent = b.value("extent", q.extent);
    return q;
  });
}

}  // namespace detail

inline json spanning_set_to_json(const SpanningSet& s) {
  return {{"version", kFormatVersion}, {"dim", s.dim()}, {"elements", detail::elements_to_json(s.elements())}};
}

// Either explicit {"dim", "elements": [...]} or {"builtin": {"family", ...}}.
inline SpanningSet spanning_set_from_json(const json& j) {
  detail::check_version(j);
  if (j.contains("builtin")) return build_quorum(detail::descriptor_from_json(j.at("builtin")));
  const int dim = detail::guarded("quorum spec", [&] { return j.at("dim").get<int>(); });
  if (dim < 1) throw FormatError("quorum dim must be positive");
  return SpanningSet(dim, detail::elements_from_json(j, dim));
}

inline json dual_to_json(const DualSet& b, const std::string& method) {
  return {{"version", kFormatVersion},
          {"kind", "dual"},
          {"method", method},
          {"dim", b.dim()},
          {"elements", detail::elements_to_json(b.elements())}};
}

inline DualSet dual_from_json(const json& j) {
  detail::check_version(j);
  const int dim = detail::guarded("dual set", [&] { return j.at("dim").get<int>(); });
  if (dim < 1) throw FormatError("dual dim must be positive");
  return DualSet(dim, detail::elements_from_json(j, dim));
}

// --- results -----------------------------------------------------------------

inline json estimate_to_json(const EstimationResult& r, const std::string& method, const std::string& observable) {
  return {{"version", kFormatVersion},
          {"kind", "estimate"},
          {"method", method},
          {"observable", observable},
          {"mean", detail::complex_pair(r.mean)},
          {"std_error", r.std_error},
          {"n_samples", r.n_samples},
          {"warnings", r.warnings}};
}

// Raw element averages; "diagnostics" holds the Hermitized matrix and
// whatever the caller adds (comparison, warnings).
inline json reconstruction_to_json(const ReconstructedMatrix& r, const std::string& method) {
  json elements = json::array();
  for (int k = 0; k < r.dim; ++k)
    for (int n = 0; n < r.dim; ++n) {
      json e{{"k", k}, {"n", n}, {"estimated", static_cast<bool>(r.estimated(k, n))}};
      if (r.estimated(k, n)) {
        e["mean"] = detail::complex_pair(r.mean(k, n));
        e["std_error"] = r.std_error(k, n);
        e["n_samples"] = r.n_samples;
      }
      elements.push_back(std::move(e));
    }
  json hermitized = json::array();
  const Matrix h = r.hermitized();
  for (int k = 0; k < r.dim; ++k)
    for (int n = 0; n < r.dim; ++n) hermitized.push_back(detail::complex_pair(h(k, n)));
  return {{"version", kFormatVersion},
          {"kind", "reconstruction"},
          {"method", method},
          {"dim", r.dim},
          {"elements", std::move(elements)},
          {"diagnostics",
           {{"hermitized", std::move(hermitized)},
            {"trace", detail::complex_pair(r.mean.trace())},
            {"warnings", r.warnings}}}};
}

inline json comparison_to_json(const StateComparison& c) {
  return {{"fidelity", c.fidelity},
          {"trace_distance", c.trace_distance},
          {"max_element_error", c.max_element_error},
          {"min_eigenvalue", c.min_eigenvalue}};
}

// Mean matrix and per-element standard errors back from a reconstruction
// document; elements not estimated stay zero.
inline ReconstructedMatrix reconstruction_from_json(const json& j) {
  detail::check_version(j);
  return detail::guarded("reconstruction", [&] {
    ReconstructedMatrix r;
    r.dim = j.at("dim").get<int>();
    if (r.dim < 1) throw FormatError("reconstruction dim must be positive");
    r.mean = Matrix::Zero(r.dim, r.dim);
    r.std_error = Eigen::MatrixXd::Zero(r.dim, r.dim);
    r.estimated.setConstant(r.dim, r.dim, false);
    for (const auto& e : j.at("elements")) {
      const int k = e.at("k").get<int>(), n = e.at("n").get<int>();
      if (k < 0 || n < 0 || k >= r.dim || n >= r.dim) throw FormatError("element index out of range");
      if (!e.value("estimated", true)) continue;
      r.estimated(k, n) = true;
      r.mean(k, n) = detail::complex_from(e.at("mean"));
      r.std_error(k, n) = e.at("std_error").get<double>();
      r.n_samples = e.at("n_samples").get<std::size_t>();
    }
    return r;
  });
}

// --- files -------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline RecordSet read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_csv(in);
}

inline void write_records_file(const std::string& path, const RecordSet& records) {
  std::ostringstream out;
  write_csv(out, records);
  write_text_file(path, out.str());
}

}  // namespace qtomo
