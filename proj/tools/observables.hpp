#pragma once

// Named observables accepted by `reconstruct --observable` and
// `kernels eval --observable`.

#include <regex>
#include <string>

#include "qtomo/oscore.hpp"

namespace qtomo::cli {

// Bad flag values or malformed command lines (exit code 2).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error(message) {}
};

// identity | number | annihilation | creation | parity | quadrature(phi) |
// matrix_unit(k,n) = |k><n| | sigma_x|y|z (dim 2) | spin_x|y|z (dim 2s+1).
inline Operator parse_observable(const std::string& text, int dim) {
  static const std::regex quad(R"(quadrature\(\s*([-+0-9.eE]+)\s*\))");
  static const std::regex unit(R"(matrix_unit\(\s*(\d+)\s*,\s*(\d+)\s*\))");
  std::smatch m;
  if (text == "identity") return Operator::identity(dim);
  if (text == "number") return build_operator({kinds::Number{}, dim});
  if (text == "annihilation") return build_operator({kinds::Annihilation{}, dim});
  if (text == "creation") return build_operator({kinds::Annihilation{}, dim}).adjoint();
  if (text == "parity") return build_operator({kinds::Parity{}, dim});
  if (std::regex_match(text, m, quad)) {
    double phi = 0.0;
    try {
      phi = std::stod(m[1].str());
    } catch (const std::exception&) {
      throw UsageError("malformed quadrature angle in '" + text + "'");
    }
    return quadrature(phi, dim);
  }
  if (std::regex_match(text, m, unit)) {
    const int k = std::stoi(m[1].str()), n = std::stoi(m[2].str());
    if (k >= dim || n >= dim) throw UsageError("matrix_unit index out of range for dim " + std::to_string(dim));
    return build_operator({kinds::MatrixUnit{k, n}, dim});
  }
  static const std::regex axis(R"((sigma|spin)_([xyz]))");
  if (std::regex_match(text, m, axis)) {
    const Axis a = m[2].str() == "x" ? Axis::x : m[2].str() == "y" ? Axis::y : Axis::z;
    if (m[1].str() == "sigma") {
      if (dim != 2) throw UsageError("sigma_" + m[2].str() + " needs dim 2");
      return pauli(a);
    }
    Vec3 n{0.0, 0.0, 0.0};
    n[static_cast<std::size_t>(a)] = 1.0;
    return spin_component(HalfInteger{dim - 1}, n);
  }
  throw UsageError("unknown observable '" + text +
                   "' (expected identity, number, annihilation, creation, parity, quadrature(phi), "
                   "matrix_unit(k,n), sigma_x|y|z or spin_x|y|z)");
}

}  // namespace qtomo::cli
