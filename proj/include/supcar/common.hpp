#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace supcar {

// The three supCAR(2) regimes, by the sign of the companion-matrix
// discriminant a1^2 - 4 a2: I = double real root, II = distinct real roots,
// III = complex conjugate pair.
enum class TypeTag { I, II, III };

inline const char* type_name(TypeTag t) {
  switch (t) {
    case TypeTag::I: return "I";
    case TypeTag::II: return "II";
    default: return "III";
  }
}

// A sampled mixing-parameter point: (a, unused) for type I, (lambda, theta)
// for type II, (r, psi) for type III.
struct ParamPoint {
  double v1 = 0.0;
  double v2 = 0.0;
};

// One named integrability condition with its computed value.
struct ConditionEntry {
  std::string name;
  double value = 0.0;
  bool finite = false;
  bool pass = false;
};

struct ConditionReport {
  bool pass = false;
  std::vector<ConditionEntry> entries;
  std::string diagnostics;
};

// Thrown when a mathematical condition fails (existence/moment conditions,
// quadrature breakdown, infinite variance).  CLI maps this to exit code 2,
// while invalid inputs (std::invalid_argument & friends) map to exit code 1.
struct MathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace supcar
