#pragma once
// JSON model descriptions.  One document specifies the driving noise and the
// mixing measure:
//
//   {"levy":   {"gamma": 0.0, "sigma2": 1.0, "jump": {"kind": "none"}},
//    "mixing": {"type": "I", "rho": {"kind": "gamma", "shape": 4, "rate": 1}}}
//
// Type II uses "lambda"/"theta" in place of "rho", type III "r"/"psi";
// joint-discrete mixings for II/III use "atoms": [[[v1, v2], mass], ...].
// Measure kinds: dirac{x}, gamma{shape,rate}, beta{b0,b1}, uniform{lo,hi},
// discrete{atoms:[[x,mass],...]}, sin2{}.  Jump kinds: none,
// compound_poisson{rate,law:{kind:normal|exponential|two_point,...}},
// gamma_subordinator{shape,rate}, discrete{atoms}.  The "density" kinds are
// construction-API only and rejected here: a callable cannot round-trip
// through JSON.
//
// Unknown keys are rejected with their path; malformed documents report
// line and column.  Parameter domains are enforced by the library factories,
// so a parsed spec is structurally valid; the mathematical existence gates
// stay with the caller (the returned spec is unchecked).

#include <string>

#include "supcar/analytics.hpp"

namespace supcar {

// Throws std::invalid_argument on any malformed input.
ProcessSpec model_from_json(const std::string& text);
ProcessSpec model_from_json_file(const std::string& path);

// Canonical serialization (sorted keys, shortest round-trip numbers);
// parse(emit(spec)) reproduces the spec exactly.  Density-form models
// cannot be serialized and throw std::invalid_argument.
std::string model_to_json(const ProcessSpec& spec);

}  // namespace supcar
