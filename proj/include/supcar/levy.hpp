#pragma once
// Driving Lévy basis.  A characteristic triplet (gamma, Sigma, mu) with
// truncation tau(x) = x·1[|x|<=1] determines the cumulant transform
//
//   kappa(z) = i·gamma·z - (Sigma/2) z^2
//              + Int (e^{izx} - 1 - izx·1[|x|<=1]) mu(dx),
//
// which is everything downstream code needs: moments, existence checks and
// increment sampling all derive from (gamma, Sigma, mu).

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "supcar/common.hpp"
#include "supcar/rng.hpp"

namespace supcar {

struct NormalLaw {
  double mean = 0.0;
  double sd = 1.0;
};
struct ExponentialLaw {
  double rate = 1.0;
};
// Two-point law: value x1 with probability p, else x2.
struct TwoPointLaw {
  double x1 = 1.0;
  double p = 0.5;
  double x2 = -1.0;
};
using JumpLaw = std::variant<NormalLaw, ExponentialLaw, TwoPointLaw>;

struct NoJumps {};

// mu = rate · law;  finite activity, sampled exactly.
struct CompoundPoisson {
  double rate = 1.0;
  JumpLaw law = NormalLaw{};
};

// mu(dx) = shape · x^{-1} e^{-rate·x} dx on (0,inf); the subordinator whose
// time-t marginal is Gamma(shape·t, rate).
struct GammaSubordinator {
  double shape = 1.0;
  double rate = 1.0;
};

// Finite atomic measure: atoms (x_j, mass_j), x_j != 0, mass_j > 0.
struct DiscreteJumps {
  std::vector<std::pair<double, double>> atoms;
};

// Analysis-only measure given by a Lévy density on (lo, hi); used for
// cumulants and integrability checks, never for sampling.  zero_order
// declares the power-law order of the density at 0 (density ~ C·|x|^{-q}
// as x -> 0); it must stay below 3 so that Int x^2 mu(dx) converges there.
struct DensityJumps {
  std::function<double(double)> density;
  double lo = 0.0;
  double hi = 0.0;
  double zero_order = 0.0;
};

using JumpSpec =
    std::variant<NoJumps, CompoundPoisson, GammaSubordinator, DiscreteJumps,
                 DensityJumps>;

// Throws std::invalid_argument unless the descriptor defines a Lévy measure:
// positive rates/shapes/masses, no atom at 0, and (for the density form) a
// numerically verified Int (1 ∧ x^2) mu(dx) < inf.
void validate_jump(const JumpSpec& jump);

inline bool is_density_form(const JumpSpec& jump) {
  return std::holds_alternative<DensityJumps>(jump);
}

struct LevyTriplet {
  double gamma = 0.0;
  double sigma2 = 0.0;
  JumpSpec jump = NoJumps{};

  // Validating factory; sigma2 >= 0 and validate_jump must hold.
  static LevyTriplet make(double gamma, double sigma2, JumpSpec jump);
};

// Decision of an integrability check together with the computed integral
// (diagnostic only when infinite).
struct CheckResult {
  bool finite = false;
  double value = 0.0;
  std::string note;
};

// kappa(z) as above; exact closed forms for the parametric jump families,
// adaptive quadrature for the density form.  kappa(0) = 0 exactly.
std::complex<double> cumulant_L(double z, const LevyTriplet& triplet);

// (E L(1), Var L(1)) = (gamma + Int_{|x|>1} x mu, Sigma + Int x^2 mu).
// Throws MathError("variance undefined") when Int_{|x|>1} x^2 mu diverges.
std::pair<double, double> mean_var_L(const LevyTriplet& triplet);

// Finiteness of Int_{|x|>1} log|x| mu(dx).
CheckResult log_moment_check(const JumpSpec& jump);

// Finiteness of Int_{|x|>1} |x|^p mu(dx), p > 0.
bool p_moment_check(const JumpSpec& jump, double p);

// One exact draw of L(dt).  The Lévy–Itô drift is gamma minus the
// small-jump compensation Int_{|x|<=1} x mu(dx), so that jumps can be added
// raw and E L(dt) matches mean_var_L.  Density form is not sampleable.
double sample_increment(const LevyTriplet& triplet, double dt, RngStream& rng);

// The measure factor·mu (factor > 0): scales rate / shape / masses / density.
JumpSpec scale_mass(const JumpSpec& jump, double factor);

}  // namespace supcar
