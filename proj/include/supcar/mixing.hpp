#pragma once
// Mixing (randomization) measures.  A supCAR(2) process superposes CAR(2)
// kernels whose parameters are drawn from a mixing law: a on (0,inf) for
// type I, (lambda, theta) on (0,inf)x(0,1) for type II, (r, psi) on
// (0,inf)x(pi/2,pi) for type III.  This module carries the measures, their
// moments m_p = Int a^p pi(da), the integrability conditions each type
// needs to exist, and parameter sampling.

#include <complex>
#include <functional>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "supcar/common.hpp"
#include "supcar/quadrature.hpp"
#include "supcar/rng.hpp"

namespace supcar {

struct DiracM {
  double x = 1.0;
};
struct GammaM {
  double shape = 1.0;
  double rate = 1.0;
};
struct BetaM {
  double b0 = 1.0;
  double b1 = 1.0;
};
struct UniformM {
  double lo = 0.0;
  double hi = 1.0;
};
// Probability atoms (x_j, mass_j); masses sum to 1.
struct DiscreteM {
  std::vector<std::pair<double, double>> atoms;
};
// Built-in angle density -sin(2 psi) on (pi/2, pi); cdf cos^2(psi).
struct Sin2M {};
// General density with an inverse-cdf table built at construction; create
// through density_measure() so the table and the normalization check exist.
struct DensityM {
  std::function<double(double)> pdf;
  double lo = 0.0;
  double hi = 1.0;
  // (x_k, F(x_k)) nodes, F normalized to 1 at the last node.
  std::shared_ptr<const std::vector<std::pair<double, double>>> table;
};

using Measure1D =
    std::variant<DiracM, GammaM, BetaM, UniformM, DiscreteM, Sin2M, DensityM>;

// Validates pdf >= 0 and total mass 1 (within quadrature accuracy, nominal
// 1e-12), builds the quantile table; hi may be +inf.
Measure1D density_measure(std::function<double(double)> pdf, double lo,
                          double hi);

// Throws std::invalid_argument on malformed parameters (nonpositive
// shapes/rates, masses not summing to 1, missing density table, ...).
void validate_measure(const Measure1D& m);

// Int x^p pi(dx) for measures on (0,inf): closed forms for
// dirac/gamma/beta/uniform/discrete, quadrature for sin2/density.
// Returns +inf when the integral diverges.
double m_p(const Measure1D& m, double p);

// Same moment forced through adaptive quadrature (cross-check route);
// atomic measures fall back to the exact sum.
double m_p_quadrature(const Measure1D& m, double p);

// Inverse cdf at u in (0,1).
double quantile(const Measure1D& m, double u);

// Density at x for the continuous kinds (0 outside the support); atomic
// kinds return 0 everywhere.
double pdf_of(const Measure1D& m, double x);

// E[f] with quadrature diagnostics; expect_on restricts to (a,b) (atoms on
// the boundary excluded, matching open-interval conditions).  The Options
// overloads let nested integrations pick their own tolerance budget.
quad::Result expect(const Measure1D& m, const std::function<double(double)>& f,
                    const quad::Options& opt = {});
quad::CResult expect_c(const Measure1D& m,
                       const std::function<std::complex<double>(double)>& f,
                       const quad::Options& opt = {});
quad::Result expect_on(const Measure1D& m,
                       const std::function<double(double)>& f, double a,
                       double b);

double sample_measure(const Measure1D& m, RngStream& rng);

// Full mixing specification.  law1 holds rho (I), the lambda law (II) or
// the r law (III); law2 the theta law (II) or psi law (III).  Joint
// discrete specs list ((v1,v2), mass) atoms instead.
struct MixingSpec {
  TypeTag tag = TypeTag::I;
  Measure1D law1 = DiracM{1.0};
  Measure1D law2 = DiracM{0.75};
  bool joint = false;
  std::vector<std::pair<ParamPoint, double>> joint_atoms;

  static MixingSpec type1(Measure1D rho);
  static MixingSpec type2(Measure1D lambda_law, Measure1D theta_law);
  static MixingSpec type2_joint(
      std::vector<std::pair<ParamPoint, double>> atoms);
  static MixingSpec type3(Measure1D r_law, Measure1D psi_law);
  static MixingSpec type3_joint(
      std::vector<std::pair<ParamPoint, double>> atoms);
};

// Existence conditions per type.  Product forms check the reduced
// conditions; joint-discrete forms evaluate the joint integrals as sums.
ConditionReport check_type1(const Measure1D& rho);
ConditionReport check_type2(const MixingSpec& mix);
ConditionReport check_type3(const MixingSpec& mix);
ConditionReport check_mixing(const MixingSpec& mix);

// Mixing-side p-th moment condition for the stationary process:
// I: none for p <= 2, else m_{-(p+1)}(rho) < inf; II: lambda^{-(p+1)}/theta
// integrable; III: r^{-(p+1)}/|cos psi| integrable.
bool moment_condition(const MixingSpec& mix, double p);

// One parameter draw; deterministic given the stream.
ParamPoint sample_params(const MixingSpec& mix, RngStream& rng);

}  // namespace supcar
