#pragma once
// Second-order analysis of supCAR(2) processes.  With m = E L(1),
// v = Var L(1) and pi the mixing measure:
//
//   type I    mean 4 m_{-2}(rho) m,   var 2 m_{-3}(rho) v,
//             cov(tau) = 2v E[a^{-3} (a tau/2 + 1) e^{-a tau/2}]
//   type II   mean m E[lambda^{-2} theta^{-1}],
//             var (v/2) E[lambda^{-3} theta^{-1} (1+theta)^{-1}],
//             cov(tau) = (v/2) E[lambda^{-3} (1-theta^2)^{-1}
//                          (theta^{-1} e^{-lambda theta tau} - e^{-lambda tau})]
//   type III  mean m E[r^{-2}],   var (v/4) E[r^{-3} |cos psi|^{-1}],
//             cov(tau) = (v/2) E[r^{-3} e^{r tau cos psi}
//                                sin(r tau sin psi - psi) / sin(2 psi)]
//
// plus the stationary Gaussian component, the cumulant transform, closed-form
// example correlations, tail constants of r(tau) ~ C tau^{-alpha}, and a
// brute-force covariance quadrature used as the independent test oracle.

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "supcar/common.hpp"
#include "supcar/levy.hpp"
#include "supcar/mixing.hpp"

namespace supcar {

// Full model: driving Lévy triplet plus a mixing measure of matching type.
struct ProcessSpec {
  TypeTag tag = TypeTag::I;
  LevyTriplet levy;
  MixingSpec mixing;
  bool checked = false;

  // Validates the Lévy log-moment condition and the per-type existence
  // conditions, throwing MathError with the failing condition's name.
  // unchecked = true skips both gates (experimentation only).
  static ProcessSpec make(LevyTriplet levy, MixingSpec mixing,
                          bool unchecked = false);
};

struct AcfRow {
  double tau = 0.0;
  double r_analytic = 0.0;
  std::optional<double> r_empirical;
  std::optional<double> ci_half_width;
};

// Lag grid with analytic correlation and optional empirical columns; lags
// strictly increasing, r_analytic(0) = 1 within 1e-8.
struct AcfTable {
  std::vector<AcfRow> rows;
};

// (E X(t), Var X(t)).  Mixing integrals use closed forms where available,
// else adaptive quadrature.  Throws MathError naming the diverging integral
// when the mean or variance is infinite.
std::pair<double, double> mean_var(const ProcessSpec& spec);

// Correlation r(tau) at one nonnegative lag / on an increasing grid.
// Closed forms dispatch for (type I, gamma rho) and atomic mixings; type III
// with a gamma r-law reduces the r-integral exactly and quadratures only the
// angle; everything else runs nested adaptive quadrature.
double acf_value(const ProcessSpec& spec, double tau);
AcfTable acf(const ProcessSpec& spec, const std::vector<double>& taus);

// Closed correlation for type I with Gamma(alpha+3, 1) mixing:
// 2^alpha (alpha tau + tau + 2) / (tau+2)^{alpha+1}.
double acf_closed_gamma_I(double alpha, double tau);

// Closed single-integral correlation for type II with Gamma(alpha+3, 1) x
// Beta(beta0, beta1) mixing (beta0 > 1).  Cross-check for the general path.
double acf_type2_gamma_beta(double alpha, double beta0, double beta1,
                            double tau);

// Brute-force covariance Var L(1) * E Int_0^inf g(v,s) g(v,s+tau) ds via
// nested quadrature over the kernel itself; independent of the closed
// covariance formulas above and used as the oracle in tests.
double cov_oracle(const ProcessSpec& spec, double tau);

// kappa_X(zeta) = Int_V Int_0^inf kappa_L(zeta g(v,u)) du pi(dv); the inner
// integral is truncated where the kernel envelope drops |g| |zeta| below
// 1e-12.
std::complex<double> cumulant_X(const ProcessSpec& spec, double zeta);

// Gaussian part of the stationary marginal triplet:
// 2 Sigma m_{-3}(rho) (I), (Sigma/2) E[lambda^{-3} theta^{-1} (1+theta)^{-1}]
// (II), (Sigma/4) E[r^{-3} |cos psi|^{-1}] (III).
double gaussian_component(const ProcessSpec& spec);

// The three worked long-memory families: (I, Gamma(alpha+3,1)),
// (II, Gamma(alpha+3,1) x Beta(beta0,beta1) with beta0 > alpha+1),
// (III, Gamma(alpha+3,1) x sin2 angle law).
struct AsymptoticFamily {
  TypeTag tag = TypeTag::I;
  double alpha = 1.0;
  double beta0 = 0.0;  // type II only
  double beta1 = 0.0;  // type II only
};

// (alpha, C) with r(tau) ~ C tau^{-alpha}: C = 2^alpha (alpha+1) (I); the
// theta-integral constant evaluated by quadrature (II);
// (1 + sin(alpha pi/2)) / (1+alpha) (III).  Never fits empirically; throws
// std::invalid_argument("no closed asymptotic ...") outside these families.
std::pair<double, double> asymptotic_constant(const AsymptoticFamily& family);

// J(theta) = B(p theta/(1-theta), p+1) / (1-theta) via log-gamma; the
// closed form of Int_0^inf (e^{-theta u} - e^{-u})^p du used by moment
// diagnostics.  J(theta) ~ 1/(p theta) at 0 and -> 0 at 1.
double j_theta(double p, double theta);

}  // namespace supcar
