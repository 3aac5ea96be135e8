#include "supcar/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>

#include "supcar/kernels.hpp"
#include "supcar/quadrature.hpp"

namespace supcar {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.57079632679489661923;
const double kInf = std::numeric_limits<double>::infinity();

quad::Options tols(double abs_tol, double rel_tol) {
  quad::Options opt;
  opt.abs_tol = abs_tol;
  opt.rel_tol = rel_tol;
  return opt;
}

// Tolerance pair for nested mixing integrals: the outer level owns the
// accuracy budget, inner integrals run much tighter so nesting noise stays
// below it.
struct Tols {
  quad::Options outer;
  quad::Options inner;
};

template <class R>
void guard(const R& r, const quad::Options& opt, const char* what) {
  if (r.diverged) throw MathError(std::string(what) + ": integral diverges");
  const double mag = quad::norm_of(r.value);
  const double target = std::max(opt.abs_tol, opt.rel_tol * mag);
  if (!r.converged && r.error > 50.0 * target) {
    std::ostringstream os;
    os << what << ": quadrature failed (value " << mag << ", err " << r.error
       << ", evals " << r.evals << ")";
    throw MathError(os.str());
  }
}

// E over the mixing measure of h(v1, v2) (v2 unused for type I).  Joint
// atoms are summed; product laws nest with law2 outside.
double mix_E(const MixingSpec& mix, const char* what, const Tols& t,
             const std::function<double(double, double)>& h) {
  if (mix.joint) {
    double sum = 0.0;
    for (const auto& [pt, mass] : mix.joint_atoms) sum += mass * h(pt.v1, pt.v2);
    return sum;
  }
  if (mix.tag == TypeTag::I) {
    auto r = expect(
        mix.law1, [&h](double a) { return h(a, 0.0); }, t.outer);
    guard(r, t.outer, what);
    return r.value;
  }
  auto r = expect(
      mix.law2,
      [&](double v2) {
        auto in = expect(
            mix.law1, [&h, v2](double v1) { return h(v1, v2); }, t.inner);
        guard(in, t.inner, what);
        return in.value;
      },
      t.outer);
  guard(r, t.outer, what);
  return r.value;
}

// Cancellation-free form of (theta^{-1} e^{-l th tau} - e^{-l tau}) /
// (1 - theta^2):
//   [l tau phi(l tau (1-theta)) e^{-l theta tau} + e^{-l tau}] /
//   (theta (1+theta)),   phi(x) = -expm1(-x)/x,
// which degrades gracefully into the double-root kernel as theta -> 1 and
// equals 1/(theta(1+theta)) at tau = 0.
double bracket2(double lam, double th, double tau) {
  const double w = lam * tau * (1.0 - th);
  const double phi = w > 0.0 ? -std::expm1(-w) / w : 1.0;
  return (lam * tau * phi * std::exp(-lam * th * tau) + std::exp(-lam * tau)) /
         (th * (1.0 + th));
}

// e^{r tau cos psi} sin(r tau sin psi - psi) / sin(2 psi); equals
// 1/(2 |cos psi|) at tau = 0.
double bracket3(double r, double psi, double tau) {
  return std::exp(r * tau * std::cos(psi)) *
         std::sin(r * tau * std::sin(psi) - psi) / std::sin(2.0 * psi);
}

// Covariance numerators: cov = Var L(1) * prefactor * num_typeX, with
// prefactors 2, 1/2, 1/2 for types I, II, III.
double num_type1(const MixingSpec& mix, double tau, const Tols& t) {
  return mix_E(mix, "type I correlation integral", t,
               [tau](double a, double) {
                 return (0.5 * a * tau + 1.0) * std::exp(-0.5 * a * tau) /
                        (a * a * a);
               });
}

double num_type2(const MixingSpec& mix, double tau, const Tols& t) {
  return mix_E(mix, "type II correlation integral", t,
               [tau](double lam, double th) {
                 return bracket2(lam, th, tau) / (lam * lam * lam);
               });
}

double num_type3(const MixingSpec& mix, double tau, const Tols& t) {
  return mix_E(mix, "type III correlation integral", t,
               [tau](double r, double psi) {
                 return bracket3(r, psi, tau) / (r * r * r);
               });
}

// Gamma r-law shortcut: the radial integral collapses through
//   E_r[r^{-3} e^{r tau cos psi} sin(r tau sin psi - psi)]
//     = c^3 G(s-3)/G(s) * Im(e^{-i psi} (1 - (tau/c) e^{i psi})^{-(s-3)}),
// leaving one smooth angle integral.  Principal branch: the base stays in
// the right half-plane because cos psi < 0.  Needed at large lags, where
// direct radial quadrature would have to resolve ~tau oscillations.
double num_type3_gamma(const GammaM& g, const Measure1D& psi_law, double tau,
                       const Tols& t) {
  const double alpha = g.shape - 3.0;
  const double fac = std::exp(std::lgamma(alpha) - std::lgamma(g.shape) +
                              3.0 * std::log(g.rate));
  const double tc = tau / g.rate;
  auto r = expect(
      psi_law,
      [alpha, tc](double psi) {
        const std::complex<double> base(1.0 - tc * std::cos(psi),
                                        -tc * std::sin(psi));
        const std::complex<double> val =
            std::exp(std::complex<double>(0.0, -psi)) * std::pow(base, -alpha);
        return val.imag() / std::sin(2.0 * psi);
      },
      t.outer);
  guard(r, t.outer, "type III correlation integral");
  return fac * r.value;
}

const char* mean_cond_name(TypeTag tag) {
  switch (tag) {
    case TypeTag::I:
      return "int a^-2 rho(da)";
    case TypeTag::II:
      return "int lambda^-2 theta^-1 pi(dlambda,dtheta)";
    default:
      return "int r^-2 pi(dr,dpsi)";
  }
}

const char* var_cond_name(TypeTag tag) {
  switch (tag) {
    case TypeTag::I:
      return "int a^-3 rho(da)";
    case TypeTag::II:
      return "int lambda^-3 theta^-1 (1+theta)^-1 pi(dlambda,dtheta)";
    default:
      return "int r^-3 |cos psi|^-1 pi(dr,dpsi)";
  }
}

// Expectation that maps divergence to +inf (the caller names the condition)
// but still throws on an unusable quadrature state.
double expect_or_inf(const Measure1D& m, const std::function<double(double)>& f,
                     const char* what) {
  const auto opt = tols(1e-11, 1e-10);
  auto r = expect(m, f, opt);
  if (r.diverged) return kInf;
  guard(r, opt, what);
  return r.value;
}

// E[mean kernel mass] per unit E L(1); closed moments where available.
double mean_mix_factor(const ProcessSpec& spec) {
  const MixingSpec& mix = spec.mixing;
  if (mix.joint) {
    double sum = 0.0;
    for (const auto& [pt, mass] : mix.joint_atoms)
      sum += spec.tag == TypeTag::II
                 ? mass / (pt.v1 * pt.v1 * pt.v2)
                 : mass / (pt.v1 * pt.v1);
    return sum;
  }
  switch (spec.tag) {
    case TypeTag::I:
      return 4.0 * m_p(mix.law1, -2.0);
    case TypeTag::II:
      return m_p(mix.law1, -2.0) * m_p(mix.law2, -1.0);
    default:
      return m_p(mix.law1, -2.0);
  }
}

// E[variance kernel mass] per unit Var L(1), prefactors included.
double var_mix_factor(const ProcessSpec& spec) {
  const MixingSpec& mix = spec.mixing;
  if (mix.joint) {
    double sum = 0.0;
    for (const auto& [pt, mass] : mix.joint_atoms) {
      const double v1_3 = pt.v1 * pt.v1 * pt.v1;
      sum += spec.tag == TypeTag::II
                 ? 0.5 * mass / (v1_3 * pt.v2 * (1.0 + pt.v2))
                 : 0.25 * mass / (v1_3 * std::fabs(std::cos(pt.v2)));
    }
    return sum;
  }
  switch (spec.tag) {
    case TypeTag::I:
      return 2.0 * m_p(mix.law1, -3.0);
    case TypeTag::II:
      return 0.5 * m_p(mix.law1, -3.0) *
             expect_or_inf(
                 mix.law2,
                 [](double th) { return 1.0 / (th * (1.0 + th)); },
                 "variance mixing integral");
    default:
      return 0.25 * m_p(mix.law1, -3.0) *
             expect_or_inf(
                 mix.law2,
                 [](double psi) { return 1.0 / std::fabs(std::cos(psi)); },
                 "variance mixing integral");
  }
}

// Correlation evaluator with the lag-0 normalization integral computed once.
std::function<double(double)> make_evaluator(const ProcessSpec& spec) {
  const Tols t{tols(1e-10, 1e-9), tols(2e-12, 2e-11)};
  switch (spec.tag) {
    case TypeTag::I: {
      if (const auto* g = std::get_if<GammaM>(&spec.mixing.law1);
          g && g->shape > 3.0) {
        const double alpha = g->shape - 3.0, rate = g->rate;
        return [alpha, rate](double tau) {
          return acf_closed_gamma_I(alpha, tau / rate);
        };
      }
      const MixingSpec mix = spec.mixing;
      const double den = num_type1(mix, 0.0, t);
      if (!(den > 0.0) || !std::isfinite(den))
        throw MathError("correlation undefined: int a^-3 rho(da) diverges");
      return [mix, den, t](double tau) { return num_type1(mix, tau, t) / den; };
    }
    case TypeTag::II: {
      const MixingSpec mix = spec.mixing;
      const double den = num_type2(mix, 0.0, t);
      if (!(den > 0.0) || !std::isfinite(den))
        throw MathError(std::string("correlation undefined: ") +
                        var_cond_name(spec.tag) + " diverges");
      return [mix, den, t](double tau) { return num_type2(mix, tau, t) / den; };
    }
    default: {
      if (!spec.mixing.joint) {
        if (const auto* g = std::get_if<GammaM>(&spec.mixing.law1);
            g && g->shape > 3.0) {
          const GammaM rg = *g;
          const Measure1D psi = spec.mixing.law2;
          const double den = num_type3_gamma(rg, psi, 0.0, t);
          if (!(den > 0.0) || !std::isfinite(den))
            throw MathError(std::string("correlation undefined: ") +
                            var_cond_name(spec.tag) + " diverges");
          return [rg, psi, den, t](double tau) {
            return num_type3_gamma(rg, psi, tau, t) / den;
          };
        }
      }
      const MixingSpec mix = spec.mixing;
      const double den = num_type3(mix, 0.0, t);
      if (!(den > 0.0) || !std::isfinite(den))
        throw MathError(std::string("correlation undefined: ") +
                        var_cond_name(spec.tag) + " diverges");
      return [mix, den, t](double tau) { return num_type3(mix, tau, t) / den; };
    }
  }
}

double kernel_at(TypeTag tag, double v1, double v2, double u) {
  switch (tag) {
    case TypeTag::I:
      return g1(v1, u);
    case TypeTag::II:
      return g2(v1, v2, u);
    default:
      return g3(v1, v2, u);
  }
}

// Exponential decay rate of the kernel envelope |g| <= u e^{-c u}.
double decay_of(TypeTag tag, double v1, double v2) {
  switch (tag) {
    case TypeTag::I:
      return 0.5 * v1;
    case TypeTag::II:
      return v1 * v2;
    default:
      return v1 * std::fabs(std::cos(v2));
  }
}

// Fixed composite Gauss-Kronrod rule on [0, L]: panel widths double from h0
// up to cap.  Unlike the adaptive driver this has no data-dependent
// subdivision, so a family of integrands sharing one schedule produces
// values that vary smoothly with their parameters; the summed Kronrod-Gauss
// differences still certify the error.
template <class F>
std::pair<double, double> octave_rule(F f, double h0, double cap, double L) {
  double a = 0.0, width = h0, val = 0.0, err = 0.0;
  while (a < L) {
    double b = a + width;
    if (b > L) b = L;
    auto p = quad::detail::gk15(f, a, b);
    val += p.value;
    err += p.error;
    a = b;
    width = std::min(width * 2.0, cap);
  }
  return {val, err};
}

// Int_0^inf g(v,s) g(v,s+tau) ds for one parameter point, evaluated in the
// scale-free variable u = scale * s.  Each kernel factors as
//   g(v, s) = scale^{-1} ghat(shape, scale * s)
// with (scale, shape) = (a, -), (lambda, theta), (r, psi), so the product
// integral is scale^{-3} K(shape, scale * tau) and the quadrature schedule
// never depends on the scale parameter.  Type III sums its geometric tail
// exactly:
//   f(u + pi/sin psi) = q f(u),  q = e^{2 pi cot psi} < 1,
// holds for every psi in (pi/2, pi), so one period of quadrature divided by
// -expm1(2 pi cot psi) covers the whole axis.
//
// This sits under two adaptive mixing integrals, and an adaptive rule here
// would hand them values that jitter at its own tolerance, which the panel
// error estimator above can inflate enough to stall convergence.  The fixed
// schedule depends only on (type, shape), never on the lag, so the value is
// smooth in lag and mixing node alike.  Errors are certified against the
// kernel's w = 0 magnitude: that is the scale on which the expectation
// accumulates them, and deep-tail values (e^{-theta w}-suppressed) may be
// coarse relative to themselves but are still exact on the scale that
// matters.
double kernel_product_integral(TypeTag tag, double v1, double v2, double tau) {
  const double w = v1 * tau;
  double k = 0.0, err = 0.0, peak = 1.0;
  for (double refine = 1.0;; refine *= 2.0) {
    std::pair<double, double> r;
    switch (tag) {
      case TypeTag::I: {
        auto f = [w](double u) {
          return u * (u + w) * std::exp(-u - 0.5 * w);
        };
        r = octave_rule(f, 0.25 / refine, 2.5, 55.0);
        peak = 2.0;
        break;
      }
      case TypeTag::II: {
        const double th = v2;
        auto gh = [th](double u) {
          const double x = (1.0 - th) * u;
          const double phi = x > 0.0 ? -std::expm1(-x) / x : 1.0;
          return u * phi * std::exp(-th * u);
        };
        auto f = [gh, w](double u) { return gh(u) * gh(u + w); };
        const double slow = 2.0 * th;  // decay rate of gh^2
        r = octave_rule(f, 0.125 / refine, 2.5 / slow, 55.0 / slow);
        peak = 0.5 / th;  // within 2x of K(theta, 0) on all of (0, 1)
        break;
      }
      default: {
        const double sp = std::sin(v2), cp = std::cos(v2);
        auto gh = [sp, cp](double u) {
          return std::exp(u * cp) * std::sin(u * sp) / sp;
        };
        auto f = [gh, w](double u) { return gh(u) * gh(u + w); };
        const double m = std::max(sp, -cp);
        const double L = std::min(kPi / sp, 27.5 / -cp);
        r = octave_rule(f, 0.125 / (m * refine), 1.25 / m, L);
        const double q1 = -std::expm1(2.0 * kPi * cp / sp);
        r.first /= q1;
        r.second /= q1;
        peak = 0.25 / -cp;  // closed form: K(psi, 0) = -1 / (4 cos psi)
        break;
      }
    }
    k = r.first;
    err = r.second;
    if (err <= std::max(1e-13 * peak, 3e-12 * std::fabs(k))) break;
    if (refine >= 4.0) {
      std::ostringstream os;
      os << "covariance oracle inner integral: rule error " << err
         << " exceeds budget at scale " << peak;
      throw MathError(os.str());
    }
  }
  return k / (v1 * v1 * v1);
}

// Expectation routes for the oracle's mixing levels.  The generic expect()
// resolves integrable endpoint singularities with dyadic shells, which is
// robust but pays ~60 shells per call; here the gamma and beta laws are
// substituted so the singularity disappears and a handful of panels
// suffice:
//   gamma: lam = y^2 turns lam^{shape-1} dlam into y^{2 shape - 1} dy,
//   beta:  th = t^2 below 1/2 and th = 1 - t^2 above, one branch per
//          endpoint.
// Remaining kinds have no endpoint issue and integrate as they are.
template <class H>
double oracle_expect(const Measure1D& m, const char* what,
                     const quad::Options& opt, H h) {
  if (const auto* d = std::get_if<DiracM>(&m)) return h(d->x);
  if (const auto* ds = std::get_if<DiscreteM>(&m)) {
    double sum = 0.0;
    for (const auto& [x, mass] : ds->atoms) sum += mass * h(x);
    return sum;
  }
  if (const auto* g = std::get_if<GammaM>(&m)) {
    const double lc = g->shape * std::log(g->rate) - std::lgamma(g->shape);
    auto f = [&](double y) {
      const double lam = y * y;
      return 2.0 * h(lam) *
             std::exp(lc + (2.0 * g->shape - 1.0) * std::log(y) -
                      g->rate * lam);
    };
    const double body =
        std::sqrt((g->shape + 6.0 * std::sqrt(g->shape) + 40.0) / g->rate);
    auto head = quad::integrate(f, 0.0, body, opt);
    guard(head, opt, what);
    auto tail = quad::integrate_tail(f, body, opt);
    return head.value + tail.value;
  }
  if (const auto* b = std::get_if<BetaM>(&m)) {
    if (b->b0 >= 0.5 && b->b1 >= 0.5) {
      auto fl = [&](double t) {
        const double x = t * t;
        return 2.0 * t * h(x) * pdf_of(m, x);
      };
      auto fr = [&](double t) {
        const double x = 1.0 - t * t;
        return 2.0 * t * h(x) * pdf_of(m, x);
      };
      const double s = std::sqrt(0.5);
      auto left = quad::integrate(fl, 0.0, s, opt);
      guard(left, opt, what);
      auto right = quad::integrate(fr, 0.0, s, opt);
      guard(right, opt, what);
      return left.value + right.value;
    }
  } else if (const auto* u = std::get_if<UniformM>(&m)) {
    auto f = [&](double x) { return h(x) / (u->hi - u->lo); };
    auto r = quad::integrate(f, u->lo, u->hi, opt);
    guard(r, opt, what);
    return r.value;
  } else if (std::get_if<Sin2M>(&m)) {
    auto f = [&](double x) { return h(x) * -std::sin(2.0 * x); };
    auto r = quad::integrate(f, kHalfPi, kPi, opt);
    guard(r, opt, what);
    return r.value;
  }
  auto r = expect(m, std::function<double(double)>(h), opt);
  guard(r, opt, what);
  return r.value;
}

// mix_E with the substituted expectations underneath.
double oracle_mix_E(const MixingSpec& mix, const char* what, const Tols& t,
                    const std::function<double(double, double)>& h) {
  if (mix.joint) {
    double sum = 0.0;
    for (const auto& [pt, mass] : mix.joint_atoms) sum += mass * h(pt.v1, pt.v2);
    return sum;
  }
  if (mix.tag == TypeTag::I) {
    return oracle_expect(
        mix.law1, what, t.outer, [&h](double a) { return h(a, 0.0); });
  }
  return oracle_expect(mix.law2, what, t.outer, [&](double v2) {
    return oracle_expect(mix.law1, what, t.inner,
                         [&h, v2](double v1) { return h(v1, v2); });
  });
}

}  // namespace

ProcessSpec ProcessSpec::make(LevyTriplet levy, MixingSpec mixing,
                              bool unchecked) {
  ProcessSpec spec;
  spec.tag = mixing.tag;
  spec.levy = std::move(levy);
  spec.mixing = std::move(mixing);
  spec.checked = !unchecked;
  if (unchecked) return spec;
  auto lm = log_moment_check(spec.levy.jump);
  if (!lm.finite)
    throw MathError(
        "log-moment condition fails: int_{|x|>1} log|x| mu(dx) diverges");
  auto rep = check_mixing(spec.mixing);
  if (!rep.pass)
    throw MathError("existence conditions fail: " + rep.diagnostics);
  return spec;
}

std::pair<double, double> mean_var(const ProcessSpec& spec) {
  auto mv = mean_var_L(spec.levy);
  const double m1 = mean_mix_factor(spec);
  if (!std::isfinite(m1))
    throw MathError(std::string("mean undefined: ") +
                    mean_cond_name(spec.tag) + " diverges");
  const double m2 = var_mix_factor(spec);
  if (!std::isfinite(m2))
    throw MathError(std::string("variance infinite: ") +
                    var_cond_name(spec.tag) + " diverges");
  return {mv.first * m1, mv.second * m2};
}

double acf_value(const ProcessSpec& spec, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("lag must be finite and nonnegative");
  auto mv = mean_var(spec);
  if (!(mv.second > 0.0))
    throw MathError("correlation undefined: Var X(t) = 0");
  return make_evaluator(spec)(tau);
}

AcfTable acf(const ProcessSpec& spec, const std::vector<double>& taus) {
  if (taus.empty()) throw std::invalid_argument("lag grid must not be empty");
  double prev = -1.0;
  for (double tau : taus) {
    if (!(tau >= 0.0) || !std::isfinite(tau))
      throw std::invalid_argument("lags must be finite and nonnegative");
    if (!(tau > prev))
      throw std::invalid_argument("lags must be strictly increasing");
    prev = tau;
  }
  auto mv = mean_var(spec);
  if (!(mv.second > 0.0))
    throw MathError("correlation undefined: Var X(t) = 0");
  auto r_of = make_evaluator(spec);
  const double r0 = r_of(0.0);
  if (std::fabs(r0 - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "correlation normalization failed: r(0) = " << r0;
    throw MathError(os.str());
  }
  AcfTable table;
  table.rows.reserve(taus.size());
  for (double tau : taus)
    table.rows.push_back({tau, tau == 0.0 ? 1.0 : r_of(tau), {}, {}});
  return table;
}

double acf_closed_gamma_I(double alpha, double tau) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("lag must be finite and nonnegative");
  return std::exp2(alpha) * ((alpha + 1.0) * tau + 2.0) /
         std::pow(tau + 2.0, alpha + 1.0);
}

double acf_type2_gamma_beta(double alpha, double beta0, double beta1,
                            double tau) {
  if (!(alpha > 0.0) || !(beta0 > 1.0) || !(beta1 > 0.0))
    throw std::invalid_argument(
        "gamma-beta correlation needs alpha > 0, beta0 > 1, beta1 > 0");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("lag must be finite and nonnegative");
  if (tau == 0.0) return 1.0;
  const auto opt = tols(1e-12, 1e-11);
  const double tf = tau / (tau + 1.0);
  // Integrating the lambda marginal first leaves
  //   r(tau) = (tau+1)^{-alpha} E[(1 + tf Q((1-theta) tf)) / (theta(1+theta))]
  //            / E[1/(theta(1+theta))],
  // with Q(z) = expm1(-alpha log1p(-z))/z > 0, free of the theta -> 1
  // cancellation of the raw difference form.
  auto num = expect(
      BetaM{beta0, beta1},
      [alpha, tf](double th) {
        const double z = (1.0 - th) * tf;
        const double q =
            z > 0.0 ? std::expm1(-alpha * std::log1p(-z)) / z : alpha;
        return (1.0 + tf * q) / (th * (1.0 + th));
      },
      opt);
  guard(num, opt, "gamma-beta correlation");
  auto den = expect(
      BetaM{beta0, beta1},
      [](double th) { return 1.0 / (th * (1.0 + th)); }, opt);
  guard(den, opt, "gamma-beta correlation");
  return std::pow(tau + 1.0, -alpha) * num.value / den.value;
}

double cov_oracle(const ProcessSpec& spec, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("lag must be finite and nonnegative");
  auto mv = mean_var_L(spec.levy);
  const Tols t{tols(2e-9, 1e-7), tols(1e-12, 3e-11)};
  const TypeTag tag = spec.tag;
  const double e = oracle_mix_E(spec.mixing, "covariance oracle", t,
                                [tag, tau](double v1, double v2) {
                                  return kernel_product_integral(tag, v1, v2, tau);
                                });
  return mv.second * e;
}

std::complex<double> cumulant_X(const ProcessSpec& spec, double zeta) {
  if (!std::isfinite(zeta))
    throw std::invalid_argument("zeta must be finite");
  if (zeta == 0.0) return {0.0, 0.0};
  // Tight budgets: downstream consumers difference kappa at small zeta, so
  // absolute noise here is amplified by 1/h^2.
  const auto uopt = tols(1e-13, 1e-11);
  const auto oopt = tols(1e-12, 1e-10);
  const TypeTag tag = spec.tag;
  const LevyTriplet& levy = spec.levy;
  const double az = std::fabs(zeta);
  auto inner = [&](double v1, double v2) -> std::complex<double> {
    const double c = decay_of(tag, v1, v2);
    // |g| |zeta| <= u e^{-cu} |zeta| drops below 1e-12 past this point.
    const double cap =
        (45.0 + std::max(0.0, std::log(az)) + std::log1p(1.0 / c)) / c;
    auto f = [&](double u) {
      return cumulant_L(zeta * kernel_at(tag, v1, v2, u), levy);
    };
    auto r = quad::integrate(f, 0.0, cap, uopt);
    guard(r, uopt, "cumulant inner integral");
    return r.value;
  };
  if (spec.mixing.joint) {
    std::complex<double> sum{};
    for (const auto& [pt, mass] : spec.mixing.joint_atoms)
      sum += mass * inner(pt.v1, pt.v2);
    return sum;
  }
  if (tag == TypeTag::I) {
    auto r = expect_c(
        spec.mixing.law1, [&](double a) { return inner(a, 0.0); }, oopt);
    guard(r, oopt, "cumulant mixing integral");
    return r.value;
  }
  auto r = expect_c(
      spec.mixing.law2,
      [&](double v2) {
        auto in = expect_c(
            spec.mixing.law1, [&](double v1) { return inner(v1, v2); }, uopt);
        guard(in, uopt, "cumulant mixing integral");
        return in.value;
      },
      oopt);
  guard(r, oopt, "cumulant mixing integral");
  return r.value;
}

double gaussian_component(const ProcessSpec& spec) {
  if (spec.levy.sigma2 == 0.0) return 0.0;
  const double m2 = var_mix_factor(spec);
  if (!std::isfinite(m2))
    throw MathError(std::string("Gaussian component infinite: ") +
                    var_cond_name(spec.tag) + " diverges");
  return spec.levy.sigma2 * m2;
}

std::pair<double, double> asymptotic_constant(const AsymptoticFamily& family) {
  const double a = family.alpha;
  switch (family.tag) {
    case TypeTag::I:
      if (!(a > 0.0))
        throw std::invalid_argument("no closed asymptotic: alpha must be > 0");
      return {a, std::exp2(a) * (a + 1.0)};
    case TypeTag::III:
      if (!(a > 0.0))
        throw std::invalid_argument("no closed asymptotic: alpha must be > 0");
      return {a, (1.0 + std::sin(0.5 * a * kPi)) / (1.0 + a)};
    default: {
      const double b0 = family.beta0, b1 = family.beta1;
      if (!(a > 0.0) || !(b0 > a + 1.0) || !(b1 > 0.0))
        throw std::invalid_argument(
            "no closed asymptotic: type II needs alpha > 0, "
            "beta0 > alpha+1, beta1 > 0");
      const auto opt = tols(1e-13, 1e-12);
      // C = [Int theta^{b0-1}(1-theta)^{b1-2}(theta^{-(a+1)}-1)/(1+theta)]
      //     / [Int theta^{b0-2}(1-theta)^{b1-1}/(1+theta)];
      // the numerator's power difference is evaluated in a form that never
      // overflows and keeps the linear zero at theta = 1 explicit.
      auto pow_diff = [a, b0](double th) {
        const double lt = std::log(th);
        const double e = -(a + 1.0) * lt;
        if (e > 700.0) return std::exp((b0 - a - 2.0) * lt);
        return std::exp((b0 - 1.0) * lt) * std::expm1(e);
      };
      auto nf = [&pow_diff, b1](double th) {
        return pow_diff(th) * std::exp((b1 - 2.0) * std::log1p(-th)) /
               (1.0 + th);
      };
      auto df = [b0, b1](double th) {
        return std::exp((b0 - 2.0) * std::log(th) +
                        (b1 - 1.0) * std::log1p(-th)) /
               (1.0 + th);
      };
      auto num_lo = quad::integrate_singular(nf, 0.0, 0.5, opt);
      auto num_hi = quad::integrate_singular(nf, 1.0, 0.5, opt);
      auto den_lo = quad::integrate_singular(df, 0.0, 0.5, opt);
      auto den_hi = quad::integrate_singular(df, 1.0, 0.5, opt);
      for (const auto* r : {&num_lo, &num_hi, &den_lo, &den_hi})
        guard(*r, opt, "type II asymptotic constant");
      return {a, (num_lo.value + num_hi.value) /
                     (den_lo.value + den_hi.value)};
    }
  }
}

double j_theta(double p, double theta) {
  if (!(p > 0.0)) throw std::invalid_argument("p must be > 0");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("theta must lie in (0,1)");
  const double q = p * theta / (1.0 - theta);
  return std::exp(std::lgamma(q) + std::lgamma(p + 1.0) -
                  std::lgamma(q + p + 1.0)) /
         (1.0 - theta);
}

}  // namespace supcar
