#include "supcar/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <type_traits>

#include "supcar/quadrature.hpp"

namespace supcar {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double phi_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.39894228040143267794;  // 1/sqrt(2 pi)
}
double phi_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

// Integrates g over (lo,hi) with splits at -1, 0, 1 (truncation kinks and
// the possibly singular origin).  Every finite cut is approached by dyadic
// shells, infinite ends by geometric tail panels, so integrable endpoint
// singularities and slow tails are both handled and divergence is flagged.
template <class G>
auto piecewise_levy(G g, double lo, double hi, const quad::Options& opt = {}) {
  using V = std::invoke_result_t<G&, double>;
  quad::BasicResult<V> total;
  total.converged = true;
  total.error = 0.0;  // accumulator; the default is the "no estimate" sentinel
  if (!(lo < hi)) return total;  // empty region integrates to zero
  auto add = [&total](const auto& r) {
    total.value = total.value + r.value;
    total.error += r.error;
    total.evals += r.evals;
    total.converged = total.converged && r.converged;
    total.diverged = total.diverged || r.diverged;
  };
  std::vector<double> cuts;
  if (std::isfinite(lo)) cuts.push_back(lo);
  for (double c : {-1.0, 0.0, 1.0})
    if (c > lo && c < hi) cuts.push_back(c);
  if (std::isfinite(hi)) cuts.push_back(hi);
  if (lo == -kInf)
    add(quad::integrate_tail([&g](double x) { return g(-x); }, -cuts.front(),
                             opt));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1], mid = 0.5 * (a + b);
    add(quad::integrate_singular(g, a, mid, opt));
    add(quad::integrate_singular(g, b, mid, opt));
  }
  if (hi == kInf) add(quad::integrate_tail(g, cuts.back(), opt));
  if (total.diverged) total.converged = false;
  return total;
}

double law_mean(const JumpLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, NormalLaw>) {
          return l.mean;
        } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
          return 1.0 / l.rate;
        } else {
          return l.p * l.x1 + (1.0 - l.p) * l.x2;
        }
      },
      law);
}

double law_second_moment(const JumpLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, NormalLaw>) {
          return l.mean * l.mean + l.sd * l.sd;
        } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
          return 2.0 / (l.rate * l.rate);
        } else {
          return l.p * l.x1 * l.x1 + (1.0 - l.p) * l.x2 * l.x2;
        }
      },
      law);
}

// E[J · 1{|J| <= 1}].
double truncated_mean(const JumpLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, NormalLaw>) {
          // Int_a^b (m + s t) phi(t) dt with t standardized.
          const double a = (-1.0 - l.mean) / l.sd;
          const double b = (1.0 - l.mean) / l.sd;
          return l.mean * (phi_cdf(b) - phi_cdf(a)) +
                 l.sd * (phi_pdf(a) - phi_pdf(b));
        } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
          // Int_0^1 x c e^{-cx} dx = -e^{-c} + (1 - e^{-c})/c.
          const double c = l.rate;
          return -std::exp(-c) - std::expm1(-c) / c;
        } else {
          double m = 0.0;
          if (std::fabs(l.x1) <= 1.0) m += l.p * l.x1;
          if (std::fabs(l.x2) <= 1.0) m += (1.0 - l.p) * l.x2;
          return m;
        }
      },
      law);
}

std::complex<double> law_chf(const JumpLaw& law, double z) {
  return std::visit(
      [z](const auto& l) -> std::complex<double> {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, NormalLaw>) {
          return std::exp(
              std::complex<double>(-0.5 * l.sd * l.sd * z * z, l.mean * z));
        } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
          return l.rate / std::complex<double>(l.rate, -z);
        } else {
          return l.p * std::polar(1.0, z * l.x1) +
                 (1.0 - l.p) * std::polar(1.0, z * l.x2);
        }
      },
      law);
}

double sample_jump(const JumpLaw& law, RngStream& rng) {
  return std::visit(
      [&rng](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, NormalLaw>) {
          return l.mean + l.sd * rng.normal();
        } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
          return rng.exponential(l.rate);
        } else {
          return rng.uniform01() < l.p ? l.x1 : l.x2;
        }
      },
      law);
}

void validate_law(const JumpLaw& law) {
  std::visit(
      [](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, NormalLaw>) {
          if (!(l.sd > 0.0) || !std::isfinite(l.sd) || !std::isfinite(l.mean))
            throw std::invalid_argument("normal jump law needs finite mean, sd > 0");
        } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
          if (!(l.rate > 0.0) || !std::isfinite(l.rate))
            throw std::invalid_argument("exponential jump law needs rate > 0");
        } else {
          if (l.x1 == 0.0 || l.x2 == 0.0 || !std::isfinite(l.x1) ||
              !std::isfinite(l.x2))
            throw std::invalid_argument("two-point jump values must be finite and nonzero");
          if (!(l.p >= 0.0 && l.p <= 1.0))
            throw std::invalid_argument("two-point probability must lie in [0,1]");
        }
      },
      law);
}

void validate_density_jumps(const DensityJumps& d) {
  if (!d.density)
    throw std::invalid_argument("jump density callable is empty");
  if (!(d.lo < d.hi))
    throw std::invalid_argument("jump density support needs lo < hi");
  if (d.lo <= 0.0 && d.hi >= 0.0 && d.zero_order >= 3.0)
    throw std::invalid_argument(
        "jump density order at 0 must be < 3 for Int x^2 mu(dx) to converge");
  // Spot-check nonnegativity on a few interior points.
  const double a = std::isfinite(d.lo) ? d.lo : -8.0;
  const double b = std::isfinite(d.hi) ? d.hi : 8.0;
  for (int i = 1; i <= 7; ++i) {
    const double x = a + (b - a) * i / 8.0;
    if (x > d.lo && x < d.hi && x != 0.0 && d.density(x) < 0.0)
      throw std::invalid_argument("jump density must be nonnegative");
  }
  auto g = [&d](double x) { return std::min(1.0, x * x) * d.density(x); };
  auto r = piecewise_levy(g, d.lo, d.hi);
  if (r.diverged || !std::isfinite(r.value))
    throw std::invalid_argument(
        "jump density violates Int min(1, x^2) mu(dx) < inf");
}

// Int_{|x| <= 1} x mu(dx); the compensation the sampler subtracts back out.
double small_jump_mean(const JumpSpec& jump) {
  return std::visit(
      [](const auto& j) -> double {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, NoJumps>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return j.rate * truncated_mean(j.law);
        } else if constexpr (std::is_same_v<T, GammaSubordinator>) {
          return j.shape * (-std::expm1(-j.rate)) / j.rate;
        } else if constexpr (std::is_same_v<T, DiscreteJumps>) {
          double m = 0.0;
          for (const auto& [x, mass] : j.atoms)
            if (std::fabs(x) <= 1.0) m += x * mass;
          return m;
        } else {
          auto g = [&j](double x) { return x * j.density(x); };
          auto r = piecewise_levy(g, std::max(j.lo, -1.0), std::min(j.hi, 1.0));
          if (r.diverged)
            throw MathError("Int_{|x|<=1} x mu(dx) diverges (infinite variation)");
          return r.value;
        }
      },
      jump);
}

std::complex<double> jump_cumulant(const JumpSpec& jump, double z) {
  const std::complex<double> iz(0.0, z);
  return std::visit(
      [z, iz](const auto& j) -> std::complex<double> {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, NoJumps>) {
          return {0.0, 0.0};
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return j.rate *
                 (law_chf(j.law, z) - 1.0 - iz * truncated_mean(j.law));
        } else if constexpr (std::is_same_v<T, GammaSubordinator>) {
          // Frullani: Int (e^{izx} - 1) x^{-1} e^{-cx} dx = -log(1 - iz/c).
          return -j.shape * std::log(1.0 - iz / j.rate) -
                 iz * j.shape * (-std::expm1(-j.rate)) / j.rate;
        } else if constexpr (std::is_same_v<T, DiscreteJumps>) {
          std::complex<double> s{0.0, 0.0};
          for (const auto& [x, mass] : j.atoms) {
            std::complex<double> term = std::polar(1.0, z * x) - 1.0;
            if (std::fabs(x) <= 1.0) term -= iz * x;
            s += mass * term;
          }
          return s;
        } else {
          auto g = [&j, z, iz](double x) -> std::complex<double> {
            std::complex<double> w = std::polar(1.0, z * x) - 1.0;
            if (std::fabs(x) <= 1.0) w -= iz * x;
            return w * j.density(x);
          };
          auto r = piecewise_levy(g, j.lo, j.hi);
          if (r.diverged)
            throw MathError("cumulant quadrature diverged for density jumps");
          if (!r.converged && r.error > 1e-6) {
            std::ostringstream os;
            os << "cumulant quadrature did not converge; achieved +-"
               << r.error;
            throw MathError(os.str());
          }
          return r.value;
        }
      },
      jump);
}

}  // namespace

void validate_jump(const JumpSpec& jump) {
  std::visit(
      [](const auto& j) {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, NoJumps>) {
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          if (!(j.rate > 0.0) || !std::isfinite(j.rate))
            throw std::invalid_argument("compound Poisson rate must be > 0");
          validate_law(j.law);
        } else if constexpr (std::is_same_v<T, GammaSubordinator>) {
          if (!(j.shape > 0.0) || !(j.rate > 0.0) ||
              !std::isfinite(j.shape) || !std::isfinite(j.rate))
            throw std::invalid_argument(
                "gamma subordinator needs shape > 0 and rate > 0");
        } else if constexpr (std::is_same_v<T, DiscreteJumps>) {
          for (const auto& [x, mass] : j.atoms) {
            if (x == 0.0 || !std::isfinite(x))
              throw std::invalid_argument("jump atoms must be finite and nonzero");
            if (!(mass > 0.0) || !std::isfinite(mass))
              throw std::invalid_argument("jump atom masses must be > 0");
          }
        } else {
          validate_density_jumps(j);
        }
      },
      jump);
}

LevyTriplet LevyTriplet::make(double gamma, double sigma2, JumpSpec jump) {
  if (!std::isfinite(gamma))
    throw std::invalid_argument("drift gamma must be finite");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("Gaussian variance sigma2 must be >= 0");
  validate_jump(jump);
  return LevyTriplet{gamma, sigma2, std::move(jump)};
}

std::complex<double> cumulant_L(double z, const LevyTriplet& triplet) {
  if (z == 0.0) return {0.0, 0.0};
  std::complex<double> k(-0.5 * triplet.sigma2 * z * z, triplet.gamma * z);
  return k + jump_cumulant(triplet.jump, z);
}

std::pair<double, double> mean_var_L(const LevyTriplet& triplet) {
  if (!p_moment_check(triplet.jump, 2.0))
    throw MathError("variance undefined: Int_{|x|>1} x^2 mu(dx) diverges");
  double mean = triplet.gamma;
  double var = triplet.sigma2;
  std::visit(
      [&mean, &var](const auto& j) {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, NoJumps>) {
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          mean += j.rate * (law_mean(j.law) - truncated_mean(j.law));
          var += j.rate * law_second_moment(j.law);
        } else if constexpr (std::is_same_v<T, GammaSubordinator>) {
          mean += j.shape * std::exp(-j.rate) / j.rate;
          var += j.shape / (j.rate * j.rate);
        } else if constexpr (std::is_same_v<T, DiscreteJumps>) {
          for (const auto& [x, mass] : j.atoms) {
            if (std::fabs(x) > 1.0) mean += x * mass;
            var += x * x * mass;
          }
        } else {
          auto tail = [&j](double x) { return x * j.density(x); };
          auto rt = piecewise_levy(tail, std::max(j.lo, 1.0), j.hi);
          auto lt = piecewise_levy(tail, j.lo, std::min(j.hi, -1.0));
          auto sq = [&j](double x) { return x * x * j.density(x); };
          auto rs = piecewise_levy(sq, j.lo, j.hi);
          if (rt.diverged || lt.diverged || rs.diverged)
            throw MathError("variance undefined: jump moment quadrature diverges");
          mean += rt.value + lt.value;
          var += rs.value;
        }
      },
      triplet.jump);
  return {mean, var};
}

CheckResult log_moment_check(const JumpSpec& jump) {
  return std::visit(
      [](const auto& j) -> CheckResult {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, NoJumps>) {
          return {true, 0.0, "no jumps"};
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          // log|x| <= |x| outside the unit ball and E|J| < inf for every
          // built-in law, so the integral is always finite; value by
          // quadrature against the law density.
          double v = 0.0;
          if (const auto* n = std::get_if<NormalLaw>(&j.law)) {
            auto pdf = [n](double x) {
              return phi_pdf((x - n->mean) / n->sd) / n->sd;
            };
            v += quad::integrate_tail(
                     [&pdf](double x) { return std::log(x) * pdf(x); }, 1.0)
                     .value;
            v += quad::integrate_tail(
                     [&pdf](double x) { return std::log(x) * pdf(-x); }, 1.0)
                     .value;
          } else if (const auto* e = std::get_if<ExponentialLaw>(&j.law)) {
            const double c = e->rate;
            v += quad::integrate_tail(
                     [c](double x) { return std::log(x) * c * std::exp(-c * x); },
                     1.0)
                     .value;
          } else {
            const auto& tp = std::get<TwoPointLaw>(j.law);
            if (std::fabs(tp.x1) > 1.0) v += tp.p * std::log(std::fabs(tp.x1));
            if (std::fabs(tp.x2) > 1.0)
              v += (1.0 - tp.p) * std::log(std::fabs(tp.x2));
          }
          return {true, j.rate * v, "finite for compound Poisson"};
        } else if constexpr (std::is_same_v<T, GammaSubordinator>) {
          auto r = quad::integrate_tail(
              [&j](double x) {
                return std::log(x) * j.shape * std::exp(-j.rate * x) / x;
              },
              1.0);
          return {true, r.value, "exponential tail"};
        } else if constexpr (std::is_same_v<T, DiscreteJumps>) {
          double v = 0.0;
          for (const auto& [x, mass] : j.atoms)
            if (std::fabs(x) > 1.0) v += mass * std::log(std::fabs(x));
          return {true, v, "finite atom set"};
        } else {
          auto g = [&j](double x) {
            return std::log(std::fabs(x)) * j.density(x);
          };
          auto rt = piecewise_levy(g, std::max(j.lo, 1.0), j.hi);
          auto lt = piecewise_levy(g, j.lo, std::min(j.hi, -1.0));
          if (rt.diverged || lt.diverged)
            return {false, kInf, "divergent: shell partial sums fail decay test"};
          std::ostringstream os;
          if (!rt.converged || !lt.converged)
            os << "slowly convergent; achieved +-" << rt.error + lt.error;
          return {true, rt.value + lt.value, os.str()};
        }
      },
      jump);
}

bool p_moment_check(const JumpSpec& jump, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("moment order p must be > 0");
  return std::visit(
      [p](const auto& j) -> bool {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, DensityJumps>) {
          auto g = [&j, p](double x) {
            return std::pow(std::fabs(x), p) * j.density(x);
          };
          auto rt = piecewise_levy(g, std::max(j.lo, 1.0), j.hi);
          auto lt = piecewise_levy(g, j.lo, std::min(j.hi, -1.0));
          return !rt.diverged && !lt.diverged &&
                 std::isfinite(rt.value + lt.value);
        } else {
          // Exponential or compactly supported tails: all moments finite.
          (void)j;
          return true;
        }
      },
      jump);
}

double sample_increment(const LevyTriplet& triplet, double dt, RngStream& rng) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("increment length dt must be > 0");
  if (is_density_form(triplet.jump))
    throw std::invalid_argument("density jump measures are not sampleable");
  double x = (triplet.gamma - small_jump_mean(triplet.jump)) * dt;
  if (triplet.sigma2 > 0.0)
    x += std::sqrt(triplet.sigma2 * dt) * rng.normal();
  std::visit(
      [&x, dt, &rng](const auto& j) {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, CompoundPoisson>) {
          const long n = rng.poisson(j.rate * dt);
          for (long k = 0; k < n; ++k) x += sample_jump(j.law, rng);
        } else if constexpr (std::is_same_v<T, GammaSubordinator>) {
          x += rng.gamma(j.shape * dt, 1.0 / j.rate);
        } else if constexpr (std::is_same_v<T, DiscreteJumps>) {
          for (const auto& [xj, mass] : j.atoms)
            x += double(rng.poisson(mass * dt)) * xj;
        }
      },
      triplet.jump);
  return x;
}

JumpSpec scale_mass(const JumpSpec& jump, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw std::invalid_argument("mass factor must be > 0");
  return std::visit(
      [factor](const auto& j) -> JumpSpec {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, NoJumps>) {
          return NoJumps{};
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return CompoundPoisson{j.rate * factor, j.law};
        } else if constexpr (std::is_same_v<T, GammaSubordinator>) {
          return GammaSubordinator{j.shape * factor, j.rate};
        } else if constexpr (std::is_same_v<T, DiscreteJumps>) {
          DiscreteJumps out = j;
          for (auto& [x, mass] : out.atoms) mass *= factor;
          return out;
        } else {
          DensityJumps out = j;
          out.density = [f = j.density, factor](double x) {
            return factor * f(x);
          };
          return out;
        }
      },
      jump);
}

}  // namespace supcar
