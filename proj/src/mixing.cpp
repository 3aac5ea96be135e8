#include "supcar/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <type_traits>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace supcar {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.57079632679489661923;

struct Support {
  double lo, hi;
  bool atomic;
};

Support support_of(const Measure1D& m) {
  return std::visit(
      [](const auto& v) -> Support {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiracM>) {
          return {v.x, v.x, true};
        } else if constexpr (std::is_same_v<T, GammaM>) {
          return {0.0, kInf, false};
        } else if constexpr (std::is_same_v<T, BetaM>) {
          return {0.0, 1.0, false};
        } else if constexpr (std::is_same_v<T, UniformM>) {
          return {v.lo, v.hi, false};
        } else if constexpr (std::is_same_v<T, DiscreteM>) {
          double lo = kInf, hi = -kInf;
          for (const auto& [x, mass] : v.atoms) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
          }
          return {lo, hi, true};
        } else if constexpr (std::is_same_v<T, Sin2M>) {
          return {kHalfPi, kPi, false};
        } else {
          return {v.lo, v.hi, false};
        }
      },
      m);
}

}  // namespace

double pdf_of(const Measure1D& m, double x) {
  return std::visit(
      [x](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GammaM>) {
          if (x <= 0.0) return 0.0;
          return std::exp(v.shape * std::log(v.rate) +
                          (v.shape - 1.0) * std::log(x) - v.rate * x -
                          std::lgamma(v.shape));
        } else if constexpr (std::is_same_v<T, BetaM>) {
          if (x <= 0.0 || x >= 1.0) return 0.0;
          const double lb =
              std::lgamma(v.b0) + std::lgamma(v.b1) - std::lgamma(v.b0 + v.b1);
          return std::exp((v.b0 - 1.0) * std::log(x) +
                          (v.b1 - 1.0) * std::log1p(-x) - lb);
        } else if constexpr (std::is_same_v<T, UniformM>) {
          return (x >= v.lo && x <= v.hi) ? 1.0 / (v.hi - v.lo) : 0.0;
        } else if constexpr (std::is_same_v<T, Sin2M>) {
          return (x > kHalfPi && x < kPi) ? -std::sin(2.0 * x) : 0.0;
        } else if constexpr (std::is_same_v<T, DensityM>) {
          return (x > v.lo && x < v.hi) ? v.pdf(x) : 0.0;
        } else {
          (void)v;
          return 0.0;  // atomic kinds have no density
        }
      },
      m);
}

namespace {

// E[f ; clip_lo < x < clip_hi].  Atoms are summed (strict clip), continuous
// laws go through quadrature with singular shells at the finite support
// endpoints and geometric tail panels toward +inf.
template <class F>
auto expect_impl(const Measure1D& m, F f, double clip_lo, double clip_hi,
                 const quad::Options& opt = {}) {
  using V = std::invoke_result_t<F&, double>;
  quad::BasicResult<V> out;
  out.converged = true;
  out.error = 0.0;  // accumulator; the default is the "no estimate" sentinel
  if (const auto* d = std::get_if<DiracM>(&m)) {
    if (d->x > clip_lo && d->x < clip_hi) out.value = f(d->x);
    return out;
  }
  if (const auto* ds = std::get_if<DiscreteM>(&m)) {
    for (const auto& [x, mass] : ds->atoms)
      if (x > clip_lo && x < clip_hi) out.value = out.value + mass * f(x);
    return out;
  }
  auto sup = support_of(m);
  const double lo = std::max(sup.lo, clip_lo);
  const double hi = std::min(sup.hi, clip_hi);
  if (!(lo < hi)) return out;
  auto g = [&m, &f](double x) { return f(x) * pdf_of(m, x); };
  auto add = [&out](const auto& r) {
    out.value = out.value + r.value;
    out.error += r.error;
    out.evals += r.evals;
    out.converged = out.converged && r.converged;
    out.diverged = out.diverged || r.diverged;
  };
  if (hi == kInf) {
    const double w = lo + std::max(1.0, std::fabs(lo));
    add(quad::integrate_singular(g, lo, w, opt));
    add(quad::integrate_tail(g, w, opt));
  } else {
    const double mid = 0.5 * (lo + hi);
    add(quad::integrate_singular(g, lo, mid, opt));
    add(quad::integrate_singular(g, hi, mid, opt));
  }
  if (out.diverged) out.converged = false;
  return out;
}

double moment_closed_uniform(const UniformM& u, double p) {
  if (p == -1.0)
    return u.lo > 0.0 ? std::log(u.hi / u.lo) / (u.hi - u.lo) : kInf;
  const double num = std::pow(u.hi, p + 1.0) - std::pow(u.lo, p + 1.0);
  const double v = num / ((p + 1.0) * (u.hi - u.lo));
  return std::isfinite(v) ? v : kInf;
}

std::string join_diagnostics(const ConditionReport& rep) {
  std::ostringstream os;
  for (const auto& e : rep.entries)
    if (!e.pass) os << e.name << " diverges; ";
  return os.str();
}

void require_support(const Measure1D& m, double dlo, double dhi,
                     const char* role) {
  validate_measure(m);
  auto sup = support_of(m);
  auto fail = [&](double x) {
    std::ostringstream os;
    os << role << " law must be supported in (" << dlo << ", " << dhi
       << "); found " << (sup.atomic ? "atom at " : "support reaching ") << x;
    throw std::invalid_argument(os.str());
  };
  if (sup.atomic) {
    // Boundary atoms change the process type, so strict inequalities.
    if (const auto* d = std::get_if<DiracM>(&m)) {
      if (!(d->x > dlo && d->x < dhi)) fail(d->x);
    } else {
      for (const auto& [x, mass] : std::get<DiscreteM>(m).atoms)
        if (!(x > dlo && x < dhi)) fail(x);
    }
  } else {
    if (sup.lo < dlo) fail(sup.lo);
    if (sup.hi > dhi) fail(sup.hi);
  }
}

void validate_joint(const std::vector<std::pair<ParamPoint, double>>& atoms,
                    double lo2, double hi2, const char* what2) {
  if (atoms.empty())
    throw std::invalid_argument("joint mixing needs at least one atom");
  double total = 0.0;
  for (const auto& [pt, mass] : atoms) {
    if (!(pt.v1 > 0.0) || !std::isfinite(pt.v1))
      throw std::invalid_argument("joint atom scale parameter must be > 0");
    if (!(pt.v2 > lo2 && pt.v2 < hi2) || !std::isfinite(pt.v2)) {
      std::ostringstream os;
      os << "joint atom " << what2 << " must lie strictly in (" << lo2 << ", "
         << hi2 << ")";
      throw std::invalid_argument(os.str());
    }
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw std::invalid_argument("joint atom masses must be > 0");
    total += mass;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("joint atom masses must sum to 1");
}

ConditionEntry make_entry(std::string name, double value) {
  const bool fin = std::isfinite(value);
  return {std::move(name), value, fin, fin};
}

ConditionEntry make_entry(std::string name, const quad::Result& r) {
  const double v = r.diverged ? kInf : r.value;
  return make_entry(std::move(name), v);
}

void finish(ConditionReport& rep) {
  rep.pass = true;
  for (const auto& e : rep.entries) rep.pass = rep.pass && e.pass;
  rep.diagnostics = join_diagnostics(rep);
}

}  // namespace

Measure1D density_measure(std::function<double(double)> pdf, double lo,
                          double hi) {
  if (!pdf) throw std::invalid_argument("mixing density callable is empty");
  if (!std::isfinite(lo))
    throw std::invalid_argument("mixing density lower endpoint must be finite");
  if (!(lo < hi))
    throw std::invalid_argument("mixing density support needs lo < hi");

  const int n = 1024;
  std::vector<double> xs(n + 1);
  if (std::isfinite(hi)) {
    for (int k = 0; k <= n; ++k) xs[k] = lo + (hi - lo) * k / n;
  } else {
    // x = lo + t/(1-t): resolves the bulk finely, reaches lo + (n-1).
    for (int k = 0; k <= n; ++k) {
      const double t = double(k) / (n + 1);
      xs[k] = lo + t / (1.0 - t);
    }
  }

  quad::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-12;
  double total = 0.0, err = 0.0;
  std::vector<double> cum(n + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    auto r = (k == 0) ? quad::integrate_singular(pdf, xs[0], xs[1], opt)
             : (k == n - 1 && std::isfinite(hi))
                 ? quad::integrate_singular(pdf, xs[n], xs[n - 1], opt)
                 : quad::integrate(pdf, xs[k], xs[k + 1], opt);
    if (r.diverged || r.value < -1e-12)
      throw std::invalid_argument(
          "mixing density must be nonnegative with finite mass");
    total += r.value;
    err += r.error;
    cum[k + 1] = total;
  }
  double tail = 0.0;
  if (!std::isfinite(hi)) {
    auto r = quad::integrate_tail(pdf, xs[n], opt);
    if (r.diverged)
      throw std::invalid_argument("mixing density tail mass diverges");
    tail = r.value;
    err += r.error;
  }
  total += tail;
  if (std::fabs(total - 1.0) > std::max(1e-12, 20.0 * err)) {
    std::ostringstream os;
    os << "mixing density must integrate to 1; got " << total;
    throw std::invalid_argument(os.str());
  }

  auto table = std::make_shared<std::vector<std::pair<double, double>>>();
  table->reserve(n + 1);
  for (int k = 0; k <= n; ++k) table->push_back({xs[k], cum[k] / total});
  return DensityM{std::move(pdf), lo, hi, std::move(table)};
}

void validate_measure(const Measure1D& m) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiracM>) {
          if (!std::isfinite(v.x))
            throw std::invalid_argument("dirac location must be finite");
        } else if constexpr (std::is_same_v<T, GammaM>) {
          if (!(v.shape > 0.0) || !(v.rate > 0.0) || !std::isfinite(v.shape) ||
              !std::isfinite(v.rate))
            throw std::invalid_argument("gamma law needs shape > 0, rate > 0");
        } else if constexpr (std::is_same_v<T, BetaM>) {
          if (!(v.b0 > 0.0) || !(v.b1 > 0.0) || !std::isfinite(v.b0) ||
              !std::isfinite(v.b1))
            throw std::invalid_argument("beta law needs b0 > 0, b1 > 0");
        } else if constexpr (std::is_same_v<T, UniformM>) {
          if (!(v.lo < v.hi) || !std::isfinite(v.lo) || !std::isfinite(v.hi))
            throw std::invalid_argument("uniform law needs finite lo < hi");
        } else if constexpr (std::is_same_v<T, DiscreteM>) {
          if (v.atoms.empty())
            throw std::invalid_argument("discrete law needs at least one atom");
          double total = 0.0;
          for (const auto& [x, mass] : v.atoms) {
            if (!std::isfinite(x))
              throw std::invalid_argument("discrete atom must be finite");
            if (!(mass > 0.0) || !std::isfinite(mass))
              throw std::invalid_argument("discrete atom masses must be > 0");
            total += mass;
          }
          if (std::fabs(total - 1.0) > 1e-12)
            throw std::invalid_argument("discrete atom masses must sum to 1");
        } else if constexpr (std::is_same_v<T, DensityM>) {
          if (!v.table)
            throw std::invalid_argument(
                "density measures must be built via density_measure()");
        }
      },
      m);
}

double m_p(const Measure1D& m, double p) {
  return std::visit(
      [p, &m](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiracM>) {
          return std::pow(v.x, p);
        } else if constexpr (std::is_same_v<T, GammaM>) {
          if (v.shape + p <= 0.0) return kInf;
          return std::exp(std::lgamma(v.shape + p) - std::lgamma(v.shape) -
                          p * std::log(v.rate));
        } else if constexpr (std::is_same_v<T, BetaM>) {
          if (v.b0 + p <= 0.0) return kInf;
          return std::exp(std::lgamma(v.b0 + p) + std::lgamma(v.b0 + v.b1) -
                          std::lgamma(v.b0) - std::lgamma(v.b0 + v.b1 + p));
        } else if constexpr (std::is_same_v<T, UniformM>) {
          return moment_closed_uniform(v, p);
        } else if constexpr (std::is_same_v<T, DiscreteM>) {
          double s = 0.0;
          for (const auto& [x, mass] : v.atoms) s += mass * std::pow(x, p);
          return s;
        } else {
          auto r = expect_impl(m, [p](double x) { return std::pow(x, p); },
                               -kInf, kInf);
          return r.diverged ? kInf : r.value;
        }
      },
      m);
}

double m_p_quadrature(const Measure1D& m, double p) {
  auto sup = support_of(m);
  if (sup.atomic) return m_p(m, p);
  auto r = expect_impl(m, [p](double x) { return std::pow(x, p); }, -kInf,
                       kInf);
  return r.diverged ? kInf : r.value;
}

double quantile(const Measure1D& m, double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("quantile level must lie in (0,1)");
  return std::visit(
      [u](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiracM>) {
          return v.x;
        } else if constexpr (std::is_same_v<T, GammaM>) {
          return boost::math::gamma_p_inv(v.shape, u) / v.rate;
        } else if constexpr (std::is_same_v<T, BetaM>) {
          return boost::math::ibeta_inv(v.b0, v.b1, u);
        } else if constexpr (std::is_same_v<T, UniformM>) {
          return v.lo + u * (v.hi - v.lo);
        } else if constexpr (std::is_same_v<T, DiscreteM>) {
          auto atoms = v.atoms;
          std::sort(atoms.begin(), atoms.end());
          double cum = 0.0;
          for (const auto& [x, mass] : atoms) {
            cum += mass;
            if (u <= cum) return x;
          }
          return atoms.back().first;
        } else if constexpr (std::is_same_v<T, Sin2M>) {
          // cdf cos^2(psi) on (pi/2, pi).
          return kPi - 0.5 * std::acos(2.0 * u - 1.0);
        } else {
          const auto& tab = *v.table;
          auto it = std::lower_bound(
              tab.begin(), tab.end(), u,
              [](const std::pair<double, double>& node, double lvl) {
                return node.second < lvl;
              });
          if (it == tab.begin()) return tab.front().first;
          if (it == tab.end()) return tab.back().first;
          auto prev = it - 1;
          const double df = it->second - prev->second;
          if (df <= 0.0) return it->first;
          const double w = (u - prev->second) / df;
          return prev->first + w * (it->first - prev->first);
        }
      },
      m);
}

quad::Result expect(const Measure1D& m, const std::function<double(double)>& f,
                    const quad::Options& opt) {
  return expect_impl(m, [&f](double x) { return f(x); }, -kInf, kInf, opt);
}

quad::CResult expect_c(const Measure1D& m,
                       const std::function<std::complex<double>(double)>& f,
                       const quad::Options& opt) {
  return expect_impl(m, [&f](double x) { return f(x); }, -kInf, kInf, opt);
}

quad::Result expect_on(const Measure1D& m,
                       const std::function<double(double)>& f, double a,
                       double b) {
  return expect_impl(m, [&f](double x) { return f(x); }, a, b);
}

double sample_measure(const Measure1D& m, RngStream& rng) {
  return std::visit(
      [&rng, &m](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiracM>) {
          return v.x;
        } else if constexpr (std::is_same_v<T, GammaM>) {
          return rng.gamma(v.shape, 1.0 / v.rate);
        } else if constexpr (std::is_same_v<T, BetaM>) {
          const double g0 = rng.gamma(v.b0, 1.0);
          const double g1 = rng.gamma(v.b1, 1.0);
          return g0 / (g0 + g1);
        } else if constexpr (std::is_same_v<T, UniformM>) {
          return v.lo + rng.uniform01() * (v.hi - v.lo);
        } else if constexpr (std::is_same_v<T, DiscreteM>) {
          const double u = rng.uniform01();
          double cum = 0.0;
          for (const auto& [x, mass] : v.atoms) {
            cum += mass;
            if (u <= cum) return x;
          }
          return v.atoms.back().first;
        } else {
          return quantile(m, rng.uniform01());
        }
      },
      m);
}

MixingSpec MixingSpec::type1(Measure1D rho) {
  require_support(rho, 0.0, kInf, "type I scale");
  MixingSpec s;
  s.tag = TypeTag::I;
  s.law1 = std::move(rho);
  return s;
}

MixingSpec MixingSpec::type2(Measure1D lambda_law, Measure1D theta_law) {
  require_support(lambda_law, 0.0, kInf, "lambda");
  require_support(theta_law, 0.0, 1.0, "theta");
  MixingSpec s;
  s.tag = TypeTag::II;
  s.law1 = std::move(lambda_law);
  s.law2 = std::move(theta_law);
  return s;
}

MixingSpec MixingSpec::type2_joint(
    std::vector<std::pair<ParamPoint, double>> atoms) {
  validate_joint(atoms, 0.0, 1.0, "theta");
  MixingSpec s;
  s.tag = TypeTag::II;
  s.joint = true;
  s.joint_atoms = std::move(atoms);
  return s;
}

MixingSpec MixingSpec::type3(Measure1D r_law, Measure1D psi_law) {
  require_support(r_law, 0.0, kInf, "r");
  require_support(psi_law, kHalfPi, kPi, "psi");
  MixingSpec s;
  s.tag = TypeTag::III;
  s.law1 = std::move(r_law);
  s.law2 = std::move(psi_law);
  return s;
}

MixingSpec MixingSpec::type3_joint(
    std::vector<std::pair<ParamPoint, double>> atoms) {
  validate_joint(atoms, kHalfPi, kPi, "psi");
  MixingSpec s;
  s.tag = TypeTag::III;
  s.joint = true;
  s.joint_atoms = std::move(atoms);
  return s;
}

ConditionReport check_type1(const Measure1D& rho) {
  ConditionReport rep;
  rep.entries.push_back(make_entry("int a^-3 rho(da)", m_p(rho, -3.0)));
  finish(rep);
  return rep;
}

ConditionReport check_type2(const MixingSpec& mix) {
  if (mix.tag != TypeTag::II)
    throw std::invalid_argument("check_type2 needs a type II mixing spec");
  ConditionReport rep;
  if (mix.joint) {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (const auto& [pt, mass] : mix.joint_atoms) {
      const double l = pt.v1, th = pt.v2;
      s1 += mass / (l * l * l * th);
      s2 += mass * std::fabs(std::log1p(-th)) / l;
      s3 += mass / th;
    }
    rep.entries.push_back(
        make_entry("int lambda^-3 theta^-1 pi(dlambda,dtheta)", s1));
    rep.entries.push_back(
        make_entry("int |log(1-theta)| lambda^-1 pi(dlambda,dtheta)", s2));
    rep.entries.push_back(make_entry("int theta^-1 pi_theta(dtheta)", s3));
  } else {
    rep.entries.push_back(
        make_entry("int lambda^-3 pi_lambda(dlambda)", m_p(mix.law1, -3.0)));
    rep.entries.push_back(
        make_entry("int theta^-1 pi_theta(dtheta)", m_p(mix.law2, -1.0)));
    rep.entries.push_back(make_entry(
        "int_(1/2,1) |log(1-theta)| pi_theta(dtheta)",
        expect_on(
            mix.law2, [](double th) { return -std::log1p(-th); }, 0.5, 1.0)));
  }
  finish(rep);
  return rep;
}

ConditionReport check_type3(const MixingSpec& mix) {
  if (mix.tag != TypeTag::III)
    throw std::invalid_argument("check_type3 needs a type III mixing spec");
  ConditionReport rep;
  if (mix.joint) {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (const auto& [pt, mass] : mix.joint_atoms) {
      const double r = pt.v1, psi = pt.v2;
      s1 += mass / (r * r * r * std::fabs(std::cos(psi)));
      s2 += mass * std::log(std::sin(psi)) / (r * std::cos(psi));
      s3 += mass / std::fabs(std::cos(psi));
    }
    rep.entries.push_back(
        make_entry("int r^-3 |cos psi|^-1 pi(dr,dpsi)", s1));
    rep.entries.push_back(
        make_entry("int log(sin psi) (r cos psi)^-1 pi(dr,dpsi)", s2));
    rep.entries.push_back(make_entry("int |cos psi|^-1 pi_psi(dpsi)", s3));
  } else {
    rep.entries.push_back(
        make_entry("int r^-3 pi_r(dr)", m_p(mix.law1, -3.0)));
    rep.entries.push_back(make_entry(
        "int |cos psi|^-1 pi_psi(dpsi)",
        expect(mix.law2,
               [](double psi) { return 1.0 / std::fabs(std::cos(psi)); })));
    rep.entries.push_back(make_entry(
        "int log(sin psi)/cos psi pi_psi(dpsi)",
        expect(mix.law2, [](double psi) {
          return std::log(std::sin(psi)) / std::cos(psi);
        })));
  }
  finish(rep);
  return rep;
}

ConditionReport check_mixing(const MixingSpec& mix) {
  switch (mix.tag) {
    case TypeTag::I: return check_type1(mix.law1);
    case TypeTag::II: return check_type2(mix);
    default: return check_type3(mix);
  }
}

bool moment_condition(const MixingSpec& mix, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("moment order p must be > 0");
  switch (mix.tag) {
    case TypeTag::I:
      if (p <= 2.0) return true;
      return std::isfinite(m_p(mix.law1, -(p + 1.0)));
    case TypeTag::II: {
      if (mix.joint) {
        double s = 0.0;
        for (const auto& [pt, mass] : mix.joint_atoms)
          s += mass * std::pow(pt.v1, -(p + 1.0)) / pt.v2;
        return std::isfinite(s);
      }
      return std::isfinite(m_p(mix.law1, -(p + 1.0))) &&
             std::isfinite(m_p(mix.law2, -1.0));
    }
    default: {
      if (mix.joint) {
        double s = 0.0;
        for (const auto& [pt, mass] : mix.joint_atoms)
          s += mass * std::pow(pt.v1, -(p + 1.0)) /
               std::fabs(std::cos(pt.v2));
        return std::isfinite(s);
      }
      auto cosr = expect(mix.law2, [](double psi) {
        return 1.0 / std::fabs(std::cos(psi));
      });
      return std::isfinite(m_p(mix.law1, -(p + 1.0))) && !cosr.diverged;
    }
  }
}

ParamPoint sample_params(const MixingSpec& mix, RngStream& rng) {
  if (mix.joint) {
    const double u = rng.uniform01();
    double cum = 0.0;
    for (const auto& [pt, mass] : mix.joint_atoms) {
      cum += mass;
      if (u <= cum) return pt;
    }
    return mix.joint_atoms.back().first;
  }
  ParamPoint p;
  p.v1 = sample_measure(mix.law1, rng);
  if (mix.tag != TypeTag::I) p.v2 = sample_measure(mix.law2, rng);
  return p;
}

}  // namespace supcar
