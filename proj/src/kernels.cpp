#include "supcar/kernels.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace supcar {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.57079632679489661923;

}  // namespace

Car2Params Car2Params::make(double a1, double a2) {
  if (!(a1 > 0.0) || !(a2 > 0.0) || !std::isfinite(a1) || !std::isfinite(a2))
    throw std::invalid_argument("not in A_2: need a1 > 0 and a2 > 0");
  return Car2Params{a1, a2};
}

KernelType classify(const Car2Params& p, double tol) {
  if (!(p.a1 > 0.0) || !(p.a2 > 0.0))
    throw std::invalid_argument("not in A_2: need a1 > 0 and a2 > 0");
  if (!(tol >= 0.0))
    throw std::invalid_argument("classification tolerance must be >= 0");
  const double d = p.a1 * p.a1 - 4.0 * p.a2;
  const double thr = tol * std::max(p.a1 * p.a1, 1.0);
  if (std::fabs(d) <= thr) return {TypeTag::I, p.a1, 0.0};
  if (d > 0.0) {
    // Roots (-a1 -+ sqrt(d))/2 = (-lambda, -lambda theta).
    const double s = std::sqrt(d);
    const double lambda = 0.5 * (p.a1 + s);
    const double theta = (p.a1 - s) / (p.a1 + s);
    return {TypeTag::II, lambda, theta};
  }
  const double r = std::sqrt(p.a2);
  const double psi = std::atan2(std::sqrt(-d), -p.a1);
  return {TypeTag::III, r, psi};
}

Car2Params from_type2(double lambda, double theta) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be > 0");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("theta must lie strictly in (0,1)");
  return Car2Params{lambda * (1.0 + theta), lambda * lambda * theta};
}

Car2Params from_type3(double r, double psi) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("r must be > 0");
  if (!(psi > kHalfPi && psi < kPi))
    throw std::invalid_argument("psi must lie strictly in (pi/2, pi)");
  return Car2Params{-2.0 * r * std::cos(psi), r * r};
}

double g1(double a, double u) {
  if (u < 0.0) return 0.0;
  return u * std::exp(-0.5 * a * u);
}

double g2(double lambda, double theta, double u) {
  if (u < 0.0) return 0.0;
  const double w = lambda * (1.0 - theta);
  return std::exp(-lambda * theta * u) * (-std::expm1(-w * u)) / w;
}

double g3(double r, double psi, double u) {
  if (u < 0.0) return 0.0;
  const double s = std::sin(psi);
  return std::exp(r * u * std::cos(psi)) * std::sin(r * u * s) / (r * s);
}

double kernel_value(const KernelType& k, double u) {
  switch (k.tag) {
    case TypeTag::I: return g1(k.p1, u);
    case TypeTag::II: return g2(k.p1, k.p2, u);
    default: return g3(k.p1, k.p2, u);
  }
}

Eigen::Matrix2d companion(const Car2Params& p) {
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -p.a2, -p.a1;
  return a;
}

double carma_kernel(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    double u) {
  const Eigen::Index p = A.rows();
  if (p < 1 || A.cols() != p || b.size() != p)
    throw std::invalid_argument("carma_kernel needs square A and matching b");
  if (!A.allFinite() || !b.allFinite() || !std::isfinite(u) || u < 0.0)
    throw std::invalid_argument("carma_kernel needs finite inputs and u >= 0");
  const Eigen::MatrixXd e = (A * u).exp();
  return b.dot(e.col(p - 1));
}

ConditionReport spectral_bound_check(
    const std::vector<std::pair<Eigen::MatrixXd, double>>& atoms) {
  ConditionReport rep;
  double total = 0.0;
  bool ok = true;
  int idx = 0;
  for (const auto& [a, mass] : atoms) {
    ++idx;
    std::ostringstream name;
    name << "atom " << idx;
    if (a.rows() < 1 || a.cols() != a.rows() || !a.allFinite() ||
        !(mass > 0.0))
      throw std::invalid_argument(
          "spectral bound needs square finite matrices and positive masses");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(
        a.cast<std::complex<double>>());
    const double max_re = es.eigenvalues().real().maxCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 1e-7 * smax)) {
      // Repeated eigenvalue without a full eigenbasis: no P to measure.
      rep.entries.push_back(
          {name.str() + ": defective, bound inapplicable", max_re, true,
           false});
      ok = false;
      continue;
    }
    if (!(max_re < -1.0)) {
      rep.entries.push_back(
          {name.str() + ": max Re sigma >= -1, bound inapplicable", max_re,
           true, false});
      ok = false;
      continue;
    }
    const double cond = smax / smin;
    const double term = mass * cond / (-max_re - 1.0);
    rep.entries.push_back({name.str() + ": mass cond_2(P)/(-max Re - 1)", term,
                           std::isfinite(term), std::isfinite(term)});
    ok = ok && std::isfinite(term);
    total += term;
  }
  rep.entries.push_back(
      {"sum", total, std::isfinite(total), ok && std::isfinite(total)});
  rep.pass = ok && std::isfinite(total);
  if (!rep.pass)
    rep.diagnostics =
        "bound inapplicable for at least one atom (spectrum or eigenbasis)";
  return rep;
}

}  // namespace supcar
