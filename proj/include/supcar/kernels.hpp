#pragma once
// CAR(2) kernel functions and the discriminant classification.  With
// A = [[0,1],[-a2,-a1]], b = (1,0), e = (0,1), the moving-average kernel
// b' e^{Au} e takes one of three closed forms depending on the sign of
// d = a1^2 - 4 a2 (double real root / distinct real roots / complex pair):
//
//   g1(a, u)          = u e^{-a u / 2}
//   g2(lambda, theta, u) = (e^{-lambda theta u} - e^{-lambda u}) /
//                          (lambda (1 - theta))
//   g3(r, psi, u)     = e^{r u cos psi} sin(r u sin psi) / (r sin psi)
//
// all zero for u < 0.  The general matrix-exponential kernel doubles as an
// independent oracle for the closed forms.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "supcar/common.hpp"

namespace supcar {

struct Car2Params {
  double a1 = 1.0;
  double a2 = 1.0;

  // a1 > 0 and a2 > 0, i.e. both eigenvalues have negative real part.
  static Car2Params make(double a1, double a2);
};

// Classification result with the canonical kernel parameters attached:
// I -> (a, unused), II -> (lambda, theta), III -> (r, psi).
struct KernelType {
  TypeTag tag = TypeTag::I;
  double p1 = 0.0;
  double p2 = 0.0;
};

// Classifies by d = a1^2 - 4 a2 with |d| <= tol * max(a1^2, 1) collapsing
// to the double-root type.  Near the boundary the branch kernels agree to
// about sqrt(tol), so the tie-break is numerically harmless.
KernelType classify(const Car2Params& p, double tol = 1e-9);

// Eigenvalues (-lambda, -lambda theta) -> a1 = lambda (1 + theta),
// a2 = lambda^2 theta; strict 0 < theta < 1.
Car2Params from_type2(double lambda, double theta);

// Eigenvalues r e^{+-i psi} -> a1 = -2 r cos(psi), a2 = r^2; strict
// psi in (pi/2, pi).
Car2Params from_type3(double r, double psi);

double g1(double a, double u);
// Evaluated as e^{-lambda theta u} (1 - e^{-lambda(1-theta)u}) /
// (lambda(1-theta)): no cancellation when lambda(1-theta)u is tiny.
double g2(double lambda, double theta, double u);
double g3(double r, double psi, double u);

// Closed-form kernel for a classification result.
double kernel_value(const KernelType& k, double u);

// Companion matrix [[0,1],[-a2,-a1]].
Eigen::Matrix2d companion(const Car2Params& p);

// b' e^{Au} e_p for a general p x p matrix (scaling-and-squaring matrix
// exponential); the CAR(2) closed forms are special cases.
double carma_kernel(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    double u);

// Sufficient-existence bound for a discrete matrix mixture: computes
// sum_k mass_k cond_2(P_k) / (-max Re sigma(A_k) - 1) with A_k = P_k D P_k^{-1}
// (unit-norm eigenvector columns).  Atoms with max Re sigma >= -1 or a
// numerically defective eigenbasis are flagged "bound inapplicable".
ConditionReport spectral_bound_check(
    const std::vector<std::pair<Eigen::MatrixXd, double>>& atoms);

}  // namespace supcar
