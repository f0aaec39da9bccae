#pragma once

#include <Eigen/Cholesky>

#include "ascert/types.hpp"

namespace ascert {

// Null-space factorization of the KKT system for a working set.
// Z: orthonormal basis of null(A_k); Y satisfies A_k Y = I.
// When the reduced Hessian Z'HZ is nonsingular, T = Y - Z (Z'HZ)^-1 Z' H Y
// is cached so the singular step direction of a child working set can be
// formed without refactorizing.
struct KktFactors {
  Mat Z;
  Mat Y;
  Mat reducedH;            // Z'HZ
  Eigen::LLT<Mat> llt;     // factorization of reducedH (valid iff !singular)
  Mat T;                   // n x r, valid iff !singular
  bool singular = false;
  int n = 0;
  int r = 0;
};

// Parametric solution maps of the equality-constrained subproblem:
// x*(theta) = Fstar theta + Gstar, lambda(theta) = Flam theta + Glam,
// dual rows ordered like ws.idx.
struct EqpSolution {
  Mat Fstar;
  Vec Gstar;
  Mat Flam;
  Vec Glam;
};

// Ak holds the working-set rows in working-set order. Throws on rank-deficient Ak.
KktFactors factorize(const Mat& H, const Mat& Ak, double eps_sing = 1e-9);

// Applies H* = Z (Z'HZ)^-1 Z' without forming it densely. Requires !singular.
Vec hstar_apply(const KktFactors& kf, const Vec& v);
Mat hstar_apply(const KktFactors& kf, const Mat& V);

EqpSolution parametric_eqp(const MpQP& mp, const WorkingSet& ws, const KktFactors& kf);

// Direction spanning the reduced-Hessian null space that appears after removing
// the constraint at removed_pos from the (nonsingular) parent working set:
// p = T_parent e_pos, with Hp + A_k' lam = 0 and A_k p = 0.
Vec singular_direction(const KktFactors& parent, int removed_pos);

}  // namespace ascert
