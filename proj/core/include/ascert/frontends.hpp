#pragma once

#include "ascert/types.hpp"

namespace ascert {

enum class FlopMethod { nullspace, rangespace, fullspace };

// Dense per-iteration cost of forming the search direction with |ws| = w
// active constraints: cubic factorization term plus quadratic solve terms.
long long flop_model(int ws_size, int n, FlopMethod method);

struct DualRecovery {
  Mat Hinv;
  Mat A;
  Vec f;
  Mat f_theta;
};

struct DualProblem {
  MpQP qp;
  DualRecovery recovery;
};

// Dual of a strictly convex mpQP in the multipliers lambda >= 0:
// H_d = A H^-1 A', f_d = A H^-1 f + b, f_dtheta = A H^-1 f_theta + W,
// constraints -lambda <= 0 (parameter-free, so the partition is polyhedral).
DualProblem build_dual(const MpQP& mp);

// x* = -H^-1 (f + f_theta theta + A' lambda*).
Vec recover_primal(const DualRecovery& rec, const Vec& theta, const Vec& lam);

// Quadratic-penalty reformulation in (x, s): moves Ax <= b + W theta into the
// objective as (rho/2)||Ax + s - b - W theta||^2 with s >= 0 the only
// constraints, which are parameter-free.
MpQP penalty_reform(const MpQP& mp, double rho = 1e4);

// mpLP as an mpQP with H = 0.
MpQP lp_frontend(const Vec& c, const Mat& c_theta, const Mat& A, const Vec& b,
                 const Mat& W, const Region& theta0);

// Condensed input-constrained MPC demo for the double integrator; theta is the
// initial state (p = 2), input bounds |u_k| <= umax give W = 0.
MpQP mpc_double_integrator(int horizon, double q, double r, double umax);

}  // namespace ascert
