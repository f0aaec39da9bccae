#include "ascert/frontends.hpp"

#include <cmath>
#include <stdexcept>

namespace ascert {

long long flop_model(int ws_size, int n, FlopMethod method) {
  const double w = ws_size;
  const double nn = n;
  double cost = 0.0;
  switch (method) {
    case FlopMethod::nullspace: {
      double q = nn - w;
      cost = q * q * q / 3.0 + 2.0 * q * q + 2.0 * nn * q;
      break;
    }
    case FlopMethod::rangespace:
      cost = w * w * w / 3.0 + 2.0 * w * w + 2.0 * nn * w;
      break;
    case FlopMethod::fullspace: {
      double s = nn + w;
      cost = s * s * s / 3.0 + 2.0 * s * s;
      break;
    }
  }
  return static_cast<long long>(std::llround(cost));
}

DualProblem build_dual(const MpQP& mp) {
  if (mp.convexity_class != Convexity::strictly_convex)
    throw std::invalid_argument("dual requires a strictly convex Hessian");
  const int m = mp.m(), pdim = mp.p();
  DualProblem d;
  Mat Hinv = mp.H.llt().solve(Mat::Identity(mp.n(), mp.n()));
  d.qp.H = mp.A * Hinv * mp.A.transpose();
  d.qp.H = (0.5 * (d.qp.H + d.qp.H.transpose())).eval();
  d.qp.f = mp.A * Hinv * mp.f + mp.b;
  d.qp.f_theta = mp.A * Hinv * mp.f_theta + mp.W;
  d.qp.A = -Mat::Identity(m, m);
  d.qp.b = Vec::Zero(m);
  d.qp.W = Mat::Zero(m, pdim);
  d.qp.theta0 = mp.theta0;
  validate(d.qp);
  d.recovery = DualRecovery{Hinv, mp.A, mp.f, mp.f_theta};
  return d;
}

Vec recover_primal(const DualRecovery& rec, const Vec& theta, const Vec& lam) {
  return -rec.Hinv *
         (rec.f + rec.f_theta * theta + rec.A.transpose() * lam);
}

MpQP penalty_reform(const MpQP& mp, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
  const int n = mp.n(), m = mp.m(), pdim = mp.p();
  MpQP out;
  out.H = Mat::Zero(n + m, n + m);
  out.H.topLeftCorner(n, n) = mp.H + rho * mp.A.transpose() * mp.A;
  out.H.topRightCorner(n, m) = rho * mp.A.transpose();
  out.H.bottomLeftCorner(m, n) = rho * mp.A;
  out.H.bottomRightCorner(m, m) = rho * Mat::Identity(m, m);
  out.f = Vec(n + m);
  out.f.head(n) = mp.f - rho * mp.A.transpose() * mp.b;
  out.f.tail(m) = -rho * mp.b;
  out.f_theta = Mat(n + m, pdim);
  out.f_theta.topRows(n) = mp.f_theta - rho * mp.A.transpose() * mp.W;
  out.f_theta.bottomRows(m) = -rho * mp.W;
  out.A = Mat::Zero(m, n + m);
  out.A.rightCols(m) = -Mat::Identity(m, m);
  out.b = Vec::Zero(m);
  out.W = Mat::Zero(m, pdim);
  out.theta0 = mp.theta0;
  validate(out);
  return out;
}

MpQP lp_frontend(const Vec& c, const Mat& c_theta, const Mat& A, const Vec& b,
                 const Mat& W, const Region& theta0) {
  MpQP mp;
  const int n = static_cast<int>(c.size());
  mp.H = Mat::Zero(n, n);
  mp.f = c;
  mp.f_theta = c_theta;
  mp.A = A;
  mp.b = b;
  mp.W = W;
  mp.theta0 = theta0;
  mp.convexity_class = Convexity::lp;
  return mp;
}

MpQP mpc_double_integrator(int horizon, double q, double r, double umax) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const int N = horizon;
  Mat Ad(2, 2), Bd(2, 1);
  Ad << 1.0, 1.0, 0.0, 1.0;
  Bd << 0.5, 1.0;

  // Stacked prediction x_k = Phi_k theta + (Gamma u)_k, k = 1..N.
  Mat Phi = Mat::Zero(2 * N, 2);
  Mat Gamma = Mat::Zero(2 * N, N);
  Mat Apow = Ad;
  for (int k = 0; k < N; ++k) {
    Phi.block(2 * k, 0, 2, 2) = Apow;
    Apow = Ad * Apow;
  }
  for (int k = 0; k < N; ++k) {
    Mat col = Bd;
    for (int row = k; row < N; ++row) {
      Gamma.block(2 * row, k, 2, 1) = col;
      col = Ad * col;
    }
  }

  MpQP mp;
  mp.H = Gamma.transpose() * (q * Gamma) + r * Mat::Identity(N, N);
  mp.H = (0.5 * (mp.H + mp.H.transpose())).eval();
  mp.f = Vec::Zero(N);
  mp.f_theta = Gamma.transpose() * (q * Phi);
  mp.A = Mat::Zero(2 * N, N);
  mp.A.topRows(N) = Mat::Identity(N, N);
  mp.A.bottomRows(N) = -Mat::Identity(N, N);
  mp.b = Vec::Constant(2 * N, umax);
  mp.W = Mat::Zero(2 * N, 2);
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e(i) = 1.0;
    mp.theta0.linear.push_back(HalfPlane{e, 2.0, false});
    mp.theta0.linear.push_back(HalfPlane{-e, 2.0, false});
  }
  validate(mp);
  return mp;
}

}  // namespace ascert
