#include "ascert/kkt.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <stdexcept>

namespace ascert {

KktFactors factorize(const Mat& H, const Mat& Ak, double eps_sing) {
  KktFactors kf;
  const int n = static_cast<int>(H.rows());
  const int r = static_cast<int>(Ak.rows());
  kf.n = n;
  kf.r = r;
  if (r == 0) {
    kf.Z = Mat::Identity(n, n);
    kf.Y = Mat::Zero(n, 0);
  } else {
    Eigen::HouseholderQR<Mat> qr(Ak.transpose());
    Mat Q = qr.householderQ();
    Mat R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    double dmax = R.diagonal().cwiseAbs().maxCoeff();
    for (int i = 0; i < r; ++i)
      if (std::abs(R(i, i)) <= 1e-10 * std::max(1.0, dmax))
        throw std::invalid_argument("degenerate working set");
    kf.Z = Q.rightCols(n - r);
    // Y = Q_1 R^-T, so Ak Y = R' Q_1' Q_1 R^-T = I.
    kf.Y = R.triangularView<Eigen::Upper>()
               .solve(Q.leftCols(r).transpose())
               .transpose();
  }

  kf.reducedH = kf.Z.transpose() * H * kf.Z;
  if (kf.reducedH.rows() == 0) {
    kf.singular = false;
    kf.T = kf.Y;
    return kf;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(kf.reducedH, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues()(0);
  double hi = std::abs(es.eigenvalues()(kf.reducedH.rows() - 1));
  kf.singular = lo < eps_sing * std::max(1.0, hi);
  if (!kf.singular) {
    kf.llt.compute(kf.reducedH);
    if (kf.llt.info() != Eigen::Success)
      throw std::runtime_error("reduced Hessian factorization failed");
    if (r > 0)
      kf.T = kf.Y - kf.Z * kf.llt.solve(kf.Z.transpose() * H * kf.Y);
    else
      kf.T = kf.Y;
  }
  return kf;
}

Vec hstar_apply(const KktFactors& kf, const Vec& v) {
  if (kf.singular) throw std::invalid_argument("singular reduced Hessian");
  if (kf.Z.cols() == 0) return Vec::Zero(kf.n);
  return kf.Z * kf.llt.solve(kf.Z.transpose() * v);
}

Mat hstar_apply(const KktFactors& kf, const Mat& V) {
  if (kf.singular) throw std::invalid_argument("singular reduced Hessian");
  if (kf.Z.cols() == 0) return Mat::Zero(kf.n, V.cols());
  return kf.Z * kf.llt.solve(kf.Z.transpose() * V);
}

EqpSolution parametric_eqp(const MpQP& mp, const WorkingSet& ws, const KktFactors& kf) {
  if (kf.singular)
    throw std::invalid_argument("singular reduced Hessian: use singular_direction");
  const int r = ws.size();
  const int pdim = mp.p();
  EqpSolution sol;
  sol.Fstar = -hstar_apply(kf, mp.f_theta);
  sol.Gstar = -hstar_apply(kf, Vec(mp.f));
  if (r == 0) {
    sol.Flam = Mat::Zero(0, pdim);
    sol.Glam = Vec::Zero(0);
    return sol;
  }
  Mat Wk(r, pdim);
  Vec bk(r);
  for (int q = 0; q < r; ++q) {
    Wk.row(q) = mp.W.row(ws.idx[q]);
    bk(q) = mp.b(ws.idx[q]);
  }
  sol.Fstar += kf.T * Wk;
  sol.Gstar += kf.T * bk;
  // U = (Z'HY)' (Z'HZ)^-1 (Z'HY) - Y'HY
  Mat HY = mp.H * kf.Y;
  Mat B = kf.Z.transpose() * HY;
  Mat U = -kf.Y.transpose() * HY;
  if (B.rows() > 0) U += B.transpose() * kf.llt.solve(B);
  sol.Flam = -kf.T.transpose() * mp.f_theta + U * Wk;
  sol.Glam = -kf.T.transpose() * mp.f + U * bk;
  return sol;
}

Vec singular_direction(const KktFactors& parent, int removed_pos) {
  if (parent.singular || parent.T.cols() == 0)
    throw std::invalid_argument("no parent factorization");
  if (removed_pos < 0 || removed_pos >= parent.T.cols())
    throw std::invalid_argument("removed position out of range");
  return parent.T.col(removed_pos);
}

}  // namespace ascert
