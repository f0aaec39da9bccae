#include "ascert/types.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace ascert {

HalfPlane normalized(const HalfPlane& hp) {
  double nc = hp.c.norm();
  if (nc <= 1e-12) return hp;
  return HalfPlane{hp.c / nc, hp.d / nc, hp.strict};
}

bool region_contains(const Region& r, const Vec& theta) {
  for (const auto& hp : r.linear) {
    double v = hp.c.dot(theta) - hp.d;
    if (hp.strict ? (v >= 0.0) : (v > 1e-12)) return false;
  }
  for (const auto& q : r.quadratic) {
    double v = theta.dot(q.Q * theta) + q.R.dot(theta) + q.S;
    if (q.strict ? (v >= 0.0) : (v > 1e-12)) return false;
  }
  return true;
}

bool WorkingSet::contains(int j) const {
  return std::find(idx.begin(), idx.end(), j) != idx.end();
}

void WorkingSet::append(int j) { idx.push_back(j); }

void WorkingSet::remove_index(int j) {
  idx.erase(std::remove(idx.begin(), idx.end(), j), idx.end());
}

std::vector<int> WorkingSet::complement(int m) const {
  std::vector<int> out;
  out.reserve(m - size());
  for (int i = 0; i < m; ++i)
    if (!contains(i)) out.push_back(i);
  return out;
}

std::vector<std::string> validate(MpQP& mp) {
  std::vector<std::string> diags;
  const int n = mp.n(), m = mp.m(), p = mp.p();
  if (mp.H.cols() != n) diags.push_back("H not square");
  if (mp.f.size() != n) diags.push_back("f has wrong length");
  if (mp.f_theta.rows() != n || mp.f_theta.cols() != p)
    diags.push_back("f_theta has wrong shape");
  if (mp.A.cols() != n) diags.push_back("A column count differs from n");
  if (mp.b.size() != m) diags.push_back("b has wrong length");
  if (mp.W.rows() != m) diags.push_back("W row count differs from m");
  for (const auto& hp : mp.theta0.linear)
    if (hp.c.size() != p) diags.push_back("theta0 half-plane has wrong dimension");
  if (!mp.theta0.quadratic.empty())
    diags.push_back("theta0 must be linear-only");
  if (!diags.empty()) return diags;

  Mat Hs = 0.5 * (mp.H + mp.H.transpose());
  if ((mp.H - Hs).cwiseAbs().maxCoeff() > 1e-6)
    diags.push_back("H strongly asymmetric");
  mp.H = Hs;

  Eigen::SelfAdjointEigenSolver<Mat> es(mp.H);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  if (lo < -1e-8) diags.push_back("H not PSD");
  if (hi <= 1e-12)
    mp.convexity_class = Convexity::lp;
  else if (lo >= 1e-8)
    mp.convexity_class = Convexity::strictly_convex;
  else
    mp.convexity_class = Convexity::semi_definite;
  return diags;
}

int Partition::nmax() const {
  int k = 0;
  for (const auto& r : regions) k = std::max(k, r.k);
  return k;
}

}  // namespace ascert
