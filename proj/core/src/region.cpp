#include "ascert/region.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace ascert {

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr int kPivotCap = 50000;

// Bland's rule pivoting on a dense tableau. Rows 0..m-1 are constraints,
// row m is the reduced-cost row; the last column is the right-hand side.
// Columns in [0, enter_limit) may enter the basis.
LpStatus simplex_iterate(Mat& T, std::vector<int>& basis, int enter_limit,
                         int& pivots) {
  const int m = static_cast<int>(T.rows()) - 1;
  const int rhs = static_cast<int>(T.cols()) - 1;
  while (true) {
    if (++pivots > kPivotCap) return LpStatus::stalled;
    int enter = -1;
    for (int j = 0; j < enter_limit; ++j) {
      if (T(m, j) < -kCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return LpStatus::optimal;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > kPivTol) {
        double ratio = T(i, rhs) / T(i, enter);
        if (ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return LpStatus::unbounded;
    T.row(leave) /= T(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      double factor = T(i, enter);
      if (factor != 0.0) T.row(i) -= factor * T.row(leave);
    }
    basis[leave] = enter;
  }
}

}  // namespace

LpResult solve_lp(const Vec& c, const Mat& A, const Vec& b) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(A.rows());
  LpResult res;
  if (m == 0) {
    if (c.cwiseAbs().maxCoeff() > 0.0 && n > 0) {
      res.status = LpStatus::unbounded;
      return res;
    }
    res.status = LpStatus::optimal;
    res.x = Vec::Zero(n);
    res.value = 0.0;
    return res;
  }

  // Standard form: x = u - v with u, v >= 0, plus one slack per row; rows with
  // negative rhs are negated and get an artificial variable.
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i)
    if (b(i) < 0.0) art_rows.push_back(i);
  const int na = static_cast<int>(art_rows.size());
  const int art_start = 2 * n + m;
  const int ncols = art_start + na;
  Mat T = Mat::Zero(m + 1, ncols + 1);
  std::vector<int> basis(m, -1);
  int ak = 0;
  for (int i = 0; i < m; ++i) {
    double sgn = b(i) < 0.0 ? -1.0 : 1.0;
    T.block(i, 0, 1, n) = sgn * A.row(i);
    T.block(i, n, 1, n) = -sgn * A.row(i);
    T(i, 2 * n + i) = sgn;
    T(i, ncols) = sgn * b(i);
    if (b(i) < 0.0) {
      T(i, art_start + ak) = 1.0;
      basis[i] = art_start + ak;
      ++ak;
    } else {
      basis[i] = 2 * n + i;
    }
  }

  int pivots = 0;
  if (na > 0) {
    for (int j = 0; j < na; ++j) T(m, art_start + j) = 1.0;
    for (int i = 0; i < m; ++i)
      if (basis[i] >= art_start) T.row(m) -= T.row(i);
    LpStatus st = simplex_iterate(T, basis, ncols, pivots);
    if (st == LpStatus::stalled) {
      res.status = LpStatus::stalled;
      return res;
    }
    double infeas = -T(m, ncols);
    if (infeas > 1e-7) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (basis[i] < art_start) continue;
      int enter = -1;
      for (int j = 0; j < art_start; ++j) {
        if (std::abs(T(i, j)) > kPivTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) continue;  // redundant row; artificial stays at zero
      T.row(i) /= T(i, enter);
      for (int q = 0; q <= m; ++q) {
        if (q == i) continue;
        double factor = T(q, enter);
        if (factor != 0.0) T.row(q) -= factor * T.row(i);
      }
      basis[i] = enter;
    }
  }

  // Phase 2 cost row.
  T.row(m).setZero();
  T.block(m, 0, 1, n) = c.transpose();
  T.block(m, n, 1, n) = -c.transpose();
  for (int i = 0; i < m; ++i) {
    int bvar = basis[i];
    double cb = 0.0;
    if (bvar < n)
      cb = c(bvar);
    else if (bvar < 2 * n)
      cb = -c(bvar - n);
    if (cb != 0.0) T.row(m) -= cb * T.row(i);
  }
  LpStatus st = simplex_iterate(T, basis, art_start, pivots);
  if (st != LpStatus::optimal) {
    res.status = st;
    return res;
  }
  Vec x = Vec::Zero(n);
  for (int i = 0; i < m; ++i) {
    int bvar = basis[i];
    if (bvar < n)
      x(bvar) += T(i, ncols);
    else if (bvar < 2 * n)
      x(bvar - n) -= T(i, ncols);
  }
  res.status = LpStatus::optimal;
  res.x = x;
  res.value = c.dot(x);
  return res;
}

namespace {

// Normalized, non-tautological linear rows; sets *contradiction when a zero
// row is unsatisfiable.
std::vector<HalfPlane> clean_rows(const Region& r, bool* contradiction) {
  std::vector<HalfPlane> rows;
  *contradiction = false;
  for (const auto& hp : r.linear) {
    if (hp.c.size() > 0 && hp.c.norm() > 1e-12) {
      rows.push_back(normalized(hp));
    } else if (hp.strict ? (hp.d <= 0.0) : (hp.d < 0.0)) {
      *contradiction = true;
    }
  }
  return rows;
}

int region_dim(const Region& r) {
  for (const auto& hp : r.linear) return static_cast<int>(hp.c.size());
  for (const auto& q : r.quadratic) return static_cast<int>(q.R.size());
  return 0;
}

}  // namespace

FeasibilityVerdict polyhedron_feasible(const Region& r,
                                       const RegionOracleOptions& opts) {
  FeasibilityVerdict out;
  bool contradiction = false;
  std::vector<HalfPlane> rows = clean_rows(r, &contradiction);
  if (contradiction) {
    out.verdict = Verdict::empty;
    return out;
  }
  if (rows.empty()) {
    out.verdict = Verdict::nonempty;
    out.radius = std::numeric_limits<double>::infinity();
    return out;
  }
  const int p = static_cast<int>(rows[0].c.size());
  const int nr = static_cast<int>(rows.size());
  // Chebyshev center: max radius s.t. c_i'theta + radius <= d_i, radius <= cap.
  Mat A(nr + 1, p + 1);
  Vec b(nr + 1);
  for (int i = 0; i < nr; ++i) {
    A.block(i, 0, 1, p) = rows[i].c.transpose();
    A(i, p) = 1.0;
    b(i) = rows[i].d;
  }
  A.row(nr).setZero();
  A(nr, p) = 1.0;
  b(nr) = 1e6;
  Vec cobj = Vec::Zero(p + 1);
  cobj(p) = -1.0;
  LpResult lp = solve_lp(cobj, A, b);
  if (lp.status == LpStatus::infeasible) {
    out.verdict = Verdict::empty;
    return out;
  }
  if (lp.status != LpStatus::optimal) {
    out.verdict = Verdict::unknown;
    return out;
  }
  out.radius = lp.x(p);
  if (lp.x(p) > opts.eps_region) {
    out.verdict = Verdict::nonempty;
    out.witness = lp.x.head(p);
  } else {
    out.verdict = Verdict::empty;
  }
  return out;
}

namespace {

// Box of the linear part; unbounded coordinates are clamped around the center.
void boxed(const std::vector<HalfPlane>& rows, int p, const Vec& center,
           double clamp, Vec* lo, Vec* hi, bool* exact) {
  *exact = true;
  *lo = Vec(p);
  *hi = Vec(p);
  const int nr = static_cast<int>(rows.size());
  Mat A(nr, p);
  Vec b(nr);
  for (int i = 0; i < nr; ++i) {
    A.row(i) = rows[i].c.transpose();
    b(i) = rows[i].d;
  }
  for (int i = 0; i < p; ++i) {
    Vec e = Vec::Zero(p);
    e(i) = 1.0;
    LpResult rlo = solve_lp(e, A, b);
    LpResult rhi = solve_lp(-e, A, b);
    if (rlo.status == LpStatus::optimal)
      (*lo)(i) = rlo.x(i);
    else {
      (*lo)(i) = center(i) - clamp;
      *exact = false;
    }
    if (rhi.status == LpStatus::optimal)
      (*hi)(i) = rhi.x(i);
    else {
      (*hi)(i) = center(i) + clamp;
      *exact = false;
    }
  }
}

double quad_lower_on_box(const QuadIneq& q, const Vec& lo, const Vec& hi) {
  Vec c = 0.5 * (lo + hi);
  Vec h = 0.5 * (hi - lo);
  Vec g = 2.0 * q.Q * c + q.R;
  Eigen::SelfAdjointEigenSolver<Mat> es(q.Q, Eigen::EigenvaluesOnly);
  double lam = es.eigenvalues()(0);
  return c.dot(q.Q * c) + q.R.dot(c) + q.S - g.cwiseAbs().dot(h) +
         std::min(0.0, lam) * h.squaredNorm();
}

double lin_lower_on_box(const HalfPlane& hp, const Vec& lo, const Vec& hi) {
  double v = -hp.d;
  for (int i = 0; i < hp.c.size(); ++i)
    v += std::min(hp.c(i) * lo(i), hp.c(i) * hi(i));
  return v;
}

Verdict external_oracle_query(const Region& r, const std::string& cmd,
                              Vec* witness) {
  namespace fs = std::filesystem;
  static int counter = 0;
  const int p = region_dim(r);
  std::ostringstream name;
  name << "ascert_oracle_" << ::getpid() << "_" << counter++;
  fs::path in = fs::temp_directory_path() / (name.str() + ".in");
  fs::path outp = fs::temp_directory_path() / (name.str() + ".out");
  {
    std::ofstream os(in);
    os.precision(17);
    os << "QREGION " << p << " " << r.linear.size() << " " << r.quadratic.size()
       << "\n";
    for (const auto& hp : r.linear) {
      for (int i = 0; i < p; ++i) os << hp.c(i) << " ";
      os << hp.d << " " << (hp.strict ? 1 : 0) << "\n";
    }
    for (const auto& q : r.quadratic) {
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) os << q.Q(i, j) << " ";
        os << "\n";
      }
      for (int i = 0; i < p; ++i) os << q.R(i) << " ";
      os << "\n" << q.S << " " << (q.strict ? 1 : 0) << "\n";
    }
  }
  std::string full = cmd + " < " + in.string() + " > " + outp.string();
  int rc = std::system(full.c_str());
  Verdict v = Verdict::unknown;
  if (rc == 0) {
    std::ifstream is(outp);
    std::string tag;
    if (is >> tag) {
      if (tag == "EMPTY") v = Verdict::empty;
      else if (tag == "NONEMPTY") {
        v = Verdict::nonempty;
        Vec w(p);
        bool ok = true;
        for (int i = 0; i < p; ++i)
          if (!(is >> w(i))) ok = false;
        if (ok) *witness = w;
      }
    }
  }
  fs::remove(in);
  fs::remove(outp);
  return v;
}

}  // namespace

FeasibilityVerdict quad_region_feasible(const Region& r,
                                        const RegionOracleOptions& opts) {
  FeasibilityVerdict lin = polyhedron_feasible(
      Region{r.linear, {}}, opts);
  if (lin.verdict == Verdict::empty) return lin;
  if (r.quadratic.empty()) return lin;

  FeasibilityVerdict out;
  bool contradiction = false;
  std::vector<HalfPlane> rows = clean_rows(r, &contradiction);
  const int p = region_dim(r);
  Vec center = lin.witness ? *lin.witness : Vec::Zero(p);
  if (region_contains(r, center)) {
    out.verdict = Verdict::nonempty;
    out.witness = center;
    return out;
  }

  Vec lo, hi;
  bool exact_box = false;
  boxed(rows, p, center, 10.0, &lo, &hi, &exact_box);

  // Witness sampling: box corners plus fixed-seed pseudorandom points.
  if (p <= 4) {
    for (int mask = 0; mask < (1 << p); ++mask) {
      Vec t(p);
      for (int i = 0; i < p; ++i) t(i) = (mask >> i) & 1 ? hi(i) : lo(i);
      if (region_contains(r, t)) {
        out.verdict = Verdict::nonempty;
        out.witness = t;
        return out;
      }
    }
  }
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < opts.sample_count; ++s) {
    Vec t(p);
    for (int i = 0; i < p; ++i) t(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
    if (region_contains(r, t)) {
      out.verdict = Verdict::nonempty;
      out.witness = t;
      return out;
    }
  }

  if (!opts.external_cmd.empty()) {
    Vec w;
    Verdict v = external_oracle_query(r, opts.external_cmd, &w);
    if (v == Verdict::empty) {
      out.verdict = Verdict::empty;
      return out;
    }
    if (v == Verdict::nonempty) {
      out.verdict = Verdict::nonempty;
      if (w.size() == p) out.witness = w;
      return out;
    }
  }

  if (!opts.certify_quadratics || !exact_box) {
    out.verdict = Verdict::unknown;
    return out;
  }

  // Certified branch-and-bound: a box is discarded only when some inequality
  // is provably violated on all of it; centers double as witness candidates.
  std::vector<std::pair<Vec, Vec>> stack;
  stack.emplace_back(lo, hi);
  int nodes = 0;
  bool inconclusive = false;
  while (!stack.empty()) {
    if (++nodes > opts.bb_max_nodes) {
      inconclusive = true;
      break;
    }
    auto [blo, bhi] = stack.back();
    stack.pop_back();
    bool pruned = false;
    for (const auto& hp : rows) {
      double lb = lin_lower_on_box(hp, blo, bhi);
      if (lb > 0.0 || (hp.strict && lb >= 0.0)) {
        pruned = true;
        break;
      }
    }
    if (!pruned) {
      for (const auto& q : r.quadratic) {
        double lb = quad_lower_on_box(q, blo, bhi);
        if (lb > 0.0 || (q.strict && lb >= 0.0)) {
          pruned = true;
          break;
        }
      }
    }
    if (pruned) continue;
    Vec c = 0.5 * (blo + bhi);
    if (region_contains(r, c)) {
      out.verdict = Verdict::nonempty;
      out.witness = c;
      return out;
    }
    if ((bhi - blo).maxCoeff() < opts.bb_min_edge) {
      inconclusive = true;
      continue;
    }
    int axis = 0;
    (bhi - blo).maxCoeff(&axis);
    double mid = 0.5 * (blo(axis) + bhi(axis));
    Vec h1 = bhi;
    h1(axis) = mid;
    Vec l2 = blo;
    l2(axis) = mid;
    stack.emplace_back(blo, h1);
    stack.emplace_back(l2, bhi);
  }
  out.verdict = inconclusive ? Verdict::unknown : Verdict::empty;
  return out;
}

std::pair<Vec, Vec> bounding_box(const Region& r) {
  bool contradiction = false;
  std::vector<HalfPlane> rows = clean_rows(r, &contradiction);
  if (contradiction) throw std::invalid_argument("empty region has no box");
  if (rows.empty()) throw std::invalid_argument("unbounded region");
  const int p = static_cast<int>(rows[0].c.size());
  Vec lo, hi;
  bool exact = false;
  boxed(rows, p, Vec::Zero(p), 0.0, &lo, &hi, &exact);
  if (!exact) throw std::invalid_argument("unbounded region");
  return {lo, hi};
}

double min_quad_lower_bound(const Mat& Q, const Region& r) {
  if (Q.size() == 0 || Q.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  auto [lo, hi] = bounding_box(r);
  Eigen::SelfAdjointEigenSolver<Mat> es(Q, Eigen::EigenvaluesOnly);
  double lam = std::min(0.0, es.eigenvalues()(0));
  double norm2 = 0.0;
  for (int i = 0; i < lo.size(); ++i)
    norm2 += std::max(lo(i) * lo(i), hi(i) * hi(i));
  return lam * norm2;
}

}  // namespace ascert
