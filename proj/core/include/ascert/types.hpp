#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace ascert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Affine inequality c'theta <= d (or < d when strict).
struct HalfPlane {
  Vec c;
  double d = 0.0;
  bool strict = false;
};

// Scale to unit normal so tolerances are scale-free; zero rows are kept as-is
// and handled as tautologies/contradictions by the feasibility checks.
HalfPlane normalized(const HalfPlane& hp);

// theta'Q theta + R'theta + S <= 0 (or < 0 when strict). Q kept symmetric.
struct QuadIneq {
  Mat Q;
  Vec R;
  double S = 0.0;
  bool strict = false;
};

// Conjunction of linear and quadratic inequalities; empty lists mean R^p.
struct Region {
  std::vector<HalfPlane> linear;
  std::vector<QuadIneq> quadratic;
};

bool region_contains(const Region& r, const Vec& theta);

// Ordered set of 0-based constraint indices (insertion order is significant:
// dual variables and KKT rows follow it).
struct WorkingSet {
  std::vector<int> idx;

  int size() const { return static_cast<int>(idx.size()); }
  bool contains(int j) const;
  void append(int j);
  void remove_index(int j);
  // Indices of {0..m-1} \ idx in ascending order.
  std::vector<int> complement(int m) const;
};

enum class Convexity { strictly_convex, semi_definite, lp };

// min 0.5 x'Hx + (f + f_theta*theta)'x  s.t.  Ax <= b + W*theta, theta in theta0.
struct MpQP {
  Mat H;
  Vec f;
  Mat f_theta;
  Mat A;
  Vec b;
  Mat W;
  Region theta0;
  Convexity convexity_class = Convexity::strictly_convex;

  int n() const { return static_cast<int>(H.rows()); }
  int m() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(W.cols()); }
};

// Symmetrizes H, classifies convexity_class, returns diagnostics (empty iff valid).
std::vector<std::string> validate(MpQP& mp);

enum class TupleStatus { in_progress = 0, csp = 1, optimal = 2, unbounded = 3 };

// Certification work item: parameter region plus the iterate state shared by
// every theta in it.
struct RegionTuple {
  Region theta;
  WorkingSet ws;
  Mat F;                       // iterate map x(theta) = F theta + G (affine phases)
  Vec G;
  TupleStatus status = TupleStatus::in_progress;
  int k = 0;                   // iterations spent so far
  std::optional<Vec> nhat;     // direction seed from the latest removal
  bool case2 = true;           // no constraint removed yet
  std::vector<int> wschanges;  // +j / -j, 1-based
  long long flops = 0;

  // Bookkeeping for iteration counting and the singular direction.
  bool k_counted = false;        // the pending pass was already counted at removal
  std::vector<int> parent_ws;    // working set right before the latest removal
  int removed_pos = -1;          // its position in parent_ws
};

struct Partition {
  std::vector<RegionTuple> regions;
  std::string problem_hash;
  std::string options;
  double wall_time = 0.0;
  int n = 0, m = 0, p = 0;

  int nmax() const;
  int nreg() const { return static_cast<int>(regions.size()); }
};

}  // namespace ascert
