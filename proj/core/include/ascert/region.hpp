#pragma once

#include <utility>

#include "ascert/types.hpp"

namespace ascert {

enum class Verdict { empty, nonempty, unknown };

struct FeasibilityVerdict {
  Verdict verdict = Verdict::unknown;
  std::optional<Vec> witness;
  std::optional<double> radius;  // interior radius for polyhedral queries
};

struct RegionOracleOptions {
  double eps_region = 1e-9;   // minimum interior radius to count as nonempty
  int sample_count = 128;     // pseudorandom witness candidates
  bool certify_quadratics = true;  // branch-and-bound emptiness proof
  int bb_max_nodes = 20000;
  double bb_min_edge = 1e-7;
  std::string external_cmd;   // optional external feasibility oracle
};

enum class LpStatus { optimal, infeasible, unbounded, stalled };

struct LpResult {
  LpStatus status = LpStatus::stalled;
  Vec x;
  double value = 0.0;
};

// min c'x s.t. Ax <= b over free x; two-phase dense simplex with Bland's rule.
LpResult solve_lp(const Vec& c, const Mat& A, const Vec& b);

// Chebyshev-center test of the closure of the linear part.
FeasibilityVerdict polyhedron_feasible(const Region& r,
                                       const RegionOracleOptions& opts = {});

// Linear emptiness, then witness sampling, then the optional external oracle,
// then certified branch-and-bound; unknown only if everything is inconclusive.
FeasibilityVerdict quad_region_feasible(const Region& r,
                                        const RegionOracleOptions& opts = {});

// Certified lower bound on min over r of theta'Q theta. Throws when the linear
// part of r is unbounded.
double min_quad_lower_bound(const Mat& Q, const Region& r);

// Axis-aligned bounding box (lo, hi) of the linear part; throws when unbounded.
std::pair<Vec, Vec> bounding_box(const Region& r);

}  // namespace ascert
