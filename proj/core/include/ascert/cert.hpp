#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "ascert/frontends.hpp"
#include "ascert/kkt.hpp"
#include "ascert/region.hpp"
#include "ascert/types.hpp"

namespace ascert {

struct CertOptions {
  double eps_dual = 0.0;
  bool relax_quadratics = false;
  bool prune_infeasible_iterates = false;
  double eps_region = 1e-9;
  int max_k = 0;  // 0 -> 4 * m
  bool deterministic_order = true;
  double eps_sing = 1e-9;
  bool lp_gradient_direction = false;
  FlopMethod flop_method = FlopMethod::nullspace;
  int workers = 1;
  RegionOracleOptions oracle;
};

// Thrown when the iteration cap is hit (possible cycling) or the start is
// unusable; maps to CLI exit code 3.
struct CertError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared read-only certification state: the problem, the affine start, and the
// parametric CSP of the initial working set (anchors for the pre-removal case).
struct CertContext {
  MpQP mp;
  Mat F0;
  Vec G0;
  Mat Fstar0;
  Vec Gstar0;
  CertOptions opts;

  std::shared_ptr<const KktFactors> factors(const WorkingSet& ws) const;

 private:
  mutable std::mutex cache_mu_;
  mutable std::map<std::vector<int>, std::shared_ptr<const KktFactors>> cache_;
};

// Builds the context and verifies the start: theta0 nonempty and
// x0(theta) = F0 theta + G0 primal feasible over all of theta0 (one LP per row).
std::unique_ptr<CertContext> make_context(const MpQP& mp, const WorkingSet& w0,
                                          const Mat& F0, const Vec& G0,
                                          const CertOptions& opts);

// Removal / global-optimality split of a CSP tuple.
std::vector<RegionTuple> mode_a(const RegionTuple& t, const CertContext& ctx);

// Addition / CSP split after at least one removal (affine iterates).
std::vector<RegionTuple> mode_b_case1(const RegionTuple& t, const CertContext& ctx);

// Addition / CSP split before any removal (quadratic inequalities in general).
std::vector<RegionTuple> mode_b_case2(const RegionTuple& t, const CertContext& ctx);

// Addition split along the parameter-free singular direction.
std::vector<RegionTuple> mode_b_singular(const RegionTuple& t, const CertContext& ctx);

// Outer approximation: half-plane R theta < -S - L with L a certified lower
// bound of the quadratic term over base.
HalfPlane relax_quadratic(const QuadIneq& q, const Region& base);

// Tightens a CSP tuple with the primal feasibility rows of its iterate.
RegionTuple prune_infeasible_iterates(const RegionTuple& t, const CertContext& ctx);

Partition certify(const MpQP& mp, const WorkingSet& w0, const Mat& F0,
                  const Vec& G0, const CertOptions& opts = {});

}  // namespace ascert
