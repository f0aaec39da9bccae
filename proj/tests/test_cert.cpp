#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "ascert/cert.hpp"
#include "ascert/frontends.hpp"
#include "ascert/io.hpp"
#include "ascert/solver.hpp"
#include "oracles.hpp"

using namespace ascert;

namespace {

struct Signature {
  std::vector<int> wschanges;
  int k = 0;
  TupleStatus status = TupleStatus::optimal;
  bool operator==(const Signature& o) const {
    return wschanges == o.wschanges && k == o.k && status == o.status;
  }
};

std::vector<Signature> signatures(const Partition& part) {
  std::vector<Signature> out;
  for (const auto& t : part.regions)
    out.push_back({t.wschanges, t.k, t.status});
  return out;
}

bool has_signature(const Partition& part, std::vector<int> chg, int k) {
  return std::any_of(part.regions.begin(), part.regions.end(),
                     [&](const RegionTuple& t) {
                       return t.wschanges == chg && t.k == k &&
                              t.status == TupleStatus::optimal;
                     });
}

Partition certify_primal(const MpQP& mp, const CertOptions& opts = {}) {
  return certify(mp, WorkingSet{}, Mat::Zero(mp.n(), mp.p()), Vec::Zero(mp.n()),
                 opts);
}

// Interior lookup that skips thetas within tol of any region boundary so the
// comparison is not decided by tie-breaking at measure-zero sets.
const RegionTuple* lookup(const Partition& part, const Vec& theta, double tol) {
  const RegionTuple* hit = nullptr;
  for (const auto& t : part.regions) {
    double vmax = -std::numeric_limits<double>::infinity();
    for (const auto& hp : t.theta.linear)
      vmax = std::max(vmax, normalized(hp).c.dot(theta) - normalized(hp).d);
    for (const auto& q : t.theta.quadratic)
      vmax = std::max(vmax, theta.dot(q.Q * theta) + q.R.dot(theta) + q.S);
    if (std::abs(vmax) <= tol) return nullptr;  // boundary: skip the sample
    if (vmax < 0.0) {
      if (hit) return nullptr;  // overlap beyond tolerance: caller fails
      hit = &t;
    }
  }
  return hit;
}

MpQP clip_1d() {
  // min 1/2 x^2 s.t. x <= theta - 0.5 shifted so that lambda(theta) flips sign
  // at theta = 0.5 within theta0 = [0, 1].
  MpQP mp;
  mp.H = Mat::Identity(1, 1);
  mp.f = Vec::Zero(1);
  mp.f_theta = -Mat::Identity(1, 1);
  mp.A = Mat::Identity(1, 1);
  mp.b = Vec::Constant(1, 0.5);
  mp.W = Mat::Zero(1, 1);
  Vec e = Vec::Constant(1, 1.0);
  mp.theta0.linear.push_back(HalfPlane{e, 1.0, false});
  mp.theta0.linear.push_back(HalfPlane{-e, 0.0, false});
  validate(mp);
  return mp;
}

}  // namespace

TEST_SUITE("cert") {

TEST_CASE("reference problem: six regions, worst case four iterations") {
  MpQP mp = oracle::contrived_mpqp();
  Partition part = certify_primal(mp);
  CHECK(part.nreg() == 6);
  CHECK(part.nmax() == 4);
  CHECK(has_signature(part, {}, 1));
  CHECK(has_signature(part, {3}, 2));
  CHECK(has_signature(part, {2, 3, -2}, 4));
  CHECK(has_signature(part, {1}, 2));
  CHECK(has_signature(part, {1, 3}, 3));
  CHECK(has_signature(part, {1, 3, -1}, 4));
  for (const auto& t : part.regions) CHECK(t.status == TupleStatus::optimal);
}

TEST_CASE("dual of the reference problem: five regions, four iterations") {
  MpQP mp = oracle::contrived_mpqp();
  DualProblem dp = build_dual(mp);
  WorkingSet w0;
  for (int i = 0; i < dp.qp.m(); ++i) w0.append(i);
  Partition part = certify(dp.qp, w0, Mat::Zero(3, 2), Vec::Zero(3));
  CHECK(part.nreg() == 5);
  CHECK(part.nmax() == 4);
  CHECK(has_signature(part, {}, 1));
  CHECK(has_signature(part, {-3}, 2));
  CHECK(has_signature(part, {-1}, 2));
  CHECK(has_signature(part, {-1, -3}, 3));
  CHECK(has_signature(part, {-1, -3, 1}, 4));
}

TEST_CASE("certified sequences match the online solver pointwise") {
  MpQP mp = oracle::contrived_mpqp();
  Partition part = certify_primal(mp);
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int compared = 0;
  for (int s = 0; s < 300; ++s) {
    Vec theta(2);
    theta << unit(rng), unit(rng);
    const RegionTuple* t = lookup(part, theta, 1e-6);
    if (!t) continue;  // boundary sample
    ++compared;
    SolveLog log = solve(mp, theta, Vec::Zero(3), WorkingSet{});
    CHECK(log.status == SolveStatus::optimal);
    CHECK(t->wschanges == log.wschanges);
    CHECK(t->k == log.iterations);
    CHECK((t->F * theta + t->G - log.x).cwiseAbs().maxCoeff() <= 1e-7);
  }
  CHECK(compared >= 250);
}

TEST_CASE("every interior parameter lands in exactly one region") {
  MpQP mp = oracle::contrived_mpqp();
  Partition part = certify_primal(mp);
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int covered = 0, skipped = 0;
  for (int s = 0; s < 400; ++s) {
    Vec theta(2);
    theta << unit(rng), unit(rng);
    int hits = 0;
    bool boundary = false;
    for (const auto& t : part.regions) {
      double vmax = -1e300;
      for (const auto& hp : t.theta.linear)
        vmax = std::max(vmax, normalized(hp).c.dot(theta) - normalized(hp).d);
      for (const auto& q : t.theta.quadratic)
        vmax = std::max(vmax, theta.dot(q.Q * theta) + q.R.dot(theta) + q.S);
      if (std::abs(vmax) <= 1e-6) boundary = true;
      if (vmax < -1e-6) ++hits;
    }
    if (boundary) {
      ++skipped;
      continue;
    }
    CHECK(hits == 1);
    ++covered;
  }
  CHECK(covered >= 350);
  CHECK(skipped <= 50);
}

TEST_CASE("mode_a splits on the sign of the parametric multiplier") {
  MpQP mp = clip_1d();
  auto ctx = make_context(mp, WorkingSet{}, Mat::Zero(1, 1), Vec::Zero(1), {});
  RegionTuple t;
  t.theta = mp.theta0;
  t.ws.append(0);
  t.F = Mat::Zero(1, 1);       // iterate pinned at the constraint: x = 0.5
  t.G = Vec::Constant(1, 0.5);
  t.status = TupleStatus::csp;
  t.k = 2;
  auto children = mode_a(t, *ctx);
  REQUIRE(children.size() == 2);
  // lambda(theta) = theta - 0.5: removal for theta < 0.5, optimal above
  const RegionTuple& rem = children[0];
  CHECK(rem.status == TupleStatus::in_progress);
  CHECK(rem.k == 3);
  CHECK(rem.k_counted);
  CHECK(rem.ws.size() == 0);
  CHECK(rem.wschanges == std::vector<int>{-1});
  REQUIRE(rem.nhat.has_value());
  CHECK((*rem.nhat)(0) == doctest::Approx(-1.0));
  CHECK(rem.parent_ws == std::vector<int>{0});
  CHECK(rem.removed_pos == 0);
  CHECK(region_contains(rem.theta, Vec::Constant(1, 0.3)));
  CHECK(!region_contains(rem.theta, Vec::Constant(1, 0.7)));
  const RegionTuple& opt = children[1];
  CHECK(opt.status == TupleStatus::optimal);
  CHECK(opt.k == 2);
  CHECK(region_contains(opt.theta, Vec::Constant(1, 0.7)));
  CHECK(!region_contains(opt.theta, Vec::Constant(1, 0.3)));
}

TEST_CASE("mode_a with an empty working set is globally optimal") {
  MpQP mp = clip_1d();
  auto ctx = make_context(mp, WorkingSet{}, Mat::Zero(1, 1), Vec::Zero(1), {});
  RegionTuple t;
  t.theta = mp.theta0;
  t.F = Mat::Identity(1, 1);
  t.G = Vec::Zero(1);
  t.status = TupleStatus::csp;
  t.k = 1;
  auto children = mode_a(t, *ctx);
  REQUIRE(children.size() == 1);
  CHECK(children[0].status == TupleStatus::optimal);
  CHECK(children[0].k == 1);
  CHECK(children[0].theta.linear.size() == t.theta.linear.size());
}

TEST_CASE("duplicate multipliers break ties to the lowest index") {
  // Two identical constraints cannot share a working set (rank), so use two
  // parallel rows offset in b that both go active; mode_a must remove the
  // lower index first when the multipliers coincide.
  MpQP mp;
  mp.H = Mat::Identity(2, 2);
  mp.f = Vec::Zero(2);
  mp.f_theta = Mat::Ones(2, 1);  // lambda_i(theta) = -theta for both rows
  mp.A = Mat(2, 2);
  mp.A << 1.0, 0.0, 0.0, 1.0;
  mp.b = Vec::Zero(2);
  mp.W = Mat::Zero(2, 1);
  Vec e = Vec::Constant(1, 1.0);
  mp.theta0.linear.push_back(HalfPlane{e, 1.0, false});
  mp.theta0.linear.push_back(HalfPlane{-e, 0.0, false});
  validate(mp);
  auto ctx = make_context(mp, WorkingSet{}, Mat::Zero(2, 1), Vec::Zero(2), {});
  RegionTuple t;
  t.theta = mp.theta0;
  t.ws.append(0);
  t.ws.append(1);
  t.F = Mat::Zero(2, 1);
  t.G = Vec::Zero(2);
  t.status = TupleStatus::csp;
  t.k = 1;
  auto children = mode_a(t, *ctx);
  REQUIRE(children.size() == 3);
  // both multipliers equal theta - ... here lambda_i(theta) = theta; removal
  // regions tie everywhere, so the pairwise strictness must empty the child
  // of the higher index
  Vec probe = Vec::Constant(1, 0.4);
  CHECK(children[0].wschanges == std::vector<int>{-1});
  CHECK(children[1].wschanges == std::vector<int>{-2});
  bool c0 = region_contains(children[0].theta, probe);
  bool c1 = region_contains(children[1].theta, probe);
  CHECK(c0);   // wins the tie
  CHECK(!c1);  // strict pairwise row empties the higher index
}

TEST_CASE("relax_quadratic is a sound outer approximation") {
  Region box;
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e(i) = 1.0;
    box.linear.push_back(HalfPlane{e, 1.0, false});
    box.linear.push_back(HalfPlane{-e, 0.0, false});
  }
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 15; ++trial) {
    Mat M = oracle::random_mat(2, 2, rng);
    QuadIneq q{0.5 * (M + M.transpose()), oracle::random_mat(2, 1, rng),
               0.3 * static_cast<double>(trial % 5) - 0.6, trial % 2 == 0};
    HalfPlane hp = relax_quadratic(q, box);
    CHECK(hp.strict == q.strict);
    for (int gi = 0; gi <= 20; ++gi) {
      for (int gj = 0; gj <= 20; ++gj) {
        Vec t(2);
        t << gi / 20.0, gj / 20.0;
        double qv = t.dot(q.Q * t) + q.R.dot(t) + q.S;
        if (qv < -1e-12) CHECK(hp.c.dot(t) - hp.d <= 1e-9);
      }
    }
  }
}

TEST_CASE("relaxed certification covers every sample with the right count") {
  MpQP mp = oracle::contrived_mpqp();
  CertOptions opts;
  opts.relax_quadratics = true;
  Partition part = certify_primal(mp, opts);
  CHECK(part.nmax() >= 4);
  for (const auto& t : part.regions) CHECK(t.theta.quadratic.empty());
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int compared = 0;
  for (int s = 0; s < 200; ++s) {
    Vec theta(2);
    theta << unit(rng), unit(rng);
    SolveLog log = solve(mp, theta, Vec::Zero(3), WorkingSet{});
    bool found = false, boundary = false;
    for (const auto& t : part.regions) {
      double vmax = -1e300;
      for (const auto& hp : t.theta.linear)
        vmax = std::max(vmax, normalized(hp).c.dot(theta) - normalized(hp).d);
      if (std::abs(vmax) <= 1e-6) boundary = true;
      if (vmax < -1e-6 && t.wschanges == log.wschanges && t.k == log.iterations)
        found = true;
    }
    if (boundary && !found) continue;
    ++compared;
    CHECK(found);
  }
  CHECK(compared >= 150);
}

TEST_CASE("pruning iterate-infeasible parameters preserves the answer") {
  MpQP mp = oracle::contrived_mpqp();
  CertOptions opts;
  opts.prune_infeasible_iterates = true;
  Partition pruned = certify_primal(mp, opts);
  Partition plain = certify_primal(mp);
  CHECK(pruned.nmax() == plain.nmax());
  CHECK(pruned.nreg() == plain.nreg());
  CHECK(signatures(pruned) == signatures(plain));
}

TEST_CASE("prune_infeasible_iterates adds one row per constraint") {
  MpQP mp = oracle::contrived_mpqp();
  auto ctx = make_context(mp, WorkingSet{}, Mat::Zero(3, 2), Vec::Zero(3), {});
  RegionTuple t;
  t.theta = mp.theta0;
  t.F = Mat::Zero(3, 2);
  t.G = Vec::Zero(3);
  t.status = TupleStatus::csp;
  RegionTuple out = prune_infeasible_iterates(t, *ctx);
  CHECK(out.theta.linear.size() == t.theta.linear.size() + 3);
}

TEST_CASE("iteration cap raises a certification error") {
  MpQP mp = oracle::contrived_mpqp();
  CertOptions opts;
  opts.max_k = 2;
  CHECK_THROWS_AS(certify_primal(mp, opts), CertError);
}

TEST_CASE("infeasible affine start is rejected") {
  MpQP mp = oracle::contrived_mpqp();
  CHECK_THROWS_AS(certify(mp, WorkingSet{}, Mat::Zero(3, 2),
                          Vec::Constant(3, 100.0), CertOptions{}),
                  CertError);
}

TEST_CASE("empty parameter set is rejected") {
  MpQP mp = oracle::contrived_mpqp();
  Vec e = Vec::Zero(2);
  e(0) = 1.0;
  mp.theta0.linear.push_back(HalfPlane{e, -1.0, false});  // theta1 <= -1
  CHECK_THROWS_AS(certify_primal(mp), CertError);
}

TEST_CASE("serialization is byte-identical across runs and worker counts") {
  MpQP mp = oracle::contrived_mpqp();
  Partition a = certify_primal(mp);
  Partition b = certify_primal(mp);
  CertOptions opts;
  opts.workers = 4;
  Partition c = certify_primal(mp, opts);
  std::string sa = serialize_partition(a);
  CHECK(sa == serialize_partition(b));
  CHECK(sa == serialize_partition(c));
}

TEST_CASE("flop counts are positive and grow with the iteration count") {
  MpQP mp = oracle::contrived_mpqp();
  Partition part = certify_primal(mp);
  long long flops_k1 = -1, flops_k4 = -1;
  for (const auto& t : part.regions) {
    if (t.k == 1) flops_k1 = t.flops;
    if (t.k == 4) flops_k4 = t.flops;
  }
  CHECK(flops_k1 > 0);
  CHECK(flops_k4 > flops_k1);
}

}  // TEST_SUITE
