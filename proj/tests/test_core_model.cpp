#include <doctest.h>

#include "ascert/types.hpp"
#include "oracles.hpp"

using namespace ascert;

TEST_SUITE("core_model") {

TEST_CASE("validate classifies the reference problem as strictly convex") {
  MpQP mp = oracle::contrived_mpqp();
  auto diags = validate(mp);
  CHECK(diags.empty());
  CHECK(mp.convexity_class == Convexity::strictly_convex);
}

TEST_CASE("validate classifies a zero Hessian as lp") {
  MpQP mp = oracle::contrived_mpqp();
  mp.H.setZero();
  auto diags = validate(mp);
  CHECK(diags.empty());
  CHECK(mp.convexity_class == Convexity::lp);
}

TEST_CASE("validate rejects an indefinite Hessian") {
  MpQP mp = oracle::contrived_mpqp();
  mp.H = -Mat::Identity(3, 3);
  auto diags = validate(mp);
  REQUIRE(!diags.empty());
  CHECK(diags[0] == "H not PSD");
}

TEST_CASE("validate reports dimension mismatches per field") {
  MpQP mp = oracle::contrived_mpqp();
  mp.f = Vec::Zero(2);
  mp.b = Vec::Zero(5);
  auto diags = validate(mp);
  CHECK(diags.size() == 2);
}

TEST_CASE("symmetrization is idempotent") {
  MpQP mp = oracle::contrived_mpqp();
  mp.H(0, 1) += 1e-9;
  validate(mp);
  Mat H1 = mp.H;
  validate(mp);
  CHECK((mp.H - H1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((mp.H - mp.H.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("validate classifies a rank-deficient PSD Hessian as semi-definite") {
  MpQP mp = oracle::contrived_mpqp();
  mp.H = Mat::Zero(3, 3);
  mp.H(0, 0) = 1.0;
  auto diags = validate(mp);
  CHECK(diags.empty());
  CHECK(mp.convexity_class == Convexity::semi_definite);
}

TEST_CASE("region_contains: empty region is all of R^p") {
  Region r;
  Vec t(2);
  t << 3.0, -7.0;
  CHECK(region_contains(r, t));
}

TEST_CASE("region_contains respects strictness on the boundary") {
  Region r;
  Vec e = Vec::Zero(2);
  e(0) = 1.0;
  r.linear.push_back(HalfPlane{e, 0.5, true});  // theta1 < 0.5
  Vec t(2);
  t << 0.5, 0.0;
  CHECK(!region_contains(r, t));
  t(0) = 0.499;
  CHECK(region_contains(r, t));
}

TEST_CASE("region_contains: non-strict quadratic boundary point is inside") {
  Region r;
  r.quadratic.push_back(QuadIneq{Mat::Identity(2, 2), Vec::Zero(2), -1.0, false});
  Vec t(2);
  t << 1.0, 0.0;
  CHECK(region_contains(r, t));
  t << 1.1, 0.0;
  CHECK(!region_contains(r, t));
}

TEST_CASE("normalized scales half-planes to unit normals") {
  Vec c(2);
  c << 3.0, 4.0;
  HalfPlane hp = normalized(HalfPlane{c, 10.0, true});
  CHECK(hp.c.norm() == doctest::Approx(1.0));
  CHECK(hp.d == doctest::Approx(2.0));
  CHECK(hp.strict);
}

TEST_CASE("working set keeps insertion order and complement is ascending") {
  WorkingSet ws;
  ws.append(2);
  ws.append(0);
  CHECK(ws.idx == std::vector<int>{2, 0});
  CHECK(ws.complement(4) == std::vector<int>{1, 3});
  ws.remove_index(2);
  CHECK(ws.idx == std::vector<int>{0});
}

TEST_CASE("partition statistics are derived from the regions") {
  Partition part;
  RegionTuple a, b;
  a.k = 2;
  b.k = 4;
  part.regions = {a, b};
  CHECK(part.nmax() == 4);
  CHECK(part.nreg() == 2);
}

}  // TEST_SUITE
