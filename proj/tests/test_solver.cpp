#include <doctest.h>

#include <random>

#include "ascert/solver.hpp"
#include "oracles.hpp"

using namespace ascert;

namespace {

MpQP scalar_clip() {
  // min 1/2 x^2 - x  s.t. x <= 1/2, one dummy parameter.
  MpQP mp;
  mp.H = Mat::Identity(1, 1);
  mp.f = Vec::Constant(1, -1.0);
  mp.f_theta = Mat::Zero(1, 1);
  mp.A = Mat::Identity(1, 1);
  mp.b = Vec::Constant(1, 0.5);
  mp.W = Mat::Zero(1, 1);
  validate(mp);
  return mp;
}

MpQP lp_box(const Vec& c, const Vec& u, const Mat& extraA, const Vec& extrab) {
  // min c'x over 0 <= x <= u plus optional extra rows; rows ordered
  // [x <= u; -x <= 0; extra].
  const int n = static_cast<int>(c.size());
  MpQP mp;
  mp.H = Mat::Zero(n, n);
  mp.f = c;
  mp.f_theta = Mat::Zero(n, 1);
  const int me = static_cast<int>(extraA.rows());
  mp.A = Mat(2 * n + me, n);
  mp.A.topRows(n) = Mat::Identity(n, n);
  mp.A.middleRows(n, n) = -Mat::Identity(n, n);
  if (me > 0) mp.A.bottomRows(me) = extraA;
  mp.b = Vec(2 * n + me);
  mp.b.head(n) = u;
  mp.b.segment(n, n).setZero();
  if (me > 0) mp.b.tail(me) = extrab;
  mp.W = Mat::Zero(2 * n + me, 1);
  validate(mp);
  return mp;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("reference problem: iteration path at theta = (0.5, 0.5)") {
  MpQP mp = oracle::contrived_mpqp();
  Vec theta(2);
  theta << 0.5, 0.5;
  SolveLog log = solve(mp, theta, Vec::Zero(3), WorkingSet{});
  CHECK(log.status == SolveStatus::optimal);
  CHECK(log.iterations == 4);
  CHECK(log.wschanges == std::vector<int>{1, 3, -1});
  REQUIRE(log.ws.idx == std::vector<int>{2});
  CHECK(log.lam(0) >= 0.0);
}

TEST_CASE("reference problem: KKT conditions at sampled parameters") {
  MpQP mp = oracle::contrived_mpqp();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 40; ++s) {
    Vec theta(2);
    theta << unit(rng), unit(rng);
    SolveLog log = solve(mp, theta, Vec::Zero(3), WorkingSet{});
    REQUIRE(log.status == SolveStatus::optimal);
    Vec ftheta = mp.f + mp.f_theta * theta;
    Vec slack = mp.b + mp.W * theta - mp.A * log.x;
    CHECK(slack.minCoeff() >= -1e-8);
    Vec grad = mp.H * log.x + ftheta;
    for (int q = 0; q < log.ws.size(); ++q) {
      grad += log.lam(q) * mp.A.row(log.ws.idx[q]).transpose();
      CHECK(log.lam(q) >= -1e-10);
      CHECK(std::abs(slack(log.ws.idx[q])) <= 1e-8);
    }
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("scalar clip: partial step then bound becomes active") {
  MpQP mp = scalar_clip();
  SolveLog log = solve(mp, Vec::Zero(1), Vec::Zero(1), WorkingSet{});
  CHECK(log.status == SolveStatus::optimal);
  CHECK(log.iterations == 2);
  CHECK(log.wschanges == std::vector<int>{1});
  REQUIRE(log.alphas.size() == 1);
  CHECK(log.alphas[0] == doctest::Approx(0.5));
  CHECK(log.x(0) == doctest::Approx(0.5));
  CHECK(log.lam(0) == doctest::Approx(0.5));
}

TEST_CASE("one iteration when the unconstrained minimizer is interior") {
  MpQP mp;
  mp.H = Mat::Identity(2, 2);
  mp.f = Vec::Constant(2, -0.1);
  mp.f_theta = Mat::Zero(2, 1);
  mp.A = Mat::Identity(2, 2);
  mp.b = Vec::Constant(2, 10.0);
  mp.W = Mat::Zero(2, 1);
  validate(mp);
  SolveLog log = solve(mp, Vec::Zero(1), Vec::Zero(2), WorkingSet{});
  CHECK(log.status == SolveStatus::optimal);
  CHECK(log.iterations == 1);
  CHECK(log.wschanges.empty());
  CHECK((log.x - Vec::Constant(2, 0.1)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("lp: unbounded ray detected from a vertex start") {
  // min x1 + x2 over x <= 1 is unbounded below.
  MpQP mp;
  mp.H = Mat::Zero(2, 2);
  mp.f = Vec::Constant(2, 1.0);
  mp.f_theta = Mat::Zero(2, 1);
  mp.A = Mat::Identity(2, 2);
  mp.b = Vec::Constant(2, 1.0);
  mp.W = Mat::Zero(2, 1);
  validate(mp);
  WorkingSet w0;
  w0.append(0);
  w0.append(1);
  SolveLog log = solve(mp, Vec::Zero(1), Vec::Constant(2, 1.0), w0);
  CHECK(log.status == SolveStatus::unbounded);
  SUBCASE("gradient-direction variant agrees from the interior") {
    SolverOptions opts;
    opts.lp_gradient_direction = true;
    SolveLog g = solve(mp, Vec::Zero(1), Vec::Zero(2), WorkingSet{}, opts);
    CHECK(g.status == SolveStatus::unbounded);
  }
}

TEST_CASE("iterates stay feasible and objective never increases") {
  MpQP mp = oracle::contrived_mpqp();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 25; ++s) {
    Vec theta(2);
    theta << unit(rng), unit(rng);
    SolveLog log = solve(mp, theta, Vec::Zero(3), WorkingSet{});
    REQUIRE(log.status == SolveStatus::optimal);
    Vec bt = mp.b + mp.W * theta;
    double prev = objective(mp, theta, Vec::Zero(3));
    for (const Vec& x : log.iterates) {
      CHECK((mp.A * x - bt).maxCoeff() <= 1e-8);
      double obj = objective(mp, theta, x);
      CHECK(obj <= prev + 1e-8);
      prev = obj;
    }
  }
}

TEST_CASE("working-set changes replay to the final working set") {
  MpQP mp = oracle::contrived_mpqp();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 25; ++s) {
    Vec theta(2);
    theta << unit(rng), unit(rng);
    SolveLog log = solve(mp, theta, Vec::Zero(3), WorkingSet{});
    WorkingSet ws;
    for (int c : log.wschanges) {
      if (c > 0)
        ws.append(c - 1);
      else
        ws.remove_index(-c - 1);
    }
    CHECK(ws.idx == log.ws.idx);
    // exactly one change per iteration except the final optimality pass
    CHECK(static_cast<int>(log.wschanges.size()) == log.iterations - 1);
  }
}

TEST_CASE("lp pivots match an independent Dantzig-rule simplex") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    Vec c(n), u(n);
    for (int i = 0; i < n; ++i) {
      c(i) = g(rng);
      u(i) = 1.0 + (rng() % 100) / 50.0;
    }
    Mat Ae(1, n);
    for (int i = 0; i < n; ++i) Ae(0, i) = g(rng);
    Vec be = Vec::Constant(1, 1.0 + std::abs(g(rng)));  // keeps origin feasible
    MpQP mp = lp_box(c, u, Ae, be);

    // oracle on the same constraint list, starting at the origin vertex
    std::vector<int> basis;
    WorkingSet w0;
    for (int i = 0; i < n; ++i) {
      basis.push_back(n + i);
      w0.append(n + i);
    }
    auto tr = oracle::dantzig_simplex(c, mp.A, mp.b, Vec::Zero(n), basis);
    if (tr.status == oracle::SimplexTrace::failed) continue;
    ++checked;

    SolveLog log = solve(mp, Vec::Zero(1), Vec::Zero(n), w0);
    if (tr.status == oracle::SimplexTrace::optimal) {
      REQUIRE(log.status == SolveStatus::optimal);
      CHECK((log.x - tr.x).cwiseAbs().maxCoeff() <= 1e-8);
    } else {
      REQUIRE(log.status == SolveStatus::unbounded);
    }
    CHECK(log.wschanges == tr.changes);
  }
  CHECK(checked >= 20);
}

TEST_CASE("iteration cap reports max_iter") {
  MpQP mp = oracle::contrived_mpqp();
  Vec theta(2);
  theta << 0.5, 0.5;
  SolverOptions opts;
  opts.max_iter = 1;
  SolveLog log = solve(mp, theta, Vec::Zero(3), WorkingSet{}, opts);
  CHECK(log.status == SolveStatus::max_iter);
}

TEST_CASE("start-point validation") {
  MpQP mp = oracle::contrived_mpqp();
  Vec theta = Vec::Zero(2);
  Vec bad = Vec::Constant(3, 100.0);
  CHECK_THROWS_AS(solve(mp, theta, bad, WorkingSet{}), std::invalid_argument);
  WorkingSet w0;
  w0.append(0);  // constraint 1 is slack at the origin
  CHECK_THROWS_AS(solve(mp, theta, Vec::Zero(3), w0), std::invalid_argument);
}

TEST_CASE("objective evaluates the quadratic form") {
  MpQP mp = scalar_clip();
  Vec x = Vec::Constant(1, 2.0);
  CHECK(objective(mp, Vec::Zero(1), x) == doctest::Approx(0.5 * 4.0 - 2.0));
}

}  // TEST_SUITE
