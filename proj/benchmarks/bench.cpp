#include <benchmark/benchmark.h>

#include "ascert/cert.hpp"
#include "ascert/frontends.hpp"
#include "ascert/kkt.hpp"
#include "ascert/solver.hpp"

namespace {

using namespace ascert;

MpQP contrived() {
  MpQP mp;
  mp.H = Mat(3, 3);
  mp.H << 0.97, 0.19, 0.15, 0.19, 0.98, 0.05, 0.15, 0.05, 0.99;
  mp.f = Vec::Zero(3);
  mp.f_theta = Mat(3, 2);
  mp.f_theta << 11.3, -44.3, -3.66, -11.9, -32.6, 7.81;
  mp.A = Mat(3, 3);
  mp.A << 0.38, 2.20, 0.43, 0.49, 0.57, 0.22, 0.77, 0.46, 0.41;
  mp.b = Vec(3);
  mp.b << 4.1, 3.7, 4.3;
  mp.W = Mat(3, 2);
  mp.W << 0.19, -0.89, 0.62, -1.54, -0.59, -1.01;
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e(i) = 1.0;
    mp.theta0.linear.push_back(HalfPlane{e, 1.0, false});
    mp.theta0.linear.push_back(HalfPlane{-e, 0.0, false});
  }
  validate(mp);
  return mp;
}

void BM_factorize(benchmark::State& state) {
  MpQP mp = contrived();
  Mat Ak = mp.A.topRows(2);
  for (auto _ : state) benchmark::DoNotOptimize(factorize(mp.H, Ak));
}
BENCHMARK(BM_factorize);

void BM_solve_point(benchmark::State& state) {
  MpQP mp = contrived();
  Vec theta(2);
  theta << 0.5, 0.5;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve(mp, theta, Vec::Zero(3), WorkingSet{}));
}
BENCHMARK(BM_solve_point);

void BM_certify_primal(benchmark::State& state) {
  MpQP mp = contrived();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        certify(mp, WorkingSet{}, Mat::Zero(3, 2), Vec::Zero(3)));
}
BENCHMARK(BM_certify_primal);

void BM_certify_dual(benchmark::State& state) {
  MpQP mp = contrived();
  DualProblem d = build_dual(mp);
  WorkingSet w0;
  for (int i = 0; i < 3; ++i) w0.append(i);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        certify(d.qp, w0, Mat::Zero(3, 2), Vec::Zero(3)));
}
BENCHMARK(BM_certify_dual);

void BM_certify_mpc(benchmark::State& state) {
  MpQP mp = mpc_double_integrator(static_cast<int>(state.range(0)), 1.0, 0.1, 1.0);
  Mat F0 = Mat::Zero(mp.n(), 2);
  Vec G0 = Vec::Zero(mp.n());
  for (auto _ : state)
    benchmark::DoNotOptimize(certify(mp, WorkingSet{}, F0, G0));
}
BENCHMARK(BM_certify_mpc)->Arg(2)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
