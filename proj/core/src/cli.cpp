#include "ascert/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <limits>
#include <iostream>
#include <random>
#include <sstream>

#include "ascert/cert.hpp"
#include "ascert/frontends.hpp"
#include "ascert/io.hpp"
#include "ascert/region.hpp"
#include "ascert/solver.hpp"

namespace ascert {

namespace {

struct Prepared {
  MpQP mp;
  Mat F0;
  Vec G0;
  WorkingSet w0;
  std::string hash;
  bool lp_gradient = false;
};

Prepared prepare(const std::string& path, bool dual) {
  ProblemData pd = load_problem(path);
  std::vector<std::string> diags = validate(pd.mp);
  if (!diags.empty()) {
    std::string msg = "invalid problem:";
    for (const auto& d : diags) msg += " " + d + ";";
    throw std::runtime_error(msg);
  }
  Prepared out;
  out.hash = problem_hash(pd);
  if (auto it = pd.options.find("lp_gradient"); it != pd.options.end())
    out.lp_gradient = it->second == "1" || it->second == "true";
  if (dual) {
    DualProblem d = build_dual(pd.mp);
    out.mp = d.qp;
    out.F0 = Mat::Zero(out.mp.n(), out.mp.p());
    out.G0 = Vec::Zero(out.mp.n());
    for (int i = 0; i < out.mp.m(); ++i) out.w0.append(i);
  } else {
    out.mp = pd.mp;
    out.F0 = pd.F0;
    out.G0 = pd.G0;
    out.w0 = pd.w0;
  }
  return out;
}

std::string ws_string(const WorkingSet& ws) {
  if (ws.size() == 0) return "∅";
  std::string s = "{";
  for (int q = 0; q < ws.size(); ++q) {
    if (q) s += ",";
    s += std::to_string(ws.idx[q] + 1);
  }
  return s + "}";
}

std::string sequence_string(const WorkingSet& w0, const std::vector<int>& changes) {
  WorkingSet ws = w0;
  std::string s = ws_string(ws);
  for (int c : changes) {
    if (c > 0)
      ws.append(c - 1);
    else
      ws.remove_index(-c - 1);
    s += " -> " + ws_string(ws);
  }
  return s;
}

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

// Signed evaluation of every region inequality at theta, scale-normalized for
// the linear rows; vmax < 0 means theta is inside with margin |vmax|.
double region_vmax(const Region& r, const Vec& theta) {
  double vmax = -std::numeric_limits<double>::infinity();
  for (const auto& hp : r.linear) {
    double nc = hp.c.norm();
    if (nc <= 1e-12) continue;
    vmax = std::max(vmax, (hp.c.dot(theta) - hp.d) / nc);
  }
  for (const auto& q : r.quadratic)
    vmax = std::max(vmax, theta.dot(q.Q * theta) + q.R.dot(theta) + q.S);
  return vmax;
}

struct ValidateStats {
  int samples = 0;
  int mismatches = 0;
  int coverage_misses = 0;
  int nmax_sampled = 0;
};

ValidateStats run_validation(const Prepared& pr, const Partition& part,
                             const CertOptions& copts, int nsamples,
                             unsigned seed, bool allow_overlap) {
  auto [lo, hi] = bounding_box(pr.mp.theta0);
  const int p = pr.mp.p();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SolverOptions sopts;
  sopts.eps_dual = copts.eps_dual;
  sopts.eps_sing = copts.eps_sing;
  sopts.lp_gradient_direction = copts.lp_gradient_direction;

  ValidateStats st;
  long long attempts = 0;
  const long long max_attempts = 200ll * nsamples + 1000;
  while (st.samples < nsamples && attempts < max_attempts) {
    ++attempts;
    Vec theta(p);
    for (int i = 0; i < p; ++i) theta(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
    if (!region_contains(pr.mp.theta0, theta)) continue;
    bool near_boundary = false;
    std::vector<int> hits;
    for (size_t r = 0; r < part.regions.size(); ++r) {
      double vmax = region_vmax(part.regions[r].theta, theta);
      if (std::abs(vmax) <= 1e-6) {
        near_boundary = true;
        break;
      }
      if (vmax < 0.0) hits.push_back(static_cast<int>(r));
    }
    if (near_boundary) continue;
    ++st.samples;

    SolveLog log = solve(pr.mp, theta, pr.F0 * theta + pr.G0, pr.w0, sopts);
    st.nmax_sampled = std::max(st.nmax_sampled, log.iterations);
    int want_status = log.status == SolveStatus::unbounded ? 3 : 2;

    if (hits.empty()) {
      ++st.coverage_misses;
      continue;
    }
    if (!allow_overlap && hits.size() != 1) {
      ++st.coverage_misses;
      continue;
    }
    bool matched = false;
    for (int r : hits) {
      const RegionTuple& reg = part.regions[r];
      if (reg.wschanges == log.wschanges && reg.k == log.iterations &&
          static_cast<int>(reg.status) == want_status) {
        matched = true;
        break;
      }
    }
    if (!matched) ++st.mismatches;
  }
  return st;
}

int cmd_certify(const std::string& path, bool dual, bool relax, bool prune,
                double eps_dual, const std::string& out, int workers,
                bool lp_gradient) {
  Prepared pr = prepare(path, dual);
  CertOptions copts;
  copts.eps_dual = eps_dual;
  copts.relax_quadratics = relax;
  copts.prune_infeasible_iterates = prune;
  copts.lp_gradient_direction = lp_gradient || pr.lp_gradient;
  copts.workers = workers;
  auto t0 = std::chrono::steady_clock::now();
  Partition part = certify(pr.mp, pr.w0, pr.F0, pr.G0, copts);
  auto t1 = std::chrono::steady_clock::now();
  double dt = std::chrono::duration<double>(t1 - t0).count();
  part.wall_time = dt;
  part.problem_hash = pr.hash;
  std::ostringstream os;
  os << "dual=" << dual << " relax=" << relax << " prune=" << prune
     << " eps_dual=" << eps_dual
     << " lp_gradient=" << copts.lp_gradient_direction;
  part.options = os.str();
  if (!out.empty()) save_text(out, serialize_partition(part));
  std::printf("N_max=%d N_reg=%d t=%.3fs\n", part.nmax(), part.nreg(), dt);
  return 0;
}

int cmd_solve(const std::string& path, const std::string& theta_str, bool dual,
              bool lp_gradient) {
  Prepared pr = prepare(path, dual);
  std::vector<double> tv = parse_csv_doubles(theta_str);
  if (static_cast<int>(tv.size()) != pr.mp.p())
    throw std::runtime_error("theta has wrong dimension");
  Vec theta = Eigen::Map<Vec>(tv.data(), tv.size());
  SolverOptions sopts;
  sopts.lp_gradient_direction = lp_gradient || pr.lp_gradient;
  SolveLog log = solve(pr.mp, theta, pr.F0 * theta + pr.G0, pr.w0, sopts);
  std::printf("%s\n", sequence_string(pr.w0, log.wschanges).c_str());
  const char* status = log.status == SolveStatus::optimal    ? "optimal"
                       : log.status == SolveStatus::unbounded ? "unbounded"
                                                              : "max_iter";
  std::printf("status=%s k=%d ws=%s\n", status, log.iterations,
              ws_string(log.ws).c_str());
  if (log.status == SolveStatus::optimal) {
    std::printf("x =");
    for (int i = 0; i < log.x.size(); ++i) std::printf(" %.12g", log.x(i));
    std::printf("\nlambda =");
    for (int i = 0; i < log.lam.size(); ++i) std::printf(" %.12g", log.lam(i));
    std::printf("\n");
  }
  return 0;
}

int cmd_validate(const std::string& path, bool dual, int samples, unsigned seed,
                 bool relax, bool prune, double eps_dual, bool lp_gradient) {
  Prepared pr = prepare(path, dual);
  CertOptions copts;
  copts.eps_dual = eps_dual;
  copts.relax_quadratics = relax;
  copts.prune_infeasible_iterates = prune;
  copts.lp_gradient_direction = lp_gradient || pr.lp_gradient;
  Partition part = certify(pr.mp, pr.w0, pr.F0, pr.G0, copts);
  ValidateStats st = run_validation(pr, part, copts, samples, seed, relax);
  std::printf("samples=%d mismatches=%d coverage_misses=%d nmax_sampled=%d nmax_certified=%d\n",
              st.samples, st.mismatches, st.coverage_misses, st.nmax_sampled,
              part.nmax());
  return (st.mismatches == 0 && st.coverage_misses == 0 && st.samples > 0) ? 0 : 1;
}

int cmd_slice(const std::string& path, const std::string& dims_str,
              const std::string& fix_str, int grid, const std::string& out) {
  Partition part = load_partition(path);
  const int p = part.p;
  std::vector<double> dims = parse_csv_doubles(dims_str.empty() ? "1,2" : dims_str);
  if (dims.size() != 2) throw std::runtime_error("--dims needs two indices");
  int di = static_cast<int>(dims[0]) - 1;
  int dj = static_cast<int>(dims[1]) - 1;
  if (di < 0 || dj < 0 || di >= p || dj >= p || di == dj)
    throw std::runtime_error("--dims out of range");
  Vec fix = Vec::Zero(p);
  if (!fix_str.empty()) {
    std::vector<double> fv = parse_csv_doubles(fix_str);
    if (static_cast<int>(fv.size()) != p)
      throw std::runtime_error("--fix has wrong length");
    fix = Eigen::Map<Vec>(fv.data(), fv.size());
  }
  if (grid < 1) throw std::runtime_error("--grid must be >= 1");

  // Slice bounds: union of per-region coordinate ranges on the fixed slice.
  double lo_i = 0, hi_i = 0, lo_j = 0, hi_j = 0;
  bool have = false;
  for (const auto& reg : part.regions) {
    std::vector<HalfPlane> rows;
    for (const auto& hp : reg.theta.linear) {
      Vec cf(2);
      cf << hp.c(di), hp.c(dj);
      double rhs = hp.d;
      for (int q = 0; q < p; ++q)
        if (q != di && q != dj) rhs -= hp.c(q) * fix(q);
      if (cf.norm() > 1e-12) rows.push_back(HalfPlane{cf, rhs, hp.strict});
    }
    Mat A(rows.size(), 2);
    Vec b(rows.size());
    for (size_t q = 0; q < rows.size(); ++q) {
      A.row(q) = rows[q].c.transpose();
      b(q) = rows[q].d;
    }
    bool bounded = true;
    double l0 = 0, h0 = 0, l1 = 0, h1 = 0;
    for (int axis = 0; axis < 2 && bounded; ++axis) {
      Vec e = Vec::Zero(2);
      e(axis) = 1.0;
      LpResult rlo = solve_lp(e, A, b);
      LpResult rhi = solve_lp(-e, A, b);
      if (rlo.status != LpStatus::optimal || rhi.status != LpStatus::optimal) {
        bounded = false;
        break;
      }
      (axis == 0 ? l0 : l1) = rlo.x(axis);
      (axis == 0 ? h0 : h1) = rhi.x(axis);
    }
    if (!bounded) continue;
    if (!have) {
      lo_i = l0;
      hi_i = h0;
      lo_j = l1;
      hi_j = h1;
      have = true;
    } else {
      lo_i = std::min(lo_i, l0);
      hi_i = std::max(hi_i, h0);
      lo_j = std::min(lo_j, l1);
      hi_j = std::max(hi_j, h1);
    }
  }
  if (!have) throw std::runtime_error("no bounded region to slice");

  std::ostringstream os;
  os << "theta_i,theta_j,region_id,k\n";
  for (int a = 0; a < grid; ++a) {
    for (int bcell = 0; bcell < grid; ++bcell) {
      Vec theta = fix;
      theta(di) = lo_i + (a + 0.5) * (hi_i - lo_i) / grid;
      theta(dj) = lo_j + (bcell + 0.5) * (hi_j - lo_j) / grid;
      int id = 0, k = 0;
      for (size_t r = 0; r < part.regions.size(); ++r) {
        if (region_contains(part.regions[r].theta, theta)) {
          id = static_cast<int>(r) + 1;
          k = part.regions[r].k;
          break;  // lowest region id wins on overlaps
        }
      }
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%d,%d\n", theta(di),
                    theta(dj), id, k);
      os << buf;
    }
  }
  if (out.empty())
    std::fputs(os.str().c_str(), stdout);
  else
    save_text(out, os.str());
  return 0;
}

int cmd_report(const std::vector<std::string>& paths) {
  std::printf("%-32s %4s %4s %4s %6s %6s %12s\n", "partition", "p", "n", "m",
              "N_max", "N_reg", "flops_max");
  for (const auto& path : paths) {
    Partition part = load_partition(path);
    long long fmax = 0;
    for (const auto& r : part.regions) fmax = std::max(fmax, r.flops);
    std::printf("%-32s %4d %4d %4d %6d %6d %12lld\n", path.c_str(), part.p,
                part.n, part.m, part.nmax(), part.nreg(), fmax);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"active-set mpQP solver and iteration-complexity certifier"};
  app.require_subcommand(1);

  std::string problem, out, theta_str, dims_str, fix_str, partition;
  std::vector<std::string> partitions;
  bool dual = false, relax = false, prune = false, lp_gradient = false;
  double eps_dual = 0.0;
  int workers = 1, samples = 2000, grid = 100;
  unsigned seed = 42;

  auto* certify_cmd = app.add_subcommand("certify", "partition theta0 by working-set sequence");
  certify_cmd->add_option("problem", problem)->required();
  certify_cmd->add_flag("--dual", dual);
  certify_cmd->add_flag("--relax", relax);
  certify_cmd->add_flag("--prune", prune);
  certify_cmd->add_flag("--lp-gradient", lp_gradient);
  certify_cmd->add_option("--eps-dual", eps_dual);
  certify_cmd->add_option("--out", out);
  certify_cmd->add_option("--workers", workers);

  auto* solve_cmd = app.add_subcommand("solve", "solve at one parameter");
  solve_cmd->add_option("problem", problem)->required();
  solve_cmd->add_option("--theta", theta_str)->required();
  solve_cmd->add_flag("--dual", dual);
  solve_cmd->add_flag("--lp-gradient", lp_gradient);

  auto* validate_cmd = app.add_subcommand("validate", "Monte-Carlo check of the certificate");
  validate_cmd->add_option("problem", problem)->required();
  validate_cmd->add_flag("--dual", dual);
  validate_cmd->add_flag("--relax", relax);
  validate_cmd->add_flag("--prune", prune);
  validate_cmd->add_flag("--lp-gradient", lp_gradient);
  validate_cmd->add_option("--eps-dual", eps_dual);
  validate_cmd->add_option("--samples", samples);
  validate_cmd->add_option("--seed", seed);

  auto* slice_cmd = app.add_subcommand("slice", "CSV raster of a 2D parameter slice");
  slice_cmd->add_option("partition", partition)->required();
  slice_cmd->add_option("--dims", dims_str);
  slice_cmd->add_option("--fix", fix_str);
  slice_cmd->add_option("--grid", grid);
  slice_cmd->add_option("--out", out);

  auto* report_cmd = app.add_subcommand("report", "summary table across partitions");
  report_cmd->add_option("partitions", partitions);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand(certify_cmd))
      return cmd_certify(problem, dual, relax, prune, eps_dual, out, workers,
                         lp_gradient);
    if (app.got_subcommand(solve_cmd))
      return cmd_solve(problem, theta_str, dual, lp_gradient);
    if (app.got_subcommand(validate_cmd))
      return cmd_validate(problem, dual, samples, seed, relax, prune, eps_dual,
                          lp_gradient);
    if (app.got_subcommand(slice_cmd))
      return cmd_slice(partition, dims_str, fix_str, grid, out);
    if (app.got_subcommand(report_cmd)) return cmd_report(partitions);
  } catch (const CertError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

}  // namespace ascert
