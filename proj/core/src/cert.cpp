#include "ascert/cert.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <thread>

namespace ascert {

namespace {

Mat active_rows(const MpQP& mp, const WorkingSet& ws) {
  Mat Ak(ws.size(), mp.n());
  for (int q = 0; q < ws.size(); ++q) Ak.row(q) = mp.A.row(ws.idx[q]);
  return Ak;
}

Mat ws_rows(const Mat& M, const WorkingSet& ws) {
  Mat out(ws.size(), M.cols());
  for (int q = 0; q < ws.size(); ++q) out.row(q) = M.row(ws.idx[q]);
  return out;
}

Vec ws_entries(const Vec& v, const WorkingSet& ws) {
  Vec out(ws.size());
  for (int q = 0; q < ws.size(); ++q) out(q) = v(ws.idx[q]);
  return out;
}

}  // namespace

std::shared_ptr<const KktFactors> CertContext::factors(const WorkingSet& ws) const {
  std::vector<int> key = ws.idx;
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto kf = std::make_shared<KktFactors>(
      factorize(mp.H, active_rows(mp, ws), opts.eps_sing));
  std::lock_guard<std::mutex> lock(cache_mu_);
  auto [it, inserted] = cache_.emplace(std::move(key), std::move(kf));
  return it->second;
}

std::unique_ptr<CertContext> make_context(const MpQP& mp, const WorkingSet& w0,
                                          const Mat& F0, const Vec& G0,
                                          const CertOptions& opts) {
  auto ctx = std::make_unique<CertContext>();
  ctx->mp = mp;
  ctx->F0 = F0;
  ctx->G0 = G0;
  ctx->opts = opts;

  RegionOracleOptions ropts = opts.oracle;
  ropts.eps_region = opts.eps_region;
  FeasibilityVerdict v = polyhedron_feasible(mp.theta0, ropts);
  if (v.verdict == Verdict::empty) throw CertError("theta0 is empty");

  // x0(theta) feasible over theta0: maximize each violation row via an LP.
  Mat viol_c = mp.A * F0 - mp.W;
  Vec viol_d = mp.A * G0 - mp.b;
  std::vector<HalfPlane> rows;
  for (const auto& hp : mp.theta0.linear)
    if (hp.c.norm() > 1e-12) rows.push_back(normalized(hp));
  Mat Ath(rows.size(), mp.p());
  Vec bth(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    Ath.row(i) = rows[i].c.transpose();
    bth(i) = rows[i].d;
  }
  for (int i = 0; i < mp.m(); ++i) {
    Vec c = viol_c.row(i).transpose();
    if (c.norm() <= 1e-12) {
      if (viol_d(i) > 1e-7) throw CertError("initial iterate infeasible on theta0");
      continue;
    }
    LpResult lp = solve_lp(-c, Ath, bth);
    if (lp.status == LpStatus::unbounded)
      throw CertError("theta0 unbounded: cannot verify initial feasibility");
    if (lp.status == LpStatus::optimal && -lp.value + viol_d(i) > 1e-7)
      throw CertError("initial iterate infeasible on theta0");
  }

  KktFactors kf0 = factorize(mp.H, active_rows(mp, w0), opts.eps_sing);
  if (!kf0.singular) {
    EqpSolution e0 = parametric_eqp(mp, w0, kf0);
    ctx->Fstar0 = e0.Fstar;
    ctx->Gstar0 = e0.Gstar;
  } else {
    // Singular start (LP / PSD): no affine CSP anchors; Case 2 is bypassed by
    // the singular mode, so the anchors default to the start itself.
    ctx->Fstar0 = F0;
    ctx->Gstar0 = G0;
  }
  return ctx;
}

std::vector<RegionTuple> mode_a(const RegionTuple& t, const CertContext& ctx) {
  const MpQP& mp = ctx.mp;
  const double eps_d = ctx.opts.eps_dual;
  auto kf = ctx.factors(t.ws);
  // Dual maps of the current iterate: A_k' lam = -(H x + f(theta)) has the
  // unique solution lam = -Y'(H x + f(theta)) since A_k has full row rank.
  Mat Flam = -kf->Y.transpose() * (mp.H * t.F + mp.f_theta);
  Vec Glam = -kf->Y.transpose() * (mp.H * t.G + mp.f);

  std::vector<RegionTuple> out;
  for (int pos = 0; pos < t.ws.size(); ++pos) {
    const int j = t.ws.idx[pos];
    RegionTuple ch = t;
    ch.theta.linear.push_back(
        HalfPlane{Flam.row(pos).transpose(), -eps_d - Glam(pos), true});
    for (int q = 0; q < t.ws.size(); ++q) {
      const int i = t.ws.idx[q];
      if (i == j) continue;
      ch.theta.linear.push_back(
          HalfPlane{(Flam.row(pos) - Flam.row(q)).transpose(),
                    Glam(q) - Glam(pos), i < j});
    }
    ch.ws.remove_index(j);
    ch.status = TupleStatus::in_progress;
    ch.k = t.k + 1;
    ch.k_counted = true;
    ch.nhat = Vec(-mp.A.row(j).transpose());
    ch.case2 = false;
    ch.wschanges.push_back(-(j + 1));
    ch.parent_ws = t.ws.idx;
    ch.removed_pos = pos;
    out.push_back(std::move(ch));
  }

  RegionTuple opt = t;
  for (int pos = 0; pos < t.ws.size(); ++pos)
    opt.theta.linear.push_back(
        HalfPlane{-Flam.row(pos).transpose(), Glam(pos) + eps_d, false});
  opt.status = TupleStatus::optimal;
  out.push_back(std::move(opt));
  return out;
}

namespace {

int next_k(const RegionTuple& t) { return t.k_counted ? t.k : t.k + 1; }

RegionTuple csp_child(const RegionTuple& t, const Mat& Fss, const Vec& Gss,
                      const Mat& Fstar, const Vec& Gstar,
                      const std::vector<int>& comp, int knew, long long flops) {
  RegionTuple ch = t;
  for (int i : comp)
    ch.theta.linear.push_back(
        HalfPlane{-Fss.row(i).transpose(), Gss(i), false});
  ch.F = Fstar;
  ch.G = Gstar;
  ch.status = TupleStatus::csp;
  ch.k = knew;
  ch.k_counted = false;
  ch.flops = flops;
  return ch;
}

}  // namespace

std::vector<RegionTuple> mode_b_case1(const RegionTuple& t, const CertContext& ctx) {
  const MpQP& mp = ctx.mp;
  auto kf = ctx.factors(t.ws);
  EqpSolution eqp = parametric_eqp(mp, t.ws, *kf);
  const int knew = next_k(t);
  const long long flops =
      t.flops + flop_model(t.ws.size(), mp.n(), ctx.opts.flop_method);
  std::vector<int> comp = t.ws.complement(mp.m());

  Mat Fss = mp.W - mp.A * eqp.Fstar;
  Vec Gss = mp.b - mp.A * eqp.Gstar;
  Vec hp = hstar_apply(*kf, *t.nhat);
  Vec Gsig = mp.A * hp;
  Mat Fs = mp.W - mp.A * t.F;
  Vec Gs = mp.b - mp.A * t.G;

  std::vector<int> cand;
  for (int j : comp)
    if (Gsig(j) > 1e-12) cand.push_back(j);

  std::vector<RegionTuple> out;
  for (int j : cand) {
    RegionTuple ch = t;
    ch.theta.linear.push_back(HalfPlane{Fss.row(j).transpose(), -Gss(j), true});
    for (int i : cand) {
      if (i == j) continue;
      Vec K = (Gsig(i) * Fs.row(j) - Gsig(j) * Fs.row(i)).transpose();
      double L = -Gsig(i) * Gs(j) + Gsig(j) * Gs(i);
      ch.theta.linear.push_back(HalfPlane{K, L, i < j});
    }
    ch.F = t.F + hp * ((mp.W.row(j) - mp.A.row(j) * t.F) / Gsig(j));
    ch.G = t.G + hp * ((mp.b(j) - mp.A.row(j).dot(t.G)) / Gsig(j));
    ch.ws.append(j);
    ch.status = TupleStatus::in_progress;
    ch.k = knew;
    ch.k_counted = false;
    ch.wschanges.push_back(j + 1);
    ch.flops = flops;
    out.push_back(std::move(ch));
  }
  out.push_back(csp_child(t, Fss, Gss, eqp.Fstar, eqp.Gstar, comp, knew, flops));
  return out;
}

std::vector<RegionTuple> mode_b_case2(const RegionTuple& t, const CertContext& ctx) {
  const MpQP& mp = ctx.mp;
  auto kf = ctx.factors(t.ws);
  EqpSolution eqp = parametric_eqp(mp, t.ws, *kf);
  const int knew = next_k(t);
  const long long flops =
      t.flops + flop_model(t.ws.size(), mp.n(), ctx.opts.flop_method);
  std::vector<int> comp = t.ws.complement(mp.m());

  Mat Fss = mp.W - mp.A * eqp.Fstar;
  Vec Gss = mp.b - mp.A * eqp.Gstar;

  // Surrogate step-length data from the anchors x0, x*_0.
  Mat HstH = hstar_apply(*kf, mp.H);
  Mat xF = HstH * ctx.F0;
  Vec xG = HstH * ctx.G0;
  if (t.ws.size() > 0) {
    xF += kf->T * ws_rows(mp.W, t.ws);
    xG += kf->T * ws_entries(mp.b, t.ws);
  }
  Mat Fts = mp.W - mp.A * xF;
  Vec Gts = mp.b - mp.A * xG;
  Mat Ftsig = mp.A * (HstH * (ctx.Fstar0 - ctx.F0));
  Vec Gtsig = mp.A * (HstH * (ctx.Gstar0 - ctx.G0));

  Region base_lin{t.theta.linear, {}};

  std::vector<RegionTuple> out;
  for (int j : comp) {
    RegionTuple ch = t;
    ch.theta.linear.push_back(HalfPlane{Fss.row(j).transpose(), -Gss(j), true});
    for (int i : comp) {
      if (i == j) continue;
      Mat Q = Ftsig.row(i).transpose() * Fts.row(j) -
              Ftsig.row(j).transpose() * Fts.row(i);
      Q = (0.5 * (Q + Q.transpose())).eval();
      Vec R = (Gts(j) * Ftsig.row(i) + Gtsig(i) * Fts.row(j) -
               Gts(i) * Ftsig.row(j) - Gtsig(j) * Fts.row(i))
                  .transpose();
      double S = Gts(j) * Gtsig(i) - Gts(i) * Gtsig(j);
      if (Q.cwiseAbs().maxCoeff() < 1e-12) {
        ch.theta.linear.push_back(HalfPlane{R, -S, i < j});
      } else if (ctx.opts.relax_quadratics) {
        ch.theta.linear.push_back(relax_quadratic(QuadIneq{Q, R, S, i < j}, base_lin));
      } else {
        ch.theta.quadratic.push_back(QuadIneq{Q, R, S, i < j});
      }
    }
    ch.ws.append(j);
    ch.status = TupleStatus::in_progress;
    ch.k = knew;
    ch.k_counted = false;
    ch.case2 = true;
    ch.wschanges.push_back(j + 1);
    ch.flops = flops;
    out.push_back(std::move(ch));
  }
  out.push_back(csp_child(t, Fss, Gss, eqp.Fstar, eqp.Gstar, comp, knew, flops));
  return out;
}

std::vector<RegionTuple> mode_b_singular(const RegionTuple& t, const CertContext& ctx) {
  const MpQP& mp = ctx.mp;
  const int knew = next_k(t);
  const long long flops =
      t.flops + flop_model(t.ws.size(), mp.n(), ctx.opts.flop_method);
  std::vector<int> comp = t.ws.complement(mp.m());

  Vec d;
  std::optional<Vec> child_nhat = t.nhat;
  if (ctx.opts.lp_gradient_direction) {
    if (mp.f_theta.cwiseAbs().maxCoeff() > 1e-12)
      throw CertError(
          "gradient-direction certification requires parameter-free cost");
    auto kf = ctx.factors(t.ws);
    d = -kf->Z * (kf->Z.transpose() * mp.f);
    if (d.norm() <= 1e-10 * (1.0 + mp.f.norm())) {
      // Projected gradient vanishes for every theta: CSP with current maps.
      RegionTuple ch = t;
      ch.status = TupleStatus::csp;
      ch.k = knew;
      ch.k_counted = false;
      ch.flops = flops;
      return {std::move(ch)};
    }
    if (!child_nhat) child_nhat = Vec(mp.H * d);
  } else {
    if (t.parent_ws.empty())
      throw CertError("no parent factorization for singular step");
    WorkingSet pws;
    pws.idx = t.parent_ws;
    auto pf = ctx.factors(pws);
    d = -singular_direction(*pf, t.removed_pos);
  }

  Vec sigma = mp.A * d;
  for (int j : t.ws.idx) sigma(j) = 0.0;
  std::vector<int> cand;
  for (int i : comp)
    if (sigma(i) > 1e-12) cand.push_back(i);

  std::vector<RegionTuple> out;
  if (cand.empty()) {
    RegionTuple ch = t;
    ch.status = TupleStatus::unbounded;
    ch.k = knew;
    ch.k_counted = false;
    ch.flops = flops;
    return {std::move(ch)};
  }

  Mat Fs = mp.W - mp.A * t.F;
  Vec Gs = mp.b - mp.A * t.G;
  for (int j : cand) {
    RegionTuple ch = t;
    for (int i : cand) {
      if (i == j) continue;
      Vec K = (sigma(i) * Fs.row(j) - sigma(j) * Fs.row(i)).transpose();
      double L = -sigma(i) * Gs(j) + sigma(j) * Gs(i);
      ch.theta.linear.push_back(HalfPlane{K, L, i < j});
    }
    ch.F = t.F + d * ((mp.W.row(j) - mp.A.row(j) * t.F) / sigma(j));
    ch.G = t.G + d * ((mp.b(j) - mp.A.row(j).dot(t.G)) / sigma(j));
    ch.ws.append(j);
    ch.status = TupleStatus::in_progress;
    ch.k = knew;
    ch.k_counted = false;
    ch.nhat = child_nhat;
    ch.case2 = false;
    ch.wschanges.push_back(j + 1);
    ch.flops = flops;
    out.push_back(std::move(ch));
  }
  return out;
}

HalfPlane relax_quadratic(const QuadIneq& q, const Region& base) {
  double L;
  try {
    L = min_quad_lower_bound(q.Q, base);
  } catch (const std::invalid_argument&) {
    throw CertError("cannot bound quadratic term over unbounded region");
  }
  return HalfPlane{q.R, -q.S - L, q.strict};
}

RegionTuple prune_infeasible_iterates(const RegionTuple& t, const CertContext& ctx) {
  const MpQP& mp = ctx.mp;
  RegionTuple out = t;
  Mat C = mp.A * t.F - mp.W;
  Vec d = mp.b - mp.A * t.G;
  // Working-set rows hold with equality identically in theta; adding them
  // would only inject roundoff-level zero rows, so keep the complement only.
  for (int i : t.ws.complement(mp.m()))
    out.theta.linear.push_back(HalfPlane{C.row(i).transpose(), d(i), false});
  return out;
}

namespace {

std::vector<RegionTuple> expand(const RegionTuple& t, const CertContext& ctx,
                                int max_k) {
  std::vector<RegionTuple> raw;
  if (t.status == TupleStatus::csp) {
    raw = mode_a(t, ctx);
  } else {
    auto kf = ctx.factors(t.ws);
    if (kf->singular)
      raw = mode_b_singular(t, ctx);
    else if (t.case2)
      raw = mode_b_case2(t, ctx);
    else
      raw = mode_b_case1(t, ctx);
  }

  RegionOracleOptions ropts = ctx.opts.oracle;
  ropts.eps_region = ctx.opts.eps_region;

  std::vector<RegionTuple> kept;
  for (auto& ch : raw) {
    if (ch.k > max_k) throw CertError("iteration cap max_k exceeded");
    if (ctx.opts.prune_infeasible_iterates && ch.status == TupleStatus::csp)
      ch = prune_infeasible_iterates(ch, ctx);
    FeasibilityVerdict v = ch.theta.quadratic.empty()
                               ? polyhedron_feasible(ch.theta, ropts)
                               : quad_region_feasible(ch.theta, ropts);
    if (v.verdict == Verdict::empty) continue;
    kept.push_back(std::move(ch));
  }
  return kept;
}

std::string region_key(const Region& r) {
  std::string s;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g,", v);
    s += buf;
  };
  for (const auto& hp : r.linear) {
    s += "l";
    for (int i = 0; i < hp.c.size(); ++i) num(hp.c(i));
    num(hp.d);
    s += hp.strict ? "s;" : "n;";
  }
  for (const auto& q : r.quadratic) {
    s += "q";
    for (int i = 0; i < q.Q.rows(); ++i)
      for (int j = 0; j < q.Q.cols(); ++j) num(q.Q(i, j));
    for (int i = 0; i < q.R.size(); ++i) num(q.R(i));
    num(q.S);
    s += q.strict ? "s;" : "n;";
  }
  return s;
}

bool canonical_less(const RegionTuple& a, const RegionTuple& b) {
  if (a.wschanges != b.wschanges)
    return std::lexicographical_compare(a.wschanges.begin(), a.wschanges.end(),
                                        b.wschanges.begin(), b.wschanges.end());
  if (a.status != b.status) return static_cast<int>(a.status) < static_cast<int>(b.status);
  if (a.k != b.k) return a.k < b.k;
  return region_key(a.theta) < region_key(b.theta);
}

}  // namespace

Partition certify(const MpQP& mp, const WorkingSet& w0, const Mat& F0,
                  const Vec& G0, const CertOptions& opts) {
  auto ctx = make_context(mp, w0, F0, G0, opts);
  const int max_k = opts.max_k > 0 ? opts.max_k : 4 * mp.m();

  RegionTuple root;
  root.theta = mp.theta0;
  root.ws = w0;
  root.F = F0;
  root.G = G0;
  root.status = TupleStatus::in_progress;

  std::vector<RegionTuple> finals;
  std::vector<RegionTuple> stack;
  stack.push_back(std::move(root));

  const int nworkers = std::max(1, opts.workers);
  if (nworkers == 1) {
    while (!stack.empty()) {
      RegionTuple t = std::move(stack.back());
      stack.pop_back();
      for (auto& ch : expand(t, *ctx, max_k)) {
        if (ch.status == TupleStatus::optimal || ch.status == TupleStatus::unbounded)
          finals.push_back(std::move(ch));
        else
          stack.push_back(std::move(ch));
      }
    }
  } else {
    std::mutex mu;
    std::condition_variable cv;
    int busy = 0;
    std::exception_ptr error;
    auto work = [&]() {
      std::unique_lock<std::mutex> lock(mu);
      while (true) {
        cv.wait(lock, [&] { return !stack.empty() || busy == 0 || error; });
        if (error || (stack.empty() && busy == 0)) return;
        if (stack.empty()) continue;
        RegionTuple t = std::move(stack.back());
        stack.pop_back();
        ++busy;
        lock.unlock();
        std::vector<RegionTuple> children;
        std::exception_ptr local;
        try {
          children = expand(t, *ctx, max_k);
        } catch (...) {
          local = std::current_exception();
        }
        lock.lock();
        if (local && !error) error = local;
        for (auto& ch : children) {
          if (ch.status == TupleStatus::optimal || ch.status == TupleStatus::unbounded)
            finals.push_back(std::move(ch));
          else
            stack.push_back(std::move(ch));
        }
        --busy;
        cv.notify_all();
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < nworkers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  std::sort(finals.begin(), finals.end(), canonical_less);
  Partition part;
  part.regions = std::move(finals);
  part.n = mp.n();
  part.m = mp.m();
  part.p = mp.p();
  return part;
}

}  // namespace ascert
