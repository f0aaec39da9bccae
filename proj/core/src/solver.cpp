#include "ascert/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ascert/kkt.hpp"

namespace ascert {

double objective(const MpQP& mp, const Vec& theta, const Vec& x) {
  return 0.5 * x.dot(mp.H * x) + (mp.f + mp.f_theta * theta).dot(x);
}

namespace {

Mat active_rows(const MpQP& mp, const WorkingSet& ws) {
  Mat Ak(ws.size(), mp.n());
  for (int q = 0; q < ws.size(); ++q) Ak.row(q) = mp.A.row(ws.idx[q]);
  return Ak;
}

}  // namespace

SolveLog solve(const MpQP& mp, const Vec& theta, const Vec& x0,
               const WorkingSet& w0, const SolverOptions& opts) {
  const int n = mp.n(), m = mp.m();
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * (m + n);
  const Vec ftheta = mp.f + mp.f_theta * theta;

  SolveLog log;
  log.x = x0;
  log.ws = w0;
  Vec s = mp.b + mp.W * theta - mp.A * x0;

  const double tol_feas =
      std::max(opts.eps_primal, 1e-9) * (1.0 + s.cwiseAbs().maxCoeff() + x0.cwiseAbs().maxCoeff());
  if (s.minCoeff() < -tol_feas) throw std::invalid_argument("infeasible x0");
  for (int j : log.ws.idx)
    if (std::abs(s(j)) > tol_feas)
      throw std::invalid_argument("inconsistent w0: constraint not active at x0");

  // Context for the singular direction: the working set right before the
  // latest removal and the removed position within it.
  WorkingSet parent_ws;
  int removed_pos = -1;

  while (log.iterations < max_iter) {
    ++log.iterations;
    log.flops += flop_model(log.ws.size(), n, opts.flop_method);
    Mat Ak = active_rows(mp, log.ws);
    KktFactors kf = factorize(mp.H, Ak, opts.eps_sing);
    std::vector<int> comp = log.ws.complement(m);

    if (!kf.singular) {
      Vec g = mp.H * log.x + ftheta;
      Vec pvec = -hstar_apply(kf, g);
      Vec xstar = log.x + pvec;
      Vec lam = log.ws.size() > 0
                    ? Vec(-kf.Y.transpose() * (mp.H * xstar + ftheta))
                    : Vec::Zero(0);
      Vec sigma = mp.A * pvec;
      for (int j : log.ws.idx) sigma(j) = 0.0;
      Vec sstar = s - sigma;

      bool blocked = false;
      for (int i : comp)
        if (sstar(i) < -opts.eps_primal) blocked = true;

      if (!blocked) {
        bool dual_ok = true;
        for (int q = 0; q < log.ws.size(); ++q)
          if (lam(q) < -opts.eps_dual) dual_ok = false;
        if (dual_ok) {
          log.x = xstar;
          log.lam = lam;
          log.status = SolveStatus::optimal;
          log.iterates.push_back(log.x);
          return log;
        }
        int pos = 0;
        for (int q = 1; q < log.ws.size(); ++q)
          if (lam(q) < lam(pos) ||
              (lam(q) == lam(pos) && log.ws.idx[q] < log.ws.idx[pos]))
            pos = q;
        int l = log.ws.idx[pos];
        parent_ws = log.ws;
        removed_pos = pos;
        log.wschanges.push_back(-(l + 1));
        log.alphas.push_back(1.0);
        log.ws.remove_index(l);
        log.x = xstar;
        s = sstar;
      } else {
        int j = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i : comp) {
          if (sstar(i) >= -opts.eps_primal) continue;
          double a = s(i) / sigma(i);
          if (a < best) {
            best = a;
            j = i;
          }
        }
        double alpha = std::min(std::max(best, 0.0), 1.0);
        log.wschanges.push_back(j + 1);
        log.alphas.push_back(alpha);
        log.ws.append(j);
        log.x += alpha * pvec;
        s -= alpha * sigma;
      }
    } else {
      // Singular reduced Hessian: ray search along a parameter-free direction.
      Vec d;
      if (opts.lp_gradient_direction) {
        d = -kf.Z * (kf.Z.transpose() * ftheta);
        if (d.norm() <= 1e-10 * (1.0 + ftheta.norm())) {
          // Projected gradient vanished: constrained stationary point.
          Vec lam = log.ws.size() > 0
                        ? Vec(-kf.Y.transpose() * (mp.H * log.x + ftheta))
                        : Vec::Zero(0);
          bool dual_ok = true;
          for (int q = 0; q < log.ws.size(); ++q)
            if (lam(q) < -opts.eps_dual) dual_ok = false;
          if (dual_ok) {
            log.lam = lam;
            log.status = SolveStatus::optimal;
            log.iterates.push_back(log.x);
            return log;
          }
          int pos = 0;
          for (int q = 1; q < log.ws.size(); ++q)
            if (lam(q) < lam(pos) ||
                (lam(q) == lam(pos) && log.ws.idx[q] < log.ws.idx[pos]))
              pos = q;
          int l = log.ws.idx[pos];
          parent_ws = log.ws;
          removed_pos = pos;
          log.wschanges.push_back(-(l + 1));
          log.alphas.push_back(0.0);
          log.ws.remove_index(l);
          log.iterates.push_back(log.x);
          continue;
        }
      } else {
        if (removed_pos < 0) throw std::invalid_argument("no parent factorization");
        KktFactors pf = factorize(mp.H, active_rows(mp, parent_ws), opts.eps_sing);
        d = -singular_direction(pf, removed_pos);
      }
      Vec sigma = mp.A * d;
      for (int j : log.ws.idx) sigma(j) = 0.0;
      int j = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i : comp) {
        if (sigma(i) <= 1e-12) continue;
        double a = s(i) / sigma(i);
        if (a < best) {
          best = a;
          j = i;
        }
      }
      if (j < 0) {
        log.status = SolveStatus::unbounded;
        log.iterates.push_back(log.x);
        return log;
      }
      log.wschanges.push_back(j + 1);
      log.alphas.push_back(best);
      log.ws.append(j);
      log.x += best * d;
      s -= best * sigma;
    }
    log.iterates.push_back(log.x);
  }
  log.status = SolveStatus::max_iter;
  return log;
}

}  // namespace ascert
