#pragma once

#include "ascert/frontends.hpp"
#include "ascert/types.hpp"

namespace ascert {

struct SolverOptions {
  double eps_dual = 0.0;
  double eps_primal = 1e-9;
  double eps_sing = 1e-9;
  int max_iter = 0;  // 0 -> 10 * (m + n)
  bool lp_gradient_direction = false;
  FlopMethod flop_method = FlopMethod::nullspace;
};

enum class SolveStatus { optimal, unbounded, max_iter };

struct SolveLog {
  Vec x;
  Vec lam;                     // ordered like ws.idx
  WorkingSet ws;
  SolveStatus status = SolveStatus::max_iter;
  int iterations = 0;
  std::vector<int> wschanges;  // +j / -j, 1-based
  std::vector<double> alphas;
  long long flops = 0;
  std::vector<Vec> iterates;   // x after each pass (trace for diagnostics)
};

// Primal active-set method with the singular (semi-definite / LP) extension.
// Throws std::invalid_argument on infeasible x0 or inconsistent w0.
SolveLog solve(const MpQP& mp, const Vec& theta, const Vec& x0,
               const WorkingSet& w0, const SolverOptions& opts = {});

double objective(const MpQP& mp, const Vec& theta, const Vec& x);

}  // namespace ascert
