#ifndef ACME_SIMPLEX_HPP
#define ACME_SIMPLEX_HPP

#include <functional>
#include <vector>

// Derivative-free Nelder-Mead descent used by all fitting routines.

namespace acme {

struct SimplexOptions {
  double diameter_tol = 1e-8;
  double spread_tol = 1e-10;
  long eval_budget = 100'000;
  int restarts = 2;  // restarts from a perturbed optimum after convergence
};

struct SimplexResult {
  std::vector<double> x;
  double fmin = 0.0;
  long n_evals = 0;
  bool converged = false;
};

/// Minimize objective(x) from `start`, with `scale` setting the initial
/// simplex edge lengths per coordinate.  Converged when the simplex diameter
/// drops below diameter_tol and the objective spread below spread_tol.
SimplexResult simplex_minimize(const std::function<double(const std::vector<double>&)>& objective,
                               std::vector<double> start, std::vector<double> scale,
                               const SimplexOptions& opts = {});

}  // namespace acme

#endif
