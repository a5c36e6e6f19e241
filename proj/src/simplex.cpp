#include "acme/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace acme {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

double diameter(const std::vector<Vertex>& v) {
  double d = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    for (std::size_t j = 0; j < v[i].x.size(); ++j)
      d = std::max(d, std::fabs(v[i].x[j] - v[0].x[j]));
  return d;
}

}  // namespace

SimplexResult simplex_minimize(const std::function<double(const std::vector<double>&)>& objective,
                               std::vector<double> start, std::vector<double> scale,
                               const SimplexOptions& opts) {
  const std::size_t dim = start.size();
  if (dim == 0) throw std::invalid_argument("simplex_minimize: empty start point");
  if (scale.size() != dim) throw std::invalid_argument("simplex_minimize: scale size mismatch");

  long evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    double f = objective(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::max();
  };

  if (!std::isfinite(objective(start)))
    throw std::invalid_argument("simplex_minimize: objective not finite at start");

  auto run = [&](std::vector<double> origin) {
    std::vector<Vertex> v(dim + 1);
    v[0] = {origin, eval(origin)};
    for (std::size_t i = 0; i < dim; ++i) {
      auto x = origin;
      x[i] += scale[i];
      v[i + 1] = {x, eval(x)};
    }

    while (evals < opts.eval_budget) {
      std::sort(v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      if (diameter(v) < opts.diameter_tol && v.back().f - v.front().f < opts.spread_tol) break;

      std::vector<double> centroid(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t k = 0; k < dim; ++k) centroid[k] += v[i].x[k];
      }
      for (auto& c : centroid) c /= static_cast<double>(dim);

      auto blend = [&](double t) {
        std::vector<double> x(dim);
        for (std::size_t k = 0; k < dim; ++k) x[k] = centroid[k] + t * (v[dim].x[k] - centroid[k]);
        return x;
      };

      auto xr = blend(-1.0);  // reflection
      double fr = eval(xr);
      if (fr < v[0].f) {
        auto xe = blend(-2.0);  // expansion
        double fe = eval(xe);
        v[dim] = (fe < fr) ? Vertex{xe, fe} : Vertex{xr, fr};
      } else if (fr < v[dim - 1].f) {
        v[dim] = {xr, fr};
      } else {
        auto xc = blend(fr < v[dim].f ? -0.5 : 0.5);  // contraction
        double fc = eval(xc);
        if (fc < std::min(fr, v[dim].f)) {
          v[dim] = {xc, fc};
        } else {
          for (std::size_t i = 1; i <= dim; ++i) {  // shrink toward the best
            for (std::size_t k = 0; k < dim; ++k)
              v[i].x[k] = v[0].x[k] + 0.5 * (v[i].x[k] - v[0].x[k]);
            v[i].f = eval(v[i].x);
          }
        }
      }
    }
    std::sort(v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    return v[0];
  };

  Vertex best = run(start);
  for (int r = 0; r < opts.restarts && evals < opts.eval_budget; ++r) {
    auto perturbed = best.x;
    for (std::size_t i = 0; i < dim; ++i)
      perturbed[i] += scale[i] * ((r % 2 == 0) ? 0.1 : -0.1);
    Vertex cand = run(perturbed);
    if (cand.f < best.f) best = cand;
  }

  SimplexResult res;
  res.x = best.x;
  res.fmin = best.f;
  res.n_evals = evals;
  res.converged = evals < opts.eval_budget;
  return res;
}

}  // namespace acme
