// Search over Hamiltonians for the smallest combined calibration +
// persistence error of a fixed measurement template.
#pragma once

#include "measlab/linalg.hpp"
#include "measlab/metrics.hpp"
#include "measlab/model.hpp"
#include "measlab/random.hpp"

#include <cstdint>
#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace measlab {

/// Real coordinates of a dim x dim Hermitian matrix: the dim diagonal entries,
/// then (re, im) of each strictly upper entry in row-major order.
class HamiltonianParameterization {
 public:
  explicit HamiltonianParameterization(Eigen::Index dim) : dim_(dim) {
    detail::require(dim > 0 && dim <= kMaxDim, "HamiltonianParameterization: invalid dimension");
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return static_cast<std::size_t>(dim_ * dim_); }

  HermitianOperator decode(std::span<const double> params) const {
    detail::require(params.size() == size(), "HamiltonianParameterization: parameter count mismatch");
    ComplexMatrix m(dim_, dim_);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < dim_; ++i) m(i, i) = params[k++];
    for (Eigen::Index i = 0; i < dim_; ++i) {
      for (Eigen::Index j = i + 1; j < dim_; ++j) {
        const Complex z(params[k], params[k + 1]);
        k += 2;
        m(i, j) = z;
        m(j, i) = std::conj(z);
      }
    }
    return HermitianOperator(std::move(m));
  }

  std::vector<double> encode(const HermitianOperator& h) const {
    detail::require(h.dim() == dim_, "HamiltonianParameterization: dimension mismatch");
    std::vector<double> out;
    out.reserve(size());
    for (Eigen::Index i = 0; i < dim_; ++i) out.push_back(h.matrix()(i, i).real());
    for (Eigen::Index i = 0; i < dim_; ++i) {
      for (Eigen::Index j = i + 1; j < dim_; ++j) {
        out.push_back(h.matrix()(i, j).real());
        out.push_back(h.matrix()(i, j).imag());
      }
    }
    return out;
  }

 private:
  Eigen::Index dim_;
};

struct ObjectiveWeights {
  double measurement = 1.0;
  double preparation = 1.0;
  double persistence = 1.0;
};

/// Weighted max_lambda measurement + preparation + max_lambda persistence
/// of the template with its Hamiltonian replaced by h.
inline double objective(const MeasurementModel& tmpl, const HermitianOperator& h,
                        Eigen::Index grid = kDefaultGrid, const ObjectiveWeights& w = {}) {
  detail::require(h.dim() == tmpl.composite_dim(), "objective: Hamiltonian dimension mismatch");
  const ErrorReport r = error_report(tmpl.with_hamiltonian(h), grid);
  return w.measurement * r.max_measurement() + w.preparation * r.preparation +
         w.persistence * r.max_persistence();
}

enum class SearchMethod { NelderMead, FdGradient };

inline const char* to_string(SearchMethod m) {
  return m == SearchMethod::NelderMead ? "nelder_mead" : "fd_gradient";
}

struct OptimizerOptions {
  /// Objective evaluations per restart.
  std::size_t budget = 20000;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  SearchMethod method = SearchMethod::NelderMead;
  Eigen::Index grid = kDefaultGrid;
  ObjectiveWeights weights{};
  /// Standard deviation of the random starting parameters.
  double initial_scale = 1.0;
  /// Edge length of the initial Nelder-Mead simplex.
  double simplex_step = 0.5;
};

struct HistoryPoint {
  std::size_t evaluation;
  double objective;
};

struct OptimizationResult {
  std::vector<double> best_params;
  double best_objective = std::numeric_limits<double>::infinity();
  /// Running minimum, one entry per improvement, indexed by global evaluation count.
  std::vector<HistoryPoint> history;
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
  std::size_t evaluations = 0;
};

namespace detail {

using Point = std::vector<double>;

/// Objective wrapper that enforces the evaluation budget and records the
/// global running minimum.
class BudgetedObjective {
 public:
  BudgetedObjective(std::function<double(const Point&)> f, std::size_t budget, OptimizationResult& result)
      : f_(std::move(f)), budget_(budget), result_(result) {}

  bool exhausted() const { return used_ >= budget_; }
  std::size_t remaining() const { return budget_ - used_; }

  double operator()(const Point& x) {
    ++used_;
    ++result_.evaluations;
    const double v = f_(x);
    if (v < result_.best_objective) {
      result_.best_objective = v;
      result_.best_params = x;
      result_.history.push_back({result_.evaluations, v});
    }
    return v;
  }

 private:
  std::function<double(const Point&)> f_;
  std::size_t budget_;
  std::size_t used_ = 0;
  OptimizationResult& result_;
};

/// Nelder-Mead with dimension-adaptive coefficients (Gao & Han).
inline void nelder_mead(BudgetedObjective& f, Point x0, double step) {
  const std::size_t n = x0.size();
  if (f.exhausted()) return;
  const double nd = static_cast<double>(n);
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / nd;
  const double contract = 0.75 - 1.0 / (2.0 * nd);
  const double shrink = 1.0 - 1.0 / nd;

  std::vector<Point> simplex{x0};
  std::vector<double> values{f(x0)};
  for (std::size_t i = 0; i < n && !f.exhausted(); ++i) {
    Point x = x0;
    x[i] += step;
    values.push_back(f(x));
    simplex.push_back(std::move(x));
  }
  if (simplex.size() < n + 1) return;

  std::vector<std::size_t> order(n + 1);
  auto combine = [&](const Point& a, const Point& b, double t) {
    Point out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + t * (b[k] - a[k]);
    return out;
  };

  while (!f.exhausted()) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (values[worst] - values[best] <= 1e-14 * (1.0 + std::abs(values[best]))) {
      double size = 0.0;
      for (const auto& p : simplex) {
        for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::abs(p[k] - simplex[best][k]));
      }
      if (size <= 1e-10) return;
    }

    Point centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / nd;
    }

    const Point xr = combine(centroid, simplex[worst], -reflect);
    const double fr = f(xr);
    if (fr < values[best]) {
      if (f.exhausted()) return;
      const Point xe = combine(centroid, simplex[worst], -reflect * expand);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    if (f.exhausted()) return;
    const bool outside = fr < values[worst];
    const Point xc = outside ? combine(centroid, xr, contract) : combine(centroid, simplex[worst], contract);
    const double fc = f(xc);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n && !f.exhausted(); ++i) {
      if (i == best) continue;
      simplex[i] = combine(simplex[best], simplex[i], shrink);
      values[i] = f(simplex[i]);
    }
  }
}

/// Central-difference gradient descent with Armijo backtracking.
inline void fd_gradient(BudgetedObjective& f, Point x, double initial_step) {
  const std::size_t n = x.size();
  if (f.exhausted()) return;
  constexpr double kDiff = 1e-6;
  constexpr double kArmijo = 1e-4;
  double fx = f(x);
  double step = initial_step;
  Point grad(n);

  while (f.remaining() >= 2 * n + 1) {
    for (std::size_t k = 0; k < n; ++k) {
      Point up = x;
      Point down = x;
      up[k] += kDiff;
      down[k] -= kDiff;
      grad[k] = (f(up) - f(down)) / (2.0 * kDiff);
    }
    double g2 = 0.0;
    for (double g : grad) g2 += g * g;
    if (g2 <= 1e-24) return;

    bool accepted = false;
    while (!f.exhausted() && step > 1e-12) {
      Point trial(n);
      for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] - step * grad[k];
      const double ft = f(trial);
      if (ft <= fx - kArmijo * step * g2) {
        x = std::move(trial);
        fx = ft;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return;
  }
}

}  // namespace detail

/// Multi-start search; restart r draws its start point from stream (seed, r).
/// Deterministic for fixed options.
inline OptimizationResult optimize_hamiltonian(const MeasurementModel& tmpl, const OptimizerOptions& opt) {
  detail::require(opt.budget >= 1, "optimize_hamiltonian: budget must be at least 1");
  detail::require(opt.restarts >= 1, "optimize_hamiltonian: at least one restart is required");
  const HamiltonianParameterization param(tmpl.composite_dim());
  OptimizationResult result;
  result.restarts = opt.restarts;
  result.seed = opt.seed;

  auto evaluate = [&](const detail::Point& x) {
    return objective(tmpl, param.decode(x), opt.grid, opt.weights);
  };

  for (std::size_t r = 0; r < opt.restarts; ++r) {
    Rng rng = make_stream(opt.seed, r);
    std::normal_distribution<double> normal(0.0, opt.initial_scale);
    detail::Point x0(param.size());
    for (double& v : x0) v = normal(rng);

    detail::BudgetedObjective f(evaluate, opt.budget, result);
    if (opt.method == SearchMethod::NelderMead) {
      detail::nelder_mead(f, std::move(x0), opt.simplex_step);
    } else {
      detail::fd_gradient(f, std::move(x0), opt.simplex_step);
    }
  }
  return result;
}

struct ScanRow {
  Eigen::Index dim_M;
  double floor;
  std::size_t budget;
  std::size_t restarts;
  std::uint64_t seed;
};

/// One optimize_hamiltonian run per apparatus dimension, each on
/// standard_template(observable_A, dim_M, t_end) with identical options.
inline std::vector<ScanRow> dimension_scan(const SpectralObservable& observable_A,
                                           const std::vector<Eigen::Index>& dim_M_list,
                                           const OptimizerOptions& opt, double t_end = 1.0) {
  detail::require(std::is_sorted(dim_M_list.begin(), dim_M_list.end()),
                  "dimension_scan: apparatus dimensions must be ascending");
  std::vector<ScanRow> rows;
  for (Eigen::Index dim_M : dim_M_list) {
    const MeasurementModel tmpl = standard_template(observable_A, dim_M, t_end);
    const OptimizationResult r = optimize_hamiltonian(tmpl, opt);
    rows.push_back({dim_M, r.best_objective, opt.budget, opt.restarts, opt.seed});
  }
  return rows;
}

inline std::vector<ScanRow> dimension_scan(Eigen::Index dim_S, const std::vector<Eigen::Index>& dim_M_list,
                                           const OptimizerOptions& opt) {
  return dimension_scan(default_observable(dim_S), dim_M_list, opt);
}

}  // namespace measlab
