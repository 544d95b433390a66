#include "measlab/optimizer.hpp"
#include "models.hpp"

#include <gtest/gtest.h>

using namespace measlab;

namespace {

OptimizerOptions small_options(std::size_t budget, std::size_t restarts, SearchMethod method = SearchMethod::NelderMead) {
  OptimizerOptions o;
  o.budget = budget;
  o.restarts = restarts;
  o.seed = 99;
  o.method = method;
  o.grid = 8;
  return o;
}

}  // namespace

TEST(Parameterization, RoundTripAndHermiticity) {
  const HamiltonianParameterization p(4);
  EXPECT_EQ(p.size(), 16u);
  Rng rng = make_stream(61, 0);
  const HermitianOperator h = random_hermitian(4, rng);
  const HermitianOperator back = p.decode(p.encode(h));
  EXPECT_LE(detail::max_abs(back.matrix() - h.matrix()), 0.0);

  std::vector<double> x(16);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 0.1 * static_cast<double>(k) - 0.7;
  const std::vector<double> again = p.encode(p.decode(x));
  EXPECT_EQ(again, x);
  EXPECT_THROW(p.decode(std::vector<double>(15)), Error);
}

TEST(Parameterization, LayoutIsDiagonalThenUpperTriangle) {
  const HamiltonianParameterization p(2);
  const HermitianOperator h = p.decode(std::vector<double>{1.0, -2.0, 0.5, 0.25});
  EXPECT_EQ(h.matrix()(0, 0), Complex(1.0));
  EXPECT_EQ(h.matrix()(1, 1), Complex(-2.0));
  EXPECT_EQ(h.matrix()(0, 1), Complex(0.5, 0.25));
  EXPECT_EQ(h.matrix()(1, 0), Complex(0.5, -0.25));
}

TEST(Objective, IdleApparatus) {
  const MeasurementModel tmpl = fixtures::idle();
  EXPECT_NEAR(objective(tmpl, HermitianOperator::zero(6)), 1.0, 1e-15);
  const ObjectiveWeights w{2.0, 1.0, 5.0};
  EXPECT_NEAR(objective(tmpl, HermitianOperator::zero(6), 8, w), 2.0, 1e-15);
}

TEST(Objective, MatchesErrorReportAndIsGaugeInvariant) {
  for (std::uint64_t i = 0; i < 5; ++i) {
    Rng rng = make_stream(62, i);
    const MeasurementModel m = random_coupled_model(fixtures::idle(), rng);
    const ErrorReport r = error_report(m, 16);
    EXPECT_NEAR(objective(fixtures::idle(), m.hamiltonian, 16), r.aggregate, 1e-12);
    EXPECT_NEAR(objective(fixtures::idle(), m.hamiltonian.shifted(7.3), 16), r.aggregate, 1e-9);
  }
  EXPECT_THROW(objective(fixtures::idle(), HermitianOperator::zero(5)), Error);
}

TEST(Optimize, BudgetOfOneReturnsTheStartingPoint) {
  const MeasurementModel tmpl = fixtures::idle();
  const OptimizerOptions opt = small_options(1, 1);
  const OptimizationResult r = optimize_hamiltonian(tmpl, opt);
  EXPECT_EQ(r.evaluations, 1u);
  ASSERT_EQ(r.history.size(), 1u);
  const HamiltonianParameterization p(6);
  EXPECT_EQ(r.best_objective, objective(tmpl, p.decode(r.best_params), opt.grid));
}

TEST(Optimize, DeterministicForFixedSeed) {
  const MeasurementModel tmpl = fixtures::idle();
  for (SearchMethod method : {SearchMethod::NelderMead, SearchMethod::FdGradient}) {
    const OptimizerOptions opt = small_options(300, 2, method);
    const OptimizationResult a = optimize_hamiltonian(tmpl, opt);
    const OptimizationResult b = optimize_hamiltonian(tmpl, opt);
    EXPECT_EQ(a.best_objective, b.best_objective);
    EXPECT_EQ(a.best_params, b.best_params);
    EXPECT_EQ(a.evaluations, b.evaluations);
  }
}

TEST(Optimize, HistoryIsAStrictlyDecreasingRunningMinimum) {
  const MeasurementModel tmpl = fixtures::idle();
  for (SearchMethod method : {SearchMethod::NelderMead, SearchMethod::FdGradient}) {
    const OptimizationResult r = optimize_hamiltonian(tmpl, small_options(400, 3, method));
    ASSERT_FALSE(r.history.empty());
    EXPECT_LE(r.evaluations, 1200u);
    for (std::size_t k = 1; k < r.history.size(); ++k) {
      EXPECT_LT(r.history[k].objective, r.history[k - 1].objective);
      EXPECT_GT(r.history[k].evaluation, r.history[k - 1].evaluation);
    }
    EXPECT_EQ(r.history.back().objective, r.best_objective);
    EXPECT_EQ(r.best_objective, objective(tmpl, HamiltonianParameterization(6).decode(r.best_params), 8));
  }
}

TEST(Optimize, SearchImprovesOnItsStart) {
  const OptimizationResult r = optimize_hamiltonian(fixtures::idle(), small_options(600, 1));
  EXPECT_LT(r.best_objective, r.history.front().objective);
  EXPECT_GT(r.best_objective, 0.0);
}

TEST(Optimize, RejectsEmptyBudgetOrRestarts) {
  EXPECT_THROW(optimize_hamiltonian(fixtures::idle(), small_options(0, 1)), Error);
  EXPECT_THROW(optimize_hamiltonian(fixtures::idle(), small_options(10, 0)), Error);
}

TEST(Scan, SingletonEqualsOptimize) {
  const OptimizerOptions opt = small_options(200, 1);
  const std::vector<ScanRow> rows = dimension_scan(2, {3}, opt);
  ASSERT_EQ(rows.size(), 1u);
  const OptimizationResult r = optimize_hamiltonian(standard_template(default_observable(2), 3), opt);
  EXPECT_EQ(rows[0].floor, r.best_objective);
  EXPECT_EQ(rows[0].dim_M, 3);
  EXPECT_EQ(rows[0].budget, 200u);
}

TEST(Scan, RepeatedDimensionsGiveIdenticalRows) {
  const std::vector<ScanRow> rows = dimension_scan(2, {3, 3, 4}, small_options(100, 1));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].floor, rows[1].floor);
  EXPECT_GT(rows[2].floor, 0.0);
}

TEST(Scan, RequiresAscendingDimensions) {
  EXPECT_THROW(dimension_scan(2, {4, 3}, small_options(10, 1)), Error);
  EXPECT_THROW(dimension_scan(2, {2}, small_options(10, 1)), Error);
}
