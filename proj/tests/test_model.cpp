#include "measlab/model.hpp"
#include "measlab/random.hpp"
#include "models.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

using namespace measlab;

namespace {

bool has_violation(const ValidationReport& r, const std::string& needle) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.find(needle) != std::string::npos; });
}

}  // namespace

TEST(Label, ReadyAndNumericLabels) {
  EXPECT_TRUE(Label::ready().is_ready());
  EXPECT_EQ(Label::ready().str(), "ready");
  EXPECT_EQ(Label(-1.0).str(), "-1");
  EXPECT_FALSE(Label(1.0) == Label::ready());
  EXPECT_TRUE(Label(0.5) == Label(0.5));
  EXPECT_THROW(Label::ready().value(), Error);
}

TEST(SpectralObservable, FromBasisLabelsGroupsByFirstAppearance) {
  const SpectralObservable z = SpectralObservable::from_basis_labels(
      {Label::ready(), Label(1.0), Label(-1.0), Label(1.0)});
  ASSERT_EQ(z.size(), 3u);
  EXPECT_TRUE(z.labels()[0].is_ready());
  EXPECT_DOUBLE_EQ(z.projector(Label(1.0)).trace().real(), 2.0);
  EXPECT_EQ(z.outcome_labels().size(), 2u);
  EXPECT_THROW(z.projector(Label(7.0)), Error);
}

TEST(SpectralObservable, FromOperatorReproducesTheOperator) {
  Rng rng = make_stream(21, 0);
  const HermitianOperator h = random_hermitian(4, rng);
  const SpectralObservable a = SpectralObservable::from_operator(h);
  EXPECT_LE(detail::max_abs(a.matrix() - h.matrix()), 1e-10);
  EXPECT_TRUE(observable_violations(a, "A", false).empty());
}

TEST(Validate, WellFormedQubitQutritModel) {
  const ValidationReport r = validate_model(fixtures::correlator());
  EXPECT_TRUE(r.ok()) << (r.violations.empty() ? "" : r.violations.front());
}

TEST(Validate, PointerProjectorsSummingToLessThanIdentity) {
  MeasurementModel m = fixtures::idle();
  std::vector<ComplexMatrix> ps;
  for (const auto& p : m.pointer_Z.projectors()) ps.push_back(0.9 * p);
  m.pointer_Z = SpectralObservable(m.pointer_Z.labels(), ps);
  const ValidationReport r = validate_model(m);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_violation(r, "projector completeness"));
}

TEST(Validate, ReadyStateOutsideReadySector) {
  MeasurementModel m = fixtures::idle();
  m.ready_state = StateVector::basis(3, 1);
  EXPECT_TRUE(has_violation(validate_model(m), "ready state not in"));
}

TEST(Validate, OutcomeWithoutPointerLabel) {
  MeasurementModel m = fixtures::idle();
  m.pointer_Z = SpectralObservable::from_basis_labels({Label::ready(), Label(1.0), Label(2.0)});
  EXPECT_TRUE(has_violation(validate_model(m), "label matching: outcome -1"));
}

TEST(Validate, ObservableDefects) {
  MeasurementModel m = fixtures::idle();
  m.observable_A = SpectralObservable::from_basis_labels({Label::ready(), Label(1.0)});
  EXPECT_TRUE(has_violation(validate_model(m), "ready label on a measured observable"));

  m = fixtures::idle();
  m.pointer_Z = SpectralObservable::from_basis_labels({Label(2.0), Label(1.0), Label(-1.0)});
  EXPECT_TRUE(has_violation(validate_model(m), "missing ready label"));

  m = fixtures::idle();
  ComplexMatrix overlap = ComplexMatrix::Zero(3, 3);
  overlap(0, 0) = overlap(1, 1) = 1.0;
  auto ps = m.pointer_Z.projectors();
  ps[1] = overlap;
  m.pointer_Z = SpectralObservable(m.pointer_Z.labels(), ps);
  EXPECT_TRUE(has_violation(validate_model(m), "projector orthogonality"));
}

TEST(Validate, TimeWindow) {
  MeasurementModel m = fixtures::idle();
  m.t_persist = 0.5;
  EXPECT_TRUE(has_violation(validate_model(m), "time window"));
}

TEST(Validate, ReportsGroundEnergy) {
  const MeasurementModel m = fixtures::qubit_qutrit(HermitianOperator::diagonal({3, 1, 2, -4, 0, 5}).matrix());
  EXPECT_DOUBLE_EQ(validate_model(m).ground_energy, -4.0);
}

TEST(BuildCoupled, ZeroCouplingFactorizesAndFreezesThePointer) {
  Rng rng = make_stream(22, 0);
  const MeasurementModel tmpl = fixtures::idle();
  const HermitianOperator h_S = random_hermitian(2, rng);
  const HermitianOperator h_M = HermitianOperator::diagonal({0.3, -1.2, 2.0});
  const MeasurementModel m = build_coupled_model(2, 3, h_S, h_M, 0.0, random_hermitian(3, rng), tmpl.observable_A,
                                                 tmpl.pointer_Z, tmpl.ready_state, 1.0, 2.0);
  const StateVector psi = random_state(2, rng);
  const StateVector start = tensor_product(psi, m.ready_state);
  const ComplexMatrix ready = pointer_sector(m, Label::ready());
  for (double t : {0.1, 0.7, 3.0, 11.0}) {
    const ComplexVector out = evolve_model(m, start, t).amplitudes();
    const ComplexVector expect = oracle::kron(ComplexVector(oracle::taylor_expm(h_S.matrix(), t) * psi.amplitudes()),
                                              ComplexVector(oracle::taylor_expm(h_M.matrix(), t) *
                                                            m.ready_state.amplitudes()));
    EXPECT_LE((out - expect).norm(), 1e-10);
    EXPECT_LE((out - ready * out).norm(), 1e-12);
  }
}

TEST(BuildCoupled, PureCouplingIsAKroneckerProduct) {
  const MeasurementModel tmpl = fixtures::idle();
  const HermitianOperator g(oracle::shift_generator3());
  const MeasurementModel m = build_coupled_model(2, 3, HermitianOperator::zero(2), HermitianOperator::zero(3), 1.0, g,
                                                 tmpl.observable_A, tmpl.pointer_Z, tmpl.ready_state, 1.0, 2.0);
  EXPECT_LE(detail::max_abs(m.hamiltonian.matrix() - oracle::kron(oracle::pauli_z(), g.matrix())), 1e-15);
}

TEST(BuildCoupled, ShiftGeneratorEvolutionMatchesOracle) {
  const MeasurementModel m = fixtures::correlator();
  const double t = std::numbers::pi / 2.0;
  Rng rng = make_stream(22, 1);
  const StateVector psi = tensor_product(random_state(2, rng), m.ready_state);
  const ComplexVector expect = oracle::taylor_expm(m.hamiltonian.matrix(), t) * psi.amplitudes();
  EXPECT_LE((evolve_model(m, psi, t).amplitudes() - expect).norm(), 1e-10);
  EXPECT_LE(detail::max_abs(unitary(m.hamiltonian, 1.0) - fixtures::correlator_unitary()), 1e-12);
}

TEST(BuildCoupled, EigenstatesEvolveInProductForm) {
  Rng rng = make_stream(22, 2);
  const MeasurementModel tmpl = fixtures::idle();
  const HermitianOperator g = random_hermitian(3, rng);
  const MeasurementModel m = build_coupled_model(2, 3, HermitianOperator::zero(2), HermitianOperator::zero(3), 1.3, g,
                                                 tmpl.observable_A, tmpl.pointer_Z, tmpl.ready_state, 1.0, 2.0);
  for (int s = 0; s < 2; ++s) {
    const double lambda = s == 0 ? 1.0 : -1.0;
    const StateVector start = tensor_product(StateVector::basis(2, s), m.ready_state);
    const ComplexVector pointer = oracle::taylor_expm(g.matrix(), 1.3 * lambda * 0.8) * m.ready_state.amplitudes();
    const ComplexVector expect = oracle::kron(StateVector::basis(2, s).amplitudes(), pointer);
    EXPECT_LE((evolve_model(m, start, 0.8).amplitudes() - expect).norm(), 1e-10);
  }
}

TEST(BuildCoupled, RandomModelsValidate) {
  const MeasurementModel tmpl = standard_template(default_observable(3), 5);
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = make_stream(23, i);
    EXPECT_TRUE(validate_model(random_coupled_model(tmpl, rng)).ok());
  }
}

TEST(BuildCoupled, RejectsDimensionMismatch) {
  const MeasurementModel tmpl = fixtures::idle();
  EXPECT_THROW(build_coupled_model(2, 3, HermitianOperator::zero(3), HermitianOperator::zero(3), 1.0,
                                   HermitianOperator::zero(3), tmpl.observable_A, tmpl.pointer_Z, tmpl.ready_state,
                                   1.0, 2.0),
               Error);
  EXPECT_THROW(evolve_model(tmpl, StateVector::basis(5, 0), 1.0), Error);
}

TEST(BranchDecompose, ReadyProductIsASingleBranch) {
  const MeasurementModel m = fixtures::idle();
  Rng rng = make_stream(24, 0);
  const std::vector<Branch> b = branch_decompose(m, tensor_product(random_state(2, rng), m.ready_state));
  ASSERT_EQ(b.size(), 1u);
  EXPECT_TRUE(b[0].label.is_ready());
  EXPECT_NEAR(b[0].weight, 1.0, 1e-14);
}

TEST(BranchDecompose, CorrelatedStateSplitsByPointerLabel) {
  const MeasurementModel m = fixtures::idle();
  ComplexVector v = ComplexVector::Zero(6);
  v(0 * 3 + 1) = std::sqrt(0.3);
  v(1 * 3 + 2) = std::sqrt(0.7);
  const std::vector<Branch> b = branch_decompose(m, StateVector(v));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].label, Label(1.0));
  EXPECT_NEAR(b[0].weight, 0.3, 1e-14);
  EXPECT_EQ(b[1].label, Label(-1.0));
  EXPECT_NEAR(b[1].weight, 0.7, 1e-14);
  EXPECT_NEAR(std::abs(b[1].branch.state.amplitudes()(5)), 1.0, 1e-14);
}

TEST(BranchDecompose, WeightsAreQuadraticFormsAndSumToOne) {
  const MeasurementModel m = fixtures::idle();
  Rng rng = make_stream(24, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const StateVector psi = random_state(6, rng);
    double total = 0.0;
    for (const Branch& b : branch_decompose(m, psi)) {
      const ComplexMatrix pi = oracle::kron(ComplexMatrix::Identity(2, 2), m.pointer_Z.projector(b.label));
      EXPECT_NEAR(b.weight, (psi.amplitudes().adjoint() * pi * psi.amplitudes())(0).real(), 1e-12);
      total += b.weight;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(BranchDecompose, WeightsAreGaugeInvariant) {
  Rng rng = make_stream(24, 2);
  const MeasurementModel m = random_coupled_model(fixtures::idle(), rng);
  const MeasurementModel shifted = m.with_hamiltonian(m.hamiltonian.shifted(7.3));
  const StateVector start = tensor_product(random_state(2, rng), m.ready_state);
  const auto a = branch_decompose(m, evolve_model(m, start, 1.0));
  const auto b = branch_decompose(shifted, evolve_model(shifted, start, 1.0));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].weight, b[i].weight, 1e-10);
}
