// Seeded random instances: Hermitian operators, states, density operators,
// unitaries and standard measurement-model templates.
#pragma once

#include "measlab/linalg.hpp"
#include "measlab/model.hpp"

#include <cstdint>
#include <random>

namespace measlab {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream index).
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6d65u};
  return Rng(seq);
}

inline ComplexMatrix random_ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

inline ComplexVector random_vector(Eigen::Index dim, Rng& rng) {
  return random_ginibre(dim, 1, rng).col(0);
}

/// (G + G^dag) / 2 with standard complex Gaussian G, times `scale`.
inline HermitianOperator random_hermitian(Eigen::Index dim, Rng& rng, double scale = 1.0) {
  const ComplexMatrix g = random_ginibre(dim, dim, rng);
  return HermitianOperator(scale * (g + g.adjoint()) / 2.0);
}

inline StateVector random_state(Eigen::Index dim, Rng& rng) {
  return StateVector::normalized(random_vector(dim, rng));
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
inline ComplexMatrix random_unitary(Eigen::Index dim, Rng& rng) {
  const ComplexMatrix g = random_ginibre(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

/// Random density operator of the given rank supported on range(support).
inline DensityOperator random_density(const ComplexMatrix& support, Eigen::Index rank, Rng& rng) {
  const ComplexMatrix basis = projector_range(support);
  detail::require(rank >= 1 && rank <= basis.cols(), "random_density: rank exceeds support dimension");
  const ComplexMatrix g = basis * random_ginibre(basis.cols(), rank, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  const ComplexMatrix vecs = qr.householderQ() * ComplexMatrix::Identity(g.rows(), rank);
  std::uniform_real_distribution<double> uniform(0.1, 1.0);
  RealVector weights(rank);
  for (Eigen::Index k = 0; k < rank; ++k) weights(k) = uniform(rng);
  weights /= weights.sum();
  return DensityOperator(vecs * weights.cast<Complex>().asDiagonal() * vecs.adjoint());
}

inline DensityOperator random_density(Eigen::Index dim, Eigen::Index rank, Rng& rng) {
  return random_density(ComplexMatrix::Identity(dim, dim), rank, rng);
}

/// Diagonal observable with eigenvalues 0, 1, ..., dim_S - 1.
inline SpectralObservable default_observable(Eigen::Index dim_S) {
  std::vector<Label> labels;
  for (Eigen::Index k = 0; k < dim_S; ++k) labels.emplace_back(static_cast<double>(k));
  return SpectralObservable::from_basis_labels(labels);
}

/// Diagonal pointer with one sector per outcome plus the ready sector.
/// Basis vector k carries label k mod (n + 1), slot 0 being ready, so extra
/// apparatus dimensions make every sector degenerate in turn.
inline SpectralObservable standard_pointer(const std::vector<Label>& outcomes, Eigen::Index dim_M) {
  const auto slots = static_cast<Eigen::Index>(outcomes.size()) + 1;
  detail::require(dim_M >= slots, "standard_pointer: apparatus too small for the outcome count");
  std::vector<Label> basis_labels;
  for (Eigen::Index k = 0; k < dim_M; ++k) {
    const Eigen::Index slot = k % slots;
    basis_labels.push_back(slot == 0 ? Label::ready() : outcomes[static_cast<std::size_t>(slot - 1)]);
  }
  return SpectralObservable::from_basis_labels(basis_labels);
}

/// Idle model (H = 0) with the standard pointer, ready state e_0 and
/// persistence window [t_end, 2 t_end].
inline MeasurementModel standard_template(const SpectralObservable& observable_A, Eigen::Index dim_M,
                                          double t_end = 1.0) {
  MeasurementModel m;
  m.dim_S = observable_A.dim();
  m.dim_M = dim_M;
  m.observable_A = observable_A;
  m.pointer_Z = standard_pointer(observable_A.outcome_labels(), dim_M);
  m.ready_state = StateVector::basis(dim_M, 0);
  m.hamiltonian = HermitianOperator::zero(m.composite_dim());
  m.t_end = t_end;
  m.t_persist = 2.0 * t_end;
  return m;
}

/// Template with H = h_S (x) I + I (x) h_M + mu A (x) G, all terms random;
/// mu is uniform in [0.5, 2].
inline MeasurementModel random_coupled_model(const MeasurementModel& tmpl, Rng& rng) {
  const HermitianOperator h_S = random_hermitian(tmpl.dim_S, rng);
  const HermitianOperator h_M = random_hermitian(tmpl.dim_M, rng);
  const HermitianOperator g = random_hermitian(tmpl.dim_M, rng);
  std::uniform_real_distribution<double> coupling(0.5, 2.0);
  const double mu = coupling(rng);
  return build_coupled_model(tmpl.dim_S, tmpl.dim_M, h_S, h_M, mu, g, tmpl.observable_A,
                             tmpl.pointer_Z, tmpl.ready_state, tmpl.t_end, tmpl.t_persist);
}

}  // namespace measlab
