// Dense complex linear-algebra kernel.
//
// Conventions used everywhere in measlab:
//   * hbar = 1, energies and times dimensionless.
//   * Composite spaces are ordered system-first: basis index (s, m) of
//     H_S (x) H_M lives at s * dim_M + m.
//   * Storage is dense; composite dimensions are capped at kMaxDim.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace measlab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Eigen::Index kMaxDim = 4096;

/// Raised for every contract violation (dimension mismatch, non-Hermitian
/// input, unnormalized state, unknown label, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Square Hermitian matrix, checked at construction (max-norm of M - M^dag
/// at most 1e-12). The stored matrix is symmetrized exactly.
class HermitianOperator {
 public:
  static constexpr double kTolerance = 1e-12;

  HermitianOperator() = default;

  explicit HermitianOperator(ComplexMatrix matrix) {
    detail::require(matrix.rows() == matrix.cols(), "HermitianOperator: matrix is not square");
    detail::require(matrix.rows() <= kMaxDim, "HermitianOperator: dimension exceeds cap");
    detail::require(detail::all_finite(matrix), "HermitianOperator: non-finite entry");
    const ComplexMatrix adjoint = matrix.adjoint();
    detail::require(detail::max_abs(matrix - adjoint) <= kTolerance,
                    "HermitianOperator: matrix is not Hermitian");
    matrix_ = (matrix + adjoint) / 2.0;
  }

  static HermitianOperator zero(Eigen::Index dim) {
    return HermitianOperator(ComplexMatrix::Zero(dim, dim));
  }
  static HermitianOperator identity(Eigen::Index dim) {
    return HermitianOperator(ComplexMatrix::Identity(dim, dim));
  }
  static HermitianOperator diagonal(const std::vector<double>& values) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(values.size()),
                                          static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
    }
    return HermitianOperator(std::move(m));
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

  HermitianOperator shifted(double energy) const {
    return HermitianOperator(matrix_ + energy * ComplexMatrix::Identity(dim(), dim()));
  }

 private:
  ComplexMatrix matrix_;
};

/// Unit vector (Euclidean norm 1 within 1e-10).
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-10;

  StateVector() = default;

  explicit StateVector(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    detail::require(amplitudes_.size() > 0, "StateVector: empty");
    detail::require(amplitudes_.allFinite(), "StateVector: non-finite amplitude");
    detail::require(std::abs(amplitudes_.norm() - 1.0) <= kNormTolerance,
                    "StateVector: norm differs from 1");
  }

  /// Normalizes `v`; throws if it is numerically zero.
  static StateVector normalized(const ComplexVector& v) {
    const double n = v.norm();
    detail::require(n > 1e-300 && std::isfinite(n), "StateVector: cannot normalize a null vector");
    return StateVector(v / n);
  }

  static StateVector basis(Eigen::Index dim, Eigen::Index index) {
    detail::require(index >= 0 && index < dim, "StateVector: basis index out of range");
    ComplexVector v = ComplexVector::Zero(dim);
    v(index) = 1.0;
    return StateVector(std::move(v));
  }

  Eigen::Index dim() const { return amplitudes_.size(); }
  const ComplexVector& amplitudes() const { return amplitudes_; }

 private:
  ComplexVector amplitudes_;
};

/// Positive semidefinite, unit-trace Hermitian matrix.
class DensityOperator {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kTraceTolerance = 1e-10;
  static constexpr double kPositivityTolerance = 1e-10;

  DensityOperator() = default;

  explicit DensityOperator(ComplexMatrix matrix) {
    detail::require(matrix.rows() == matrix.cols(), "DensityOperator: matrix is not square");
    detail::require(matrix.rows() > 0 && matrix.rows() <= kMaxDim,
                    "DensityOperator: dimension out of range");
    detail::require(detail::all_finite(matrix), "DensityOperator: non-finite entry");
    const ComplexMatrix adjoint = matrix.adjoint();
    detail::require(detail::max_abs(matrix - adjoint) <= kHermitianTolerance,
                    "DensityOperator: matrix is not Hermitian");
    matrix_ = (matrix + adjoint) / 2.0;
    detail::require(std::abs(matrix_.trace().real() - 1.0) <= kTraceTolerance,
                    "DensityOperator: trace differs from 1");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
    detail::require(solver.info() == Eigen::Success, "DensityOperator: eigensolve failed");
    detail::require(solver.eigenvalues().minCoeff() >= -kPositivityTolerance,
                    "DensityOperator: negative eigenvalue");
  }

  static DensityOperator pure(const StateVector& psi) {
    return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  /// rho / tr(rho) for a nonzero positive semidefinite matrix.
  static DensityOperator normalized(const ComplexMatrix& m) {
    const double tr = m.trace().real();
    detail::require(tr > 1e-300, "DensityOperator: cannot normalize a traceless matrix");
    return DensityOperator(m / tr);
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

/// Eigenvalues (ascending, merged within the degeneracy tolerance) with the
/// spectral projector of each eigenspace.
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  std::vector<ComplexMatrix> projectors;
  std::vector<Eigen::Index> multiplicities;

  ComplexMatrix reconstruct() const {
    if (projectors.empty()) return {};
    ComplexMatrix sum = ComplexMatrix::Zero(projectors.front().rows(), projectors.front().cols());
    for (std::size_t i = 0; i < projectors.size(); ++i) sum += eigenvalues[i] * projectors[i];
    return sum;
  }
};

inline constexpr double kDefaultDegeneracyTolerance = 1e-8;

/// Kronecker product, first factor major: (a (x) b)(i*rb + k, j*cb + l) = a(i,j) b(k,l).
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline ComplexVector tensor_product(const ComplexVector& u, const ComplexVector& v) {
  ComplexVector out(u.size() * v.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out.segment(i * v.size(), v.size()) = u(i) * v;
  return out;
}

inline StateVector tensor_product(const StateVector& u, const StateVector& v) {
  return StateVector::normalized(tensor_product(u.amplitudes(), v.amplitudes()));
}

enum class Subsystem { S, M };

/// Partial trace of a matrix on H_S (x) H_M keeping `keep`. Works for any
/// square operator, not only density operators.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, Subsystem keep, Eigen::Index dim_S,
                                   Eigen::Index dim_M) {
  detail::require(dim_S > 0 && dim_M > 0, "partial_trace: dimensions must be positive");
  detail::require(rho.rows() == dim_S * dim_M && rho.cols() == dim_S * dim_M,
                  "partial_trace: operator dimension does not match dim_S * dim_M");
  if (keep == Subsystem::M) {
    ComplexMatrix out = ComplexMatrix::Zero(dim_M, dim_M);
    for (Eigen::Index s = 0; s < dim_S; ++s) out += rho.block(s * dim_M, s * dim_M, dim_M, dim_M);
    return out;
  }
  ComplexMatrix out(dim_S, dim_S);
  for (Eigen::Index s = 0; s < dim_S; ++s) {
    for (Eigen::Index r = 0; r < dim_S; ++r) {
      out(s, r) = rho.block(s * dim_M, r * dim_M, dim_M, dim_M).trace();
    }
  }
  return out;
}

inline DensityOperator partial_trace(const DensityOperator& rho, Subsystem keep,
                                     Eigen::Index dim_S, Eigen::Index dim_M) {
  return DensityOperator(partial_trace(rho.matrix(), keep, dim_S, dim_M));
}

/// Hermitian eigensolve with eigenvalues merged into clusters whose
/// consecutive gaps are within `degeneracy_tol`.
inline SpectralDecomposition spectral_decompose(const HermitianOperator& h,
                                                double degeneracy_tol = kDefaultDegeneracyTolerance) {
  detail::require(degeneracy_tol > 0.0, "spectral_decompose: degeneracy tolerance must be positive");
  SpectralDecomposition out;
  if (h.dim() == 0) return out;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
  detail::require(solver.info() == Eigen::Success, "spectral_decompose: eigensolver did not converge");
  const RealVector& values = solver.eigenvalues();
  const ComplexMatrix& vectors = solver.eigenvectors();

  Eigen::Index start = 0;
  while (start < values.size()) {
    Eigen::Index end = start + 1;
    while (end < values.size() && values(end) - values(end - 1) <= degeneracy_tol) ++end;
    const Eigen::Index count = end - start;
    const auto block = vectors.middleCols(start, count);
    out.eigenvalues.push_back(values.segment(start, count).mean());
    out.projectors.push_back(block * block.adjoint());
    out.multiplicities.push_back(count);
    start = end;
  }
  return out;
}

inline double ground_energy(const HermitianOperator& h) {
  detail::require(h.dim() > 0, "ground_energy: empty operator");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  detail::require(solver.info() == Eigen::Success, "ground_energy: eigensolver did not converge");
  return solver.eigenvalues()(0);
}

/// Cached eigendecomposition of a Hamiltonian; produces U_t = exp(-i t H)
/// and its action on vectors for any number of times.
class Propagator {
 public:
  explicit Propagator(const HermitianOperator& h) {
    detail::require(h.dim() > 0, "Propagator: empty Hamiltonian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
    detail::require(solver.info() == Eigen::Success, "Propagator: eigensolver did not converge");
    energies_ = solver.eigenvalues();
    basis_ = solver.eigenvectors();
  }

  Eigen::Index dim() const { return energies_.size(); }
  const RealVector& energies() const { return energies_; }
  const ComplexMatrix& eigenbasis() const { return basis_; }

  ComplexVector phases(double t) const {
    ComplexVector p(dim());
    for (Eigen::Index k = 0; k < dim(); ++k) p(k) = std::polar(1.0, -t * energies_(k));
    return p;
  }

  ComplexMatrix unitary(double t) const {
    return basis_ * phases(t).asDiagonal() * basis_.adjoint();
  }

  ComplexMatrix apply(double t, const ComplexMatrix& columns) const {
    detail::require(columns.rows() == dim(), "Propagator: dimension mismatch");
    const ComplexMatrix coords = basis_.adjoint() * columns;
    return basis_ * (phases(t).asDiagonal() * coords);
  }

  ComplexVector apply(double t, const ComplexVector& v) const {
    detail::require(v.size() == dim(), "Propagator: dimension mismatch");
    const ComplexVector coords = basis_.adjoint() * v;
    return basis_ * phases(t).cwiseProduct(coords);
  }

 private:
  RealVector energies_;
  ComplexMatrix basis_;
};

inline ComplexMatrix unitary(const HermitianOperator& h, double t) {
  return Propagator(h).unitary(t);
}

inline StateVector evolve(const HermitianOperator& h, double t, const StateVector& psi) {
  detail::require(h.dim() == psi.dim(), "evolve: Hamiltonian and state dimensions differ");
  return StateVector::normalized(Propagator(h).apply(t, psi.amplitudes()));
}

/// rho(t) = U_t rho U_t^dag.
inline DensityOperator evolve(const HermitianOperator& h, double t, const DensityOperator& rho) {
  detail::require(h.dim() == rho.dim(), "evolve: Hamiltonian and density dimensions differ");
  const ComplexMatrix u = unitary(h, t);
  return DensityOperator(u * rho.matrix() * u.adjoint());
}

/// Hilbert-Schmidt inner product tr(B^dag C).
inline Complex hs_inner(const ComplexMatrix& b, const ComplexMatrix& c) {
  detail::require(b.rows() == b.cols() && c.rows() == c.cols(), "hs_inner: operands must be square");
  detail::require(b.rows() == c.rows(), "hs_inner: operand dimensions differ");
  return (b.adjoint() * c).trace();
}

inline double hs_norm(const ComplexMatrix& b) {
  return std::sqrt(std::max(0.0, hs_inner(b, b).real()));
}

inline double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

/// Orthonormal basis (as columns) of the range of a Hermitian projector.
inline ComplexMatrix projector_range(const ComplexMatrix& projector) {
  detail::require(projector.rows() == projector.cols(), "projector_range: matrix is not square");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver((projector + projector.adjoint()) / 2.0);
  detail::require(solver.info() == Eigen::Success, "projector_range: eigensolver did not converge");
  const RealVector& values = solver.eigenvalues();
  Eigen::Index first = values.size();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) > 0.5) {
      first = k;
      break;
    }
  }
  return solver.eigenvectors().rightCols(values.size() - first);
}

inline bool is_projector(const ComplexMatrix& q, double tol) {
  if (q.rows() != q.cols()) return false;
  return detail::max_abs(q * q - q) <= tol && detail::max_abs(q - q.adjoint()) <= tol;
}

}  // namespace measlab
