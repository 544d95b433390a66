// Small hand-built models shared by the test files.
#pragma once

#include "measlab/model.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace measlab;

/// Qubit system measured in the sigma_z basis (labels +1, -1) by a qutrit
/// pointer with basis labels (ready, +1, -1), ready state e_0, window [1, 2].
inline MeasurementModel qubit_qutrit(const ComplexMatrix& h) {
  MeasurementModel m;
  m.dim_S = 2;
  m.dim_M = 3;
  m.observable_A = SpectralObservable::from_basis_labels({Label(1.0), Label(-1.0)});
  m.pointer_Z = SpectralObservable::from_basis_labels({Label::ready(), Label(1.0), Label(-1.0)});
  m.ready_state = StateVector::basis(3, 0);
  m.hamiltonian = HermitianOperator(h);
  m.t_end = 1.0;
  m.t_persist = 2.0;
  return m;
}

inline MeasurementModel idle() { return qubit_qutrit(ComplexMatrix::Zero(6, 6)); }

/// H = sigma_z (x) G with exp(-iG) the cyclic shift: at T = 1 the pointer
/// moves from ready to e_1 for outcome +1 and to e_2 for outcome -1.
inline MeasurementModel correlator() {
  return qubit_qutrit(oracle::kron(oracle::pauli_z(), oracle::shift_generator3()));
}

/// Composite unitary of the correlator at T = 1.
inline ComplexMatrix correlator_unitary() {
  ComplexMatrix u = ComplexMatrix::Zero(6, 6);
  for (int m = 0; m < 3; ++m) {
    u((m + 1) % 3, m) = 1.0;
    u(3 + (m + 2) % 3, 3 + m) = 1.0;
  }
  return u;
}

}  // namespace fixtures
