// Measurement models: a system S with measured observable A, an apparatus M
// with pointer observable Z (including the distinguished ready label), one
// time-independent Hamiltonian on S (x) M, a ready pointer state, and the
// premeasurement / persistence times.
#pragma once

#include "measlab/linalg.hpp"

#include <charconv>
#include <optional>
#include <string>
#include <vector>

namespace measlab {

/// Outcome identifier: a real eigenvalue, or the ready label.
class Label {
 public:
  explicit Label(double value) : value_(value) {
    detail::require(std::isfinite(value), "Label: eigenvalue must be finite");
  }

  static Label ready() { return Label(); }

  bool is_ready() const { return !value_.has_value(); }

  double value() const {
    detail::require(value_.has_value(), "Label: the ready label has no eigenvalue");
    return *value_;
  }

  std::string str() const {
    if (is_ready()) return "ready";
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, *value_,
                                      std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
  }

  friend bool operator==(const Label& a, const Label& b) { return a.value_ == b.value_; }

 private:
  Label() = default;
  std::optional<double> value_;
};

/// A real number attached to one label. Reports keep these in observable order.
struct LabelValue {
  Label label;
  double value;
};

inline double max_value(const std::vector<LabelValue>& entries) {
  double out = 0.0;
  for (const auto& e : entries) out = std::max(out, e.value);
  return out;
}

inline const LabelValue* find_label(const std::vector<LabelValue>& entries, const Label& label) {
  for (const auto& e : entries) {
    if (e.label == label) return &e;
  }
  return nullptr;
}

/// Sharp observable given by its outcome labels and spectral projectors.
/// Construction checks shapes only; completeness, idempotence and
/// orthogonality are diagnosed by observable_violations.
class SpectralObservable {
 public:
  SpectralObservable() = default;

  SpectralObservable(std::vector<Label> labels, std::vector<ComplexMatrix> projectors)
      : labels_(std::move(labels)), projectors_(std::move(projectors)) {
    detail::require(!labels_.empty(), "SpectralObservable: no outcomes");
    detail::require(labels_.size() == projectors_.size(),
                    "SpectralObservable: label and projector counts differ");
    const Eigen::Index d = projectors_.front().rows();
    for (const auto& p : projectors_) {
      detail::require(p.rows() == d && p.cols() == d,
                      "SpectralObservable: projectors must be square of equal size");
      detail::require(p.allFinite(), "SpectralObservable: non-finite projector entry");
    }
  }

  static SpectralObservable from_operator(const HermitianOperator& op,
                                          double degeneracy_tol = kDefaultDegeneracyTolerance) {
    SpectralDecomposition spec = spectral_decompose(op, degeneracy_tol);
    std::vector<Label> labels;
    for (double v : spec.eigenvalues) labels.emplace_back(v);
    return SpectralObservable(std::move(labels), std::move(spec.projectors));
  }

  /// Diagonal observable: basis vector k belongs to the eigenspace of
  /// `basis_labels[k]`. Outcomes are listed in order of first appearance.
  static SpectralObservable from_basis_labels(const std::vector<Label>& basis_labels) {
    const auto d = static_cast<Eigen::Index>(basis_labels.size());
    std::vector<Label> labels;
    std::vector<ComplexMatrix> projectors;
    for (Eigen::Index k = 0; k < d; ++k) {
      const Label& l = basis_labels[static_cast<std::size_t>(k)];
      std::size_t slot = 0;
      while (slot < labels.size() && !(labels[slot] == l)) ++slot;
      if (slot == labels.size()) {
        labels.push_back(l);
        projectors.push_back(ComplexMatrix::Zero(d, d));
      }
      projectors[slot](k, k) = 1.0;
    }
    return SpectralObservable(std::move(labels), std::move(projectors));
  }

  Eigen::Index dim() const { return projectors_.empty() ? 0 : projectors_.front().rows(); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<ComplexMatrix>& projectors() const { return projectors_; }

  std::optional<std::size_t> index_of(const Label& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == label) return i;
    }
    return std::nullopt;
  }

  bool contains(const Label& label) const { return index_of(label).has_value(); }

  const ComplexMatrix& projector(const Label& label) const {
    const auto i = index_of(label);
    detail::require(i.has_value(), "SpectralObservable: unknown label " + label.str());
    return projectors_[*i];
  }

  /// Labels other than the ready label.
  std::vector<Label> outcome_labels() const {
    std::vector<Label> out;
    for (const auto& l : labels_) {
      if (!l.is_ready()) out.push_back(l);
    }
    return out;
  }

  /// sum over outcome labels of lambda * P_lambda (the ready slot carries no eigenvalue).
  ComplexMatrix matrix() const {
    ComplexMatrix out = ComplexMatrix::Zero(dim(), dim());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!labels_[i].is_ready()) out += labels_[i].value() * projectors_[i];
    }
    return out;
  }

 private:
  std::vector<Label> labels_;
  std::vector<ComplexMatrix> projectors_;
};

inline constexpr double kProjectorTolerance = 1e-9;

/// Structural diagnostics for an observable. `prefix` names it in messages.
inline std::vector<std::string> observable_violations(const SpectralObservable& obs,
                                                      const std::string& prefix, bool pointer) {
  std::vector<std::string> out;
  const auto& labels = obs.labels();
  const auto& projectors = obs.projectors();
  const Eigen::Index d = obs.dim();

  std::size_t ready_count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].is_ready()) ++ready_count;
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (labels[i] == labels[j]) out.push_back(prefix + ": duplicate label " + labels[i].str());
    }
  }
  if (pointer && ready_count == 0) out.push_back(prefix + ": missing ready label");
  if (!pointer && ready_count > 0) out.push_back(prefix + ": ready label on a measured observable");

  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  bool idempotent = true;
  bool orthogonal = true;
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const auto& p = projectors[i];
    sum += p;
    if (!is_projector(p, kProjectorTolerance)) idempotent = false;
    for (std::size_t j = i + 1; j < projectors.size(); ++j) {
      if (detail::max_abs(p * projectors[j]) > kProjectorTolerance) orthogonal = false;
    }
  }
  if (!idempotent) out.push_back(prefix + ": projector idempotence");
  if (!orthogonal) out.push_back(prefix + ": projector orthogonality");
  if (detail::max_abs(sum - ComplexMatrix::Identity(d, d)) > kProjectorTolerance) {
    out.push_back(prefix + ": projector completeness");
  }
  return out;
}

struct MeasurementModel {
  Eigen::Index dim_S = 0;
  Eigen::Index dim_M = 0;
  HermitianOperator hamiltonian;
  SpectralObservable observable_A;
  SpectralObservable pointer_Z;
  StateVector ready_state;
  double t_end = 1.0;
  double t_persist = 2.0;

  Eigen::Index composite_dim() const { return dim_S * dim_M; }

  MeasurementModel with_hamiltonian(HermitianOperator h) const {
    MeasurementModel out = *this;
    out.hamiltonian = std::move(h);
    return out;
  }
};

/// One pointer branch: label plus the normalized projected composite state.
struct BranchState {
  Label label;
  StateVector state;
};

struct ValidationReport {
  std::vector<std::string> violations;
  /// Minimum eigenvalue of H; finite dimension makes every H bounded below.
  double ground_energy = 0.0;

  bool ok() const { return violations.empty(); }
};

inline constexpr double kReadyStateTolerance = 1e-10;

inline ValidationReport validate_model(const MeasurementModel& m) {
  ValidationReport report;
  auto& v = report.violations;

  if (m.dim_S <= 0 || m.dim_M <= 0) {
    v.push_back("dimensions must be positive");
    return report;
  }
  if (m.composite_dim() > kMaxDim) v.push_back("composite dimension exceeds cap");

  const bool h_shape = m.hamiltonian.dim() == m.composite_dim();
  if (!h_shape) v.push_back("hamiltonian dimension");
  if (detail::max_abs(m.hamiltonian.matrix() - m.hamiltonian.matrix().adjoint()) >
      HermitianOperator::kTolerance) {
    v.push_back("hamiltonian hermiticity");
  }

  const bool a_shape = m.observable_A.dim() == m.dim_S;
  const bool z_shape = m.pointer_Z.dim() == m.dim_M;
  if (!a_shape) v.push_back("observable_A dimension");
  if (!z_shape) v.push_back("pointer_Z dimension");
  if (a_shape) {
    for (auto& s : observable_violations(m.observable_A, "observable_A", false)) v.push_back(s);
  }
  if (z_shape) {
    for (auto& s : observable_violations(m.pointer_Z, "pointer_Z", true)) v.push_back(s);
  }

  for (const auto& label : m.observable_A.outcome_labels()) {
    if (!m.pointer_Z.contains(label)) {
      v.push_back("label matching: outcome " + label.str() + " has no pointer label");
    }
  }

  if (m.ready_state.dim() != m.dim_M) {
    v.push_back("ready state dimension");
  } else if (z_shape && m.pointer_Z.contains(Label::ready())) {
    const ComplexVector& phi = m.ready_state.amplitudes();
    const ComplexVector projected = m.pointer_Z.projector(Label::ready()) * phi;
    if ((projected - phi).norm() > kReadyStateTolerance) {
      v.push_back("ready state not in ∅ eigenspace");
    }
  }

  if (!(m.t_end > 0.0)) v.push_back("time window: t_end must be positive");
  if (!(m.t_persist > m.t_end)) v.push_back("time window: t_persist must exceed t_end");

  if (h_shape && m.hamiltonian.dim() > 0) report.ground_energy = ground_energy(m.hamiltonian);
  return report;
}

/// H = h_S (x) I + I (x) h_M + coupling * (A (x) G), on permanently.
inline MeasurementModel build_coupled_model(Eigen::Index dim_S, Eigen::Index dim_M,
                                            const HermitianOperator& h_S,
                                            const HermitianOperator& h_M, double coupling,
                                            const HermitianOperator& generator_G,
                                            SpectralObservable observable_A,
                                            SpectralObservable pointer_Z, StateVector ready,
                                            double t_end, double t_persist) {
  detail::require(dim_S > 0 && dim_M > 0, "build_coupled_model: dimensions must be positive");
  detail::require(dim_S * dim_M <= kMaxDim, "build_coupled_model: composite dimension exceeds cap");
  detail::require(h_S.dim() == dim_S, "build_coupled_model: h_S dimension mismatch");
  detail::require(h_M.dim() == dim_M, "build_coupled_model: h_M dimension mismatch");
  detail::require(generator_G.dim() == dim_M, "build_coupled_model: generator dimension mismatch");
  detail::require(observable_A.dim() == dim_S, "build_coupled_model: observable_A dimension mismatch");
  detail::require(pointer_Z.dim() == dim_M, "build_coupled_model: pointer_Z dimension mismatch");
  detail::require(ready.dim() == dim_M, "build_coupled_model: ready state dimension mismatch");
  detail::require(std::isfinite(coupling), "build_coupled_model: coupling must be finite");

  const ComplexMatrix id_S = ComplexMatrix::Identity(dim_S, dim_S);
  const ComplexMatrix id_M = ComplexMatrix::Identity(dim_M, dim_M);
  const ComplexMatrix a = observable_A.matrix();
  ComplexMatrix h = tensor_product(h_S.matrix(), id_M) + tensor_product(id_S, h_M.matrix()) +
                    coupling * tensor_product(a, generator_G.matrix());

  MeasurementModel m;
  m.dim_S = dim_S;
  m.dim_M = dim_M;
  m.hamiltonian = HermitianOperator(std::move(h));
  m.observable_A = std::move(observable_A);
  m.pointer_Z = std::move(pointer_Z);
  m.ready_state = std::move(ready);
  m.t_end = t_end;
  m.t_persist = t_persist;
  return m;
}

inline StateVector evolve_model(const MeasurementModel& m, const StateVector& psi0, double t) {
  detail::require(psi0.dim() == m.composite_dim(), "evolve_model: state is not on the composite space");
  return evolve(m.hamiltonian, t, psi0);
}

/// P_lambda (x) I_M.
inline ComplexMatrix system_sector(const MeasurementModel& m, const Label& label) {
  return tensor_product(m.observable_A.projector(label), ComplexMatrix::Identity(m.dim_M, m.dim_M));
}

/// I_S (x) Pi_xi.
inline ComplexMatrix pointer_sector(const MeasurementModel& m, const Label& label) {
  return tensor_product(ComplexMatrix::Identity(m.dim_S, m.dim_S), m.pointer_Z.projector(label));
}

/// Columns psi_k (x) phi_ready for the given columns psi_k of system vectors.
inline ComplexMatrix attach_ready(const MeasurementModel& m, const ComplexMatrix& system_columns) {
  detail::require(system_columns.rows() == m.dim_S, "attach_ready: system dimension mismatch");
  ComplexMatrix out(m.composite_dim(), system_columns.cols());
  for (Eigen::Index c = 0; c < system_columns.cols(); ++c) {
    out.col(c) = tensor_product(ComplexVector(system_columns.col(c)), m.ready_state.amplitudes());
  }
  return out;
}

inline constexpr double kBranchPruneWeight = 1e-14;

struct Branch {
  Label label;
  double weight;
  BranchState branch;
};

/// Splits psi along the pointer sectors I (x) Pi_xi, ready sector included.
/// Branches of weight below kBranchPruneWeight are dropped.
inline std::vector<Branch> branch_decompose(const MeasurementModel& m, const StateVector& psi) {
  detail::require(psi.dim() == m.composite_dim(), "branch_decompose: state is not on the composite space");
  std::vector<Branch> out;
  for (const auto& label : m.pointer_Z.labels()) {
    const ComplexVector part = pointer_sector(m, label) * psi.amplitudes();
    const double weight = part.squaredNorm();
    if (weight < kBranchPruneWeight) continue;
    out.push_back(Branch{label, weight, BranchState{label, StateVector::normalized(part)}});
  }
  return out;
}

}  // namespace measlab
