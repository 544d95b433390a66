// Distance of a measurement model from accurate measurement, accurate
// preparation and pointer persistence.
//
// Pure-state metrics are worst-case amplitudes (operator norms), so each lies
// in [0, 1] and vanishes exactly when the corresponding calibration condition
// holds for every admissible input. Mixed-state metrics are Hilbert-Schmidt
// residuals ||rho - Q rho Q||_HS for one given initial density operator.
#pragma once

#include "measlab/linalg.hpp"
#include "measlab/model.hpp"

#include <optional>
#include <vector>

namespace measlab {

inline constexpr Eigen::Index kDefaultGrid = 64;
inline constexpr double kReadyMixedTolerance = 1e-8;

/// Uniform grid of `grid` points on [t_end, t_persist], endpoints included.
inline std::vector<double> persistence_times(const MeasurementModel& m, Eigen::Index grid) {
  detail::require(grid >= 2, "persistence grid must have at least 2 points");
  std::vector<double> times(static_cast<std::size_t>(grid));
  const double width = m.t_persist - m.t_end;
  for (Eigen::Index k = 0; k < grid; ++k) {
    times[static_cast<std::size_t>(k)] =
        m.t_end + width * static_cast<double>(k) / static_cast<double>(grid - 1);
  }
  times.back() = m.t_persist;
  return times;
}

/// Worst-case premeasurement outcome for one label.
struct MeasurementCalibration {
  double error = 0.0;
  /// Unit eigenvector of A (in P_lambda H_S) attaining the error.
  ComplexVector worst_input;
  /// (I (x) Pi_lambda) U_T (worst_input (x) phi_ready), unnormalized.
  ComplexVector branch;
};

/// Evaluates every metric of one model against a single cached eigensolve of H.
class ModelDynamics {
 public:
  explicit ModelDynamics(const MeasurementModel& m) : model_(m), propagator_(m.hamiltonian) {
    detail::require(m.hamiltonian.dim() == m.composite_dim(),
                    "metrics: hamiltonian does not act on the composite space");
    detail::require(m.ready_state.dim() == m.dim_M, "metrics: ready state dimension mismatch");
    detail::require(m.observable_A.dim() == m.dim_S && m.pointer_Z.dim() == m.dim_M,
                    "metrics: observable dimension mismatch");
  }

  const MeasurementModel& model() const { return model_; }
  const Propagator& propagator() const { return propagator_; }

  MeasurementCalibration measurement(const Label& lambda) const {
    require_outcome(lambda);
    const ComplexMatrix basis = projector_range(model_.observable_A.projector(lambda));
    detail::require(basis.cols() > 0, "measurement_calibration_error: empty eigenspace for " + lambda.str());
    const ComplexMatrix pi = pointer_sector(model_, lambda);
    const ComplexMatrix evolved = propagator_.apply(model_.t_end, attach_ready(model_, basis));
    const ComplexMatrix leaked = evolved - pi * evolved;

    Eigen::JacobiSVD<ComplexMatrix> svd(leaked, Eigen::ComputeThinV);
    MeasurementCalibration out;
    out.error = std::min(1.0, svd.singularValues()(0));
    const ComplexVector coeffs = svd.matrixV().col(0);
    out.worst_input = basis * coeffs;
    out.branch = pi * (evolved * coeffs);
    return out;
  }

  double preparation() const {
    const ComplexMatrix evolved = propagator_.apply(
        model_.t_end, attach_ready(model_, ComplexMatrix::Identity(model_.dim_S, model_.dim_S)));
    const ComplexMatrix id_S = ComplexMatrix::Identity(model_.dim_S, model_.dim_S);
    ComplexMatrix wrong = ComplexMatrix::Zero(model_.composite_dim(), model_.composite_dim());
    for (const auto& lambda : model_.observable_A.outcome_labels()) {
      if (!model_.pointer_Z.contains(lambda)) continue;
      wrong += tensor_product(id_S - model_.observable_A.projector(lambda),
                              model_.pointer_Z.projector(lambda));
    }
    return std::min(1.0, operator_norm(wrong * evolved));
  }

  /// Largest leakage of the normalized sector-lambda part of `state` out of
  /// the sector over the persistence grid. Throws on an empty branch.
  double persistence(const Label& lambda, const ComplexVector& state, Eigen::Index grid) const {
    require_outcome(lambda);
    detail::require(state.size() == model_.composite_dim(), "persistence_error: branch dimension mismatch");
    const ComplexMatrix pi = pointer_sector(model_, lambda);
    const ComplexVector inside = pi * state;
    detail::require(inside.squaredNorm() >= kBranchPruneWeight, "persistence_error: empty branch");
    const ComplexVector branch = inside / inside.norm();

    double worst = 0.0;
    for (double t : persistence_times(model_, grid)) {
      const ComplexVector moved = propagator_.apply(t - model_.t_end, branch);
      worst = std::max(worst, (moved - pi * moved).norm());
    }
    return std::min(1.0, worst);
  }

  /// Persistence of the worst-case measurement branch. A branch that never
  /// registers (weight below the pruning threshold) has nothing to persist
  /// and scores 0.
  double persistence(const Label& lambda, Eigen::Index grid) const {
    const MeasurementCalibration cal = measurement(lambda);
    if (cal.branch.squaredNorm() < kBranchPruneWeight) {
      detail::require(grid >= 2, "persistence grid must have at least 2 points");
      return 0.0;
    }
    return persistence(lambda, cal.branch, grid);
  }

 private:
  void require_outcome(const Label& lambda) const {
    detail::require(!lambda.is_ready() && model_.observable_A.contains(lambda),
                    "unknown outcome label " + lambda.str());
    detail::require(model_.pointer_Z.contains(lambda), "outcome " + lambda.str() + " has no pointer label");
  }

  MeasurementModel model_;
  Propagator propagator_;
};

/// ||(I (x) Pi_lambda^perp) U_T E_lambda||, E_lambda: psi -> psi (x) phi_ready on P_lambda H_S.
inline double measurement_calibration_error(const MeasurementModel& m, const Label& lambda) {
  return ModelDynamics(m).measurement(lambda).error;
}

/// ||[sum_lambda P_lambda^perp (x) Pi_lambda] U_T E||, E: psi -> psi (x) phi_ready on H_S.
inline double preparation_calibration_error(const MeasurementModel& m) {
  return ModelDynamics(m).preparation();
}

inline double persistence_error(const MeasurementModel& m, const Label& lambda,
                                Eigen::Index grid = kDefaultGrid) {
  return ModelDynamics(m).persistence(lambda, grid);
}

/// Persistence of a supplied branch; its sector-lambda part is normalized first.
inline double persistence_error(const MeasurementModel& m, const Label& lambda,
                                const ComplexVector& branch, Eigen::Index grid) {
  return ModelDynamics(m).persistence(lambda, branch, grid);
}

struct ErrorReport {
  std::vector<LabelValue> per_lambda_measurement;
  double preparation = 0.0;
  std::vector<LabelValue> per_lambda_persistence;
  double aggregate = 0.0;
  Eigen::Index grid_size = 0;

  double max_measurement() const { return max_value(per_lambda_measurement); }
  double max_persistence() const { return max_value(per_lambda_persistence); }
};

inline void finish_aggregate(ErrorReport& r) {
  r.aggregate = r.max_measurement() + r.preparation + r.max_persistence();
}

inline ErrorReport error_report(const MeasurementModel& m, Eigen::Index grid = kDefaultGrid) {
  const ModelDynamics dyn(m);
  ErrorReport r;
  r.grid_size = grid;
  for (const auto& lambda : m.observable_A.outcome_labels()) {
    r.per_lambda_measurement.push_back({lambda, dyn.measurement(lambda).error});
    r.per_lambda_persistence.push_back({lambda, dyn.persistence(lambda, grid)});
  }
  r.preparation = dyn.preparation();
  finish_aggregate(r);
  return r;
}

enum class ProjectorKind { SystemOutcome, PointerOutcome, PointerReady };

/// P_lambda (x) I_M, I_S (x) Pi_lambda, or I_S (x) Pi_ready on the composite space.
struct ExtendedProjector {
  ProjectorKind kind;
  Label label;
  ComplexMatrix matrix;
};

inline std::vector<ExtendedProjector> make_extended_projectors(const MeasurementModel& m) {
  std::vector<ExtendedProjector> out;
  for (const auto& lambda : m.observable_A.outcome_labels()) {
    out.push_back({ProjectorKind::SystemOutcome, lambda, system_sector(m, lambda)});
  }
  for (const auto& xi : m.pointer_Z.labels()) {
    if (xi.is_ready()) continue;
    out.push_back({ProjectorKind::PointerOutcome, xi, pointer_sector(m, xi)});
  }
  out.push_back({ProjectorKind::PointerReady, Label::ready(), pointer_sector(m, Label::ready())});
  return out;
}

/// ||rho - Q rho Q^dag||_HS; zero exactly when rho is supported in range(Q).
inline double subspace_residual(const ComplexMatrix& rho, const ComplexMatrix& q) {
  detail::require(rho.rows() == rho.cols(), "subspace_residual: operator is not square");
  detail::require(q.rows() == rho.rows() && q.cols() == rho.cols(),
                  "subspace_residual: projector dimension mismatch");
  return hs_norm(rho - q * rho * q.adjoint());
}

inline double subspace_residual(const DensityOperator& rho, const ComplexMatrix& q) {
  return subspace_residual(rho.matrix(), q);
}

inline double subspace_residual(const DensityOperator& rho, const ExtendedProjector& q) {
  return subspace_residual(rho.matrix(), q.matrix);
}

/// HS residual of the pure state |psi><psi| whose amplitude outside range(Q)
/// is `leak`: ||rho - Q rho Q||_HS = leak * sqrt(2 - leak^2).
inline double pure_residual_from_leakage(double leak) {
  const double l = std::clamp(leak, 0.0, 1.0);
  return l * std::sqrt(2.0 - l * l);
}

/// Mixed-state report for a given ready density operator rho0.
///
/// Measurement entries appear only for outcomes whose eigen-mixture
/// condition tr_M rho0 = P_lambda (tr_M rho0) P_lambda holds. Preparation is
/// the worst reduced-system residual of the normalized pointer branches at
/// T. Persistence follows each normalized branch over [T, T'].
inline ErrorReport mixed_error_report(const MeasurementModel& m, const DensityOperator& rho0,
                                      Eigen::Index grid = kDefaultGrid) {
  detail::require(rho0.dim() == m.composite_dim(), "mixed_error_report: density operator dimension mismatch");
  const ComplexMatrix ready = pointer_sector(m, Label::ready());
  detail::require(subspace_residual(rho0, ready) <= kReadyMixedTolerance,
                  "mixed_error_report: not a ready mixed state");

  const ModelDynamics dyn(m);
  const Propagator& prop = dyn.propagator();
  const ComplexMatrix u_end = prop.unitary(m.t_end);
  const ComplexMatrix rho_end = u_end * rho0.matrix() * u_end.adjoint();
  const ComplexMatrix system0 = partial_trace(rho0.matrix(), Subsystem::S, m.dim_S, m.dim_M);
  const std::vector<double> times = persistence_times(m, grid);

  ErrorReport r;
  r.grid_size = grid;
  for (const auto& lambda : m.observable_A.outcome_labels()) {
    const ComplexMatrix& p = m.observable_A.projector(lambda);
    const ComplexMatrix pi = pointer_sector(m, lambda);
    if (subspace_residual(system0, p) <= kReadyMixedTolerance) {
      r.per_lambda_measurement.push_back({lambda, std::min(1.0, subspace_residual(rho_end, pi))});
    }

    const ComplexMatrix sector = pi * rho_end * pi.adjoint();
    const double weight = sector.trace().real();
    if (weight < kBranchPruneWeight) {
      r.per_lambda_persistence.push_back({lambda, 0.0});
      continue;
    }
    const ComplexMatrix branch = sector / weight;
    const ComplexMatrix system_branch = partial_trace(branch, Subsystem::S, m.dim_S, m.dim_M);
    r.preparation = std::max(r.preparation, std::min(1.0, subspace_residual(system_branch, p)));

    double worst = 0.0;
    for (double t : times) {
      const ComplexMatrix u = prop.unitary(t - m.t_end);
      worst = std::max(worst, subspace_residual(u * branch * u.adjoint(), pi));
    }
    r.per_lambda_persistence.push_back({lambda, std::min(1.0, worst)});
  }
  finish_aggregate(r);
  return r;
}

/// The quantities of mixed_error_report for rho0 = |psi (x) phi_ready><.|,
/// computed on state vectors instead of density operators.
inline ErrorReport pure_state_report(const MeasurementModel& m, const StateVector& psi,
                                     Eigen::Index grid = kDefaultGrid) {
  detail::require(psi.dim() == m.dim_S, "pure_state_report: system state dimension mismatch");
  const ModelDynamics dyn(m);
  const Propagator& prop = dyn.propagator();
  const ComplexVector start = tensor_product(psi.amplitudes(), m.ready_state.amplitudes());
  const ComplexVector evolved = prop.apply(m.t_end, start);
  const std::vector<double> times = persistence_times(m, grid);

  ErrorReport r;
  r.grid_size = grid;
  for (const auto& lambda : m.observable_A.outcome_labels()) {
    const ComplexMatrix& p = m.observable_A.projector(lambda);
    const ComplexMatrix pi = pointer_sector(m, lambda);
    const ComplexVector inside = pi * evolved;
    if ((p * psi.amplitudes() - psi.amplitudes()).norm() <= kReadyMixedTolerance) {
      r.per_lambda_measurement.push_back(
          {lambda, pure_residual_from_leakage((evolved - inside).norm())});
    }
    if (inside.squaredNorm() < kBranchPruneWeight) {
      r.per_lambda_persistence.push_back({lambda, 0.0});
      continue;
    }
    const ComplexVector branch = inside / inside.norm();
    // Reshape the branch into its dim_S x dim_M coefficient matrix C, so the
    // reduced system state is C C^dag.
    const ComplexMatrix coeffs =
        Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            branch.data(), m.dim_S, m.dim_M);
    const ComplexMatrix reduced = coeffs * coeffs.adjoint();
    r.preparation = std::max(r.preparation, std::min(1.0, hs_norm(reduced - p * reduced * p)));

    double worst = 0.0;
    for (double t : times) {
      const ComplexVector moved = prop.apply(t - m.t_end, branch);
      worst = std::max(worst, (moved - pi * moved).norm());
    }
    r.per_lambda_persistence.push_back({lambda, std::min(1.0, pure_residual_from_leakage(worst))});
  }
  finish_aggregate(r);
  return r;
}

}  // namespace measlab
