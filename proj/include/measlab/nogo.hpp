// Finite-dimensional certificates for the impossibility of accurate
// measurement with persistent pointers.
//
// In finite dimension t -> <Phi, exp(-itH) Psi0> is an exponential
// polynomial, so exp(-itH) Psi0 stays in range(Q) on some open interval iff
// it stays there for all t iff the Krylov space span{H^k Psi0} lies in
// range(Q). krylov_confinement decides the last condition directly.
#pragma once

#include "measlab/linalg.hpp"
#include "measlab/metrics.hpp"
#include "measlab/model.hpp"
#include "measlab/random.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace measlab {

inline constexpr double kDefaultExactnessTolerance = 1e-6;

struct ConfinementResult {
  bool confined = true;
  /// Smallest k whose new Krylov direction leaves range(Q).
  std::optional<Eigen::Index> escape_order;
  /// Norm of the out-of-range part of that (unit) direction.
  double escape_norm = 0.0;
  /// Number of powers H^k Psi0 (k = 0, 1, ...) certified or examined.
  Eigen::Index powers_checked = 0;
  /// Dimension of the Krylov space explored.
  Eigen::Index krylov_dim = 0;
};

/// Decides whether span{H^k psi0 : k < dim} lies in range(q).
///
/// The Krylov basis is orthonormalized (Arnoldi, two Gram-Schmidt passes), so
/// each step tests the genuinely new direction of H^k psi0. The test is
/// invariant under H -> H + c I. A vanishing residual means the Krylov space
/// is H-invariant; every remaining power is then certified as well.
inline ConfinementResult krylov_confinement(const HermitianOperator& h, const ComplexVector& psi0,
                                            const ComplexMatrix& q, double tol) {
  const Eigen::Index d = h.dim();
  detail::require(tol > 0.0, "krylov_confinement: tolerance must be positive");
  detail::require(psi0.size() == d, "krylov_confinement: state dimension mismatch");
  detail::require(q.rows() == d && q.cols() == d, "krylov_confinement: projector dimension mismatch");
  detail::require(detail::max_abs(q * q - q) <= kProjectorTolerance,
                  "krylov_confinement: q is not idempotent");
  const double n0 = psi0.norm();
  detail::require(n0 > 0.0 && std::isfinite(n0), "krylov_confinement: null initial state");

  const ComplexMatrix& hm = h.matrix();
  const Complex mean = hm.trace() / static_cast<double>(d);
  const double spread = (hm - mean * ComplexMatrix::Identity(d, d)).norm();
  const double breakdown = 1e-11 * spread + 64.0 * std::numeric_limits<double>::epsilon() * hm.norm();

  ConfinementResult out;
  ComplexMatrix basis(d, d);
  basis.col(0) = psi0 / n0;
  out.krylov_dim = 1;
  out.powers_checked = 1;

  auto leak = [&](const ComplexVector& v) { return (v - q * v).norm(); };

  double first = leak(basis.col(0));
  if (first > tol) {
    out.confined = false;
    out.escape_order = 0;
    out.escape_norm = first;
    return out;
  }

  for (Eigen::Index k = 1; k < d; ++k) {
    ComplexVector w = hm * basis.col(k - 1);
    for (int pass = 0; pass < 2; ++pass) {
      const auto known = basis.leftCols(k);
      w -= known * (known.adjoint() * w);
    }
    const double residual = w.norm();
    if (residual <= breakdown) break;
    basis.col(k) = w / residual;
    out.krylov_dim = k + 1;
    out.powers_checked = k + 1;
    const double escape = leak(basis.col(k));
    if (escape > tol) {
      out.confined = false;
      out.escape_order = k;
      out.escape_norm = escape;
      return out;
    }
  }
  out.powers_checked = d;
  return out;
}

inline ConfinementResult krylov_confinement(const HermitianOperator& h, const StateVector& psi0,
                                            const ComplexMatrix& q, double tol) {
  return krylov_confinement(h, psi0.amplitudes(), q, tol);
}

struct ProbeValue {
  double time;
  double leakage;
};

struct ProbeReport {
  double max_on_interval = 0.0;
  std::vector<ProbeValue> probes;
};

/// Samples ||Q^perp U_t psi0|| on a uniform grid of [t_start, t_end] and at
/// each probe time.
inline ProbeReport interval_confinement_probe(const HermitianOperator& h, const ComplexVector& psi0,
                                              const ComplexMatrix& q, double t_start, double t_end,
                                              Eigen::Index grid, const std::vector<double>& probe_times) {
  detail::require(grid >= 2, "interval_confinement_probe: grid must have at least 2 points");
  detail::require(psi0.size() == h.dim() && q.rows() == h.dim() && q.cols() == h.dim(),
                  "interval_confinement_probe: dimension mismatch");
  const ComplexVector start = psi0 / psi0.norm();
  const Propagator prop(h);
  auto leak = [&](double t) {
    const ComplexVector v = prop.apply(t, start);
    return (v - q * v).norm();
  };

  ProbeReport out;
  for (Eigen::Index k = 0; k < grid; ++k) {
    const double t = k + 1 == grid ? t_end
                                   : t_start + (t_end - t_start) * static_cast<double>(k) /
                                                   static_cast<double>(grid - 1);
    out.max_on_interval = std::max(out.max_on_interval, leak(t));
  }
  for (double t : probe_times) out.probes.push_back({t, leak(t)});
  return out;
}

struct ForcingResult {
  /// ||(I (x) Pi_lambda) Psi0|| with Psi0 = U_T^{-1} branch.
  double forcing = 0.0;
  ConfinementResult confinement;
};

/// Evolves a sector-lambda branch back to t = 0 and measures how much of it
/// sits in the same pointer sector there. Confinement forces the value to 1.
inline ForcingResult ready_state_forcing(const MeasurementModel& m, const Label& lambda,
                                         const BranchState& branch, double tol) {
  detail::require(branch.label == lambda, "ready_state_forcing: branch label differs from lambda");
  detail::require(branch.state.dim() == m.composite_dim(), "ready_state_forcing: branch dimension mismatch");
  const ComplexMatrix pi = pointer_sector(m, lambda);
  const ComplexVector& b = branch.state.amplitudes();
  detail::require((b - pi * b).norm() <= tol,
                  "ready_state_forcing: branch is not in the pointer sector " + lambda.str());

  const Propagator prop(m.hamiltonian);
  const ComplexVector psi0 = prop.apply(-m.t_end, b);
  ForcingResult out;
  out.confinement = krylov_confinement(m.hamiltonian, psi0, pi, tol);
  out.forcing = std::min(1.0, (pi * psi0).norm());
  return out;
}

/// Per-outcome evidence gathered for a certificate.
struct LambdaGate {
  Label label;
  double measurement_error = 1.0;
  double persistence_error = 0.0;
  /// Krylov confinement of the worst-case branch; absent for an empty branch.
  std::optional<bool> confined;
  std::optional<double> forcing;
  /// ||Pi_lambda phi_ready||.
  double ready_overlap = 0.0;
  bool gated = false;
};

enum class Verdict { ContradictionEstablished, Inconclusive };

inline const char* to_string(Verdict v) {
  return v == Verdict::ContradictionEstablished ? "contradiction_established" : "inconclusive";
}

struct ContradictionCertificate {
  /// Forcing of every outcome passing the accuracy, persistence and
  /// confinement gates.
  std::vector<LabelValue> per_lambda_forcing;
  /// sum over forced lambda of ||Pi_lambda phi_ready||^2, minus 1 if any was forced.
  double orthogonality_defect = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<LambdaGate> gates;
  double tolerance = kDefaultExactnessTolerance;
};

/// For each outcome whose worst-case branch is calibrated to within `tol`,
/// persists on the grid to within `tol`, and is Krylov-confined to its
/// pointer sector, records the ready-state forcing. A forced outcome with
/// forcing > 1 - tol places U_T^{-1} of its branch, hence phi_ready, in
/// Pi_lambda H_M, which no valid ready state satisfies: the contradiction is
/// established. Otherwise the certificate is inconclusive.
inline ContradictionCertificate contradiction_certificate(const MeasurementModel& m,
                                                          double tol = kDefaultExactnessTolerance,
                                                          Eigen::Index grid = kDefaultGrid) {
  const ModelDynamics dyn(m);
  ContradictionCertificate cert;
  cert.tolerance = tol;
  bool any_forced = false;
  bool established = false;

  for (const auto& lambda : m.observable_A.outcome_labels()) {
    LambdaGate gate{lambda};
    gate.ready_overlap = (m.pointer_Z.projector(lambda) * m.ready_state.amplitudes()).norm();
    const MeasurementCalibration cal = dyn.measurement(lambda);
    gate.measurement_error = cal.error;

    if (cal.branch.squaredNorm() >= kBranchPruneWeight) {
      gate.persistence_error = dyn.persistence(lambda, cal.branch, grid);
      const BranchState branch{lambda, StateVector::normalized(cal.branch)};
      const ForcingResult forced = ready_state_forcing(m, lambda, branch, tol);
      gate.confined = forced.confinement.confined;
      gate.forcing = forced.forcing;
      gate.gated = gate.measurement_error <= tol && gate.persistence_error <= tol && *gate.confined;
    }

    if (gate.gated) {
      any_forced = true;
      cert.per_lambda_forcing.push_back({lambda, *gate.forcing});
      cert.orthogonality_defect += gate.ready_overlap * gate.ready_overlap;
      if (*gate.forcing > 1.0 - tol) established = true;
    }
    cert.gates.push_back(gate);
  }
  if (any_forced) cert.orthogonality_defect -= 1.0;
  cert.verdict = established ? Verdict::ContradictionEstablished : Verdict::Inconclusive;
  return cert;
}

/// Outcome of checking many random coupled models against the exactness gates.
struct SweepSummary {
  std::size_t models = 0;
  std::size_t valid_models = 0;
  /// Models where some outcome has measurement error <= tol.
  std::size_t accurate = 0;
  /// Models where some outcome is both accurate and Krylov-confined.
  std::size_t accurate_and_confined = 0;
  /// Valid models where some outcome is accurate, confined and persists on the grid.
  std::size_t passing_both_gates = 0;
  std::size_t contradictions = 0;
  double min_measurement_error = 1.0;
};

/// Draws `count` coupled models from the template, model i from stream (seed, i).
inline SweepSummary exactness_sweep(const MeasurementModel& tmpl, std::size_t count, std::uint64_t seed,
                                    double tol = kDefaultExactnessTolerance,
                                    Eigen::Index grid = kDefaultGrid) {
  SweepSummary s;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_stream(seed, i);
    const MeasurementModel m = random_coupled_model(tmpl, rng);
    const bool valid = validate_model(m).ok();
    const ContradictionCertificate cert = contradiction_certificate(m, tol, grid);
    bool accurate = false;
    bool confined = false;
    bool gated = false;
    for (const auto& g : cert.gates) {
      s.min_measurement_error = std::min(s.min_measurement_error, g.measurement_error);
      if (g.measurement_error <= tol) {
        accurate = true;
        if (g.confined.value_or(false)) confined = true;
      }
      if (g.gated) gated = true;
    }
    ++s.models;
    if (valid) ++s.valid_models;
    if (accurate) ++s.accurate;
    if (confined) ++s.accurate_and_confined;
    if (valid && gated) ++s.passing_both_gates;
    if (cert.verdict == Verdict::ContradictionEstablished) ++s.contradictions;
  }
  return s;
}

}  // namespace measlab
