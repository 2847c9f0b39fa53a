#pragma once

#include <string>

#include "geoflow/fields.hpp"

namespace geoflow {

enum class IntegratorMethod { kRk4Fixed, kRk45Adaptive };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::kRk4Fixed;
  double dt = 1e-3;          // fixed-step size (rk4)
  double rel_tol = 1e-9;     // adaptive tolerances (rk45)
  double abs_tol = 1e-12;
  long max_steps = 10'000'000;

  static IntegratorConfig rk4(double dt = 1e-3);
  static IntegratorConfig rk45(double rel_tol = 1e-9, double abs_tol = 1e-12);

  void validate() const;
  std::string method_name() const;
};

/// Sampled flow Φ_τ of a field: strictly increasing times, one coordinate
/// vector per time, endpoint landed exactly on t_end.
struct Trajectory {
  int n = 0;
  std::vector<double> times;
  std::vector<RVector> points;
  std::string method;
  /// Set when integrating backwards; the flow may leave the state set there,
  /// so positivity assertions are skipped.
  bool leaves_state_space_possible = false;

  const RVector& front_point() const { return points.front(); }
  const RVector& back_point() const { return points.back(); }
  CoherencePoint back_coherence() const { return CoherencePoint(n, points.back()); }
};

/// Numerical flow of a polynomial field from x0 over [0, t_end] (t_end < 0
/// allowed; the trajectory is then flagged).
Trajectory integrate(const PolyField& f, const CoherencePoint& x0, double t_end,
                     const IntegratorConfig& cfg = IntegratorConfig{});

/// Closed-form flow of an affine field via the augmented matrix exponential:
/// x(t) = exp(t [c1 c0; 0 0]) (x0, 1), first m components.
CoherencePoint exact_affine_flow(const PolyField& f, const CoherencePoint& x0,
                                 double t, double affine_tol = kDefaultAffineTol);

/// Column-stacking superoperator of the generator
/// L(rho) = -i[H,rho] - (1/2){V,rho} + sum v rho v^dagger.
CMatrix lindblad_superoperator(const GklsModel& model);

/// Channel Φ_t = exp(t Lhat) as a superoperator matrix.
CMatrix channel_superoperator(const GklsModel& model, double t);

/// Ground-truth evolution in matrix space: exp(t Lhat) applied to vec(rho0).
/// Requires Tr(rho0) = 1.
CMatrix lindblad_matrix_oracle(const GklsModel& model, const CMatrix& rho0,
                               double t, double trace_tol = 1e-10);

struct OracleReport {
  double max_deviation = 0.0;  // sup over sampled tau of Frobenius distance
  int samples = 0;
};

/// Integrates Γ in coordinates and compares against the matrix-space oracle
/// on an even tau grid over [0, t].
OracleReport oracle_consistency(const GklsModel& model, const CoherencePoint& x0,
                                double t, const IntegratorConfig& cfg,
                                const HermitianBasis& basis,
                                const StructureConstants& sc,
                                int sample_count = 50);

/// Flow of Y_a + X_b (a, b traceless self-adjoint) through the nonlinear
/// SL(n,C) action: α_{g_t}(ρ) with g_t = exp(t(a - i b)/2). Defined on
/// states, where it is complete and rank-preserving.
CoherencePoint xy_flow(const CMatrix& a, const CMatrix& b,
                       const CoherencePoint& p, double t,
                       const HermitianBasis& basis);

struct SemigroupReport {
  double max_composition_deviation = 0.0;  // ||Φ_{t1+t2} - Φ_{t1}∘Φ_{t2}|| on samples
  double trace_preservation_residual = 0.0;
  double choi_min_eigenvalue = 0.0;        // min over the checked times
  bool cptp = false;
  int samples = 0;
};

/// Checks the semigroup law on sampled states and certifies CPTP of Φ_t at
/// t1, t2 and t1 + t2 via the Choi spectrum of the exponentiated channel.
SemigroupReport verify_semigroup(const GklsModel& model, double t1, double t2,
                                 int samples, std::uint64_t seed,
                                 double cp_tol = 1e-8);

}  // namespace geoflow
