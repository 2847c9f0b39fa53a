#include "geoflow/flow.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace geoflow {

IntegratorConfig IntegratorConfig::rk4(double dt) {
  IntegratorConfig cfg;
  cfg.method = IntegratorMethod::kRk4Fixed;
  cfg.dt = dt;
  cfg.validate();
  return cfg;
}

IntegratorConfig IntegratorConfig::rk45(double rel_tol, double abs_tol) {
  IntegratorConfig cfg;
  cfg.method = IntegratorMethod::kRk45Adaptive;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  cfg.validate();
  return cfg;
}

void IntegratorConfig::validate() const {
  if (dt <= 0 || rel_tol <= 0 || abs_tol <= 0 || max_steps <= 0)
    throw InvariantError("IntegratorConfig: step and tolerances must be positive");
}

std::string IntegratorConfig::method_name() const {
  return method == IntegratorMethod::kRk4Fixed ? "rk4-fixed" : "rk45-adaptive";
}

namespace {

RVector rk4_step(const PolyField& f, const RVector& x, double h) {
  const RVector k1 = f.evaluate(x);
  const RVector k2 = f.evaluate(RVector(x + 0.5 * h * k1));
  const RVector k3 = f.evaluate(RVector(x + 0.5 * h * k2));
  const RVector k4 = f.evaluate(RVector(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_finite(const RVector& x) {
  if (!x.allFinite()) throw NumericalError("integrate: state became non-finite");
}

Trajectory integrate_rk4(const PolyField& f, const RVector& x0, double t_end,
                         const IntegratorConfig& cfg) {
  Trajectory traj;
  const double direction = t_end >= 0 ? 1.0 : -1.0;
  const double span = std::abs(t_end);
  long nsteps = std::max<long>(1, static_cast<long>(std::ceil(span / cfg.dt)));
  if (span == 0.0) nsteps = 0;
  if (nsteps > cfg.max_steps)
    throw NumericalError("integrate: step budget exceeded");
  const double h = nsteps > 0 ? direction * span / double(nsteps) : 0.0;
  RVector x = x0;
  traj.times.push_back(0.0);
  traj.points.push_back(x);
  for (long s = 1; s <= nsteps; ++s) {
    x = rk4_step(f, x, h);
    check_finite(x);
    traj.times.push_back(h * double(s));
    traj.points.push_back(x);
  }
  if (nsteps > 0) traj.times.back() = t_end;  // kill accumulated roundoff
  return traj;
}

// Dormand-Prince 5(4) pair.
Trajectory integrate_rk45(const PolyField& f, const RVector& x0, double t_end,
                          const IntegratorConfig& cfg) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Trajectory traj;
  const double direction = t_end >= 0 ? 1.0 : -1.0;
  const double span = std::abs(t_end);
  RVector x = x0;
  double t = 0.0;
  traj.times.push_back(0.0);
  traj.points.push_back(x);
  if (span == 0.0) return traj;

  double h = direction * std::min(span, 1e-2);
  long steps = 0;
  RVector k1 = f.evaluate(x);
  while (std::abs(t) < span) {
    if (++steps > cfg.max_steps)
      throw NumericalError("integrate: step budget exceeded");
    if (std::abs(t) + std::abs(h) > span) h = direction * (span - std::abs(t));
    const RVector k2 = f.evaluate(RVector(x + h * (a21 * k1)));
    const RVector k3 = f.evaluate(RVector(x + h * (a31 * k1 + a32 * k2)));
    const RVector k4 = f.evaluate(RVector(x + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const RVector k5 =
        f.evaluate(RVector(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const RVector k6 = f.evaluate(
        RVector(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const RVector x5 = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const RVector k7 = f.evaluate(x5);
    const RVector err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double scale = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      const double tol =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x(i)), std::abs(x5(i)));
      scale = std::max(scale, std::abs(err(i)) / tol);
    }
    if (scale <= 1.0) {
      t += h;
      x = x5;
      k1 = k7;  // FSAL
      check_finite(x);
      traj.times.push_back(t);
      traj.points.push_back(x);
    }
    const double factor =
        scale > 0 ? 0.9 * std::pow(scale, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
    if (std::abs(h) < 1e-14 * span)
      throw NumericalError("integrate: step size underflow");
  }
  traj.times.back() = t_end;
  return traj;
}

}  // namespace

Trajectory integrate(const PolyField& f, const CoherencePoint& x0, double t_end,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  if (f.coord_count() != x0.x.size())
    throw InvariantError("integrate: field/point dimension mismatch");
  Trajectory traj = cfg.method == IntegratorMethod::kRk4Fixed
                        ? integrate_rk4(f, x0.x, t_end, cfg)
                        : integrate_rk45(f, x0.x, t_end, cfg);
  traj.n = x0.n;
  traj.method = cfg.method_name();
  traj.leaves_state_space_possible = t_end < 0;
  return traj;
}

CoherencePoint exact_affine_flow(const PolyField& f, const CoherencePoint& x0,
                                 double t, double affine_tol) {
  if (!f.is_affine(affine_tol))
    throw InvariantError("exact_affine_flow: field is not affine");
  const int m = f.coord_count();
  if (m != x0.x.size())
    throw InvariantError("exact_affine_flow: dimension mismatch");
  RMatrix aug = RMatrix::Zero(m + 1, m + 1);
  aug.topLeftCorner(m, m) = f.linear();
  aug.topRightCorner(m, 1) = f.constant();
  const RMatrix propagator = (t * aug).exp();
  RVector x0_aug(m + 1);
  x0_aug.head(m) = x0.x;
  x0_aug(m) = 1.0;
  return CoherencePoint(x0.n, (propagator * x0_aug).head(m));
}

CMatrix lindblad_superoperator(const GklsModel& model) {
  const int n = model.n;
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix& h = model.hamiltonian;
  const CMatrix& v = model.v_sum();
  auto kron = [n](const CMatrix& a, const CMatrix& b) {
    CMatrix out(n * n, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.block(i * n, j * n, n, n) = a(i, j) * b;
    return out;
  };
  // column-stacking: vec(A X B) = (B^T ⊗ A) vec(X)
  const Complex i_unit(0.0, 1.0);
  CMatrix lhat = -i_unit * (kron(id, h) - kron(h.transpose(), id));
  lhat -= 0.5 * (kron(id, v) + kron(v.transpose(), id));
  for (const CMatrix& vk : model.kraus.ops())
    lhat += kron(vk.conjugate(), vk);
  return lhat;
}

CMatrix channel_superoperator(const GklsModel& model, double t) {
  return CMatrix(t * lindblad_superoperator(model)).exp();
}

CMatrix lindblad_matrix_oracle(const GklsModel& model, const CMatrix& rho0,
                               double t, double trace_tol) {
  const int n = model.n;
  if (rho0.rows() != n || rho0.cols() != n)
    throw InvariantError("lindblad_matrix_oracle: dimension mismatch");
  if (std::abs(rho0.trace() - Complex(1.0, 0.0)) > trace_tol)
    throw InvariantError("lindblad_matrix_oracle: Tr(rho0) != 1");
  const CMatrix phi = channel_superoperator(model, t);
  const Eigen::Map<const Eigen::VectorXcd> v0(rho0.data(), n * n);
  const Eigen::VectorXcd vt = phi * v0;
  return Eigen::Map<const CMatrix>(vt.data(), n, n);
}

OracleReport oracle_consistency(const GklsModel& model, const CoherencePoint& x0,
                                double t, const IntegratorConfig& cfg,
                                const HermitianBasis& basis,
                                const StructureConstants& sc, int sample_count) {
  const PolyField gamma = gkls_field(model, basis, sc);
  const CMatrix rho0 = to_matrix(x0, basis);
  const CMatrix lhat = lindblad_superoperator(model);
  OracleReport report;
  report.samples = sample_count;
  for (int s = 0; s <= sample_count; ++s) {
    const double tau = t * double(s) / double(sample_count);
    const Trajectory traj = integrate(gamma, x0, tau, cfg);
    const CMatrix from_field = to_matrix(traj.back_coherence(), basis);
    const CMatrix phi = CMatrix(tau * lhat).exp();
    const Eigen::Map<const Eigen::VectorXcd> v0(rho0.data(), model.n * model.n);
    const Eigen::VectorXcd vt = phi * v0;
    const CMatrix from_oracle = Eigen::Map<const CMatrix>(vt.data(), model.n, model.n);
    report.max_deviation =
        std::max(report.max_deviation, frobenius_distance(from_field, from_oracle));
  }
  return report;
}

CoherencePoint xy_flow(const CMatrix& a, const CMatrix& b,
                       const CoherencePoint& p, double t,
                       const HermitianBasis& basis) {
  const int n = basis.dim();
  if (a.rows() != n || b.rows() != n)
    throw InvariantError("xy_flow: operator dimension mismatch");
  const Complex i_unit(0.0, 1.0);
  // The curve alpha_{exp(t(a - i b)/2)} integrates Y_a + X_b.
  const CMatrix g = CMatrix(0.5 * t * (a - i_unit * b)).exp();
  return sl_action(g, p, basis);
}

SemigroupReport verify_semigroup(const GklsModel& model, double t1, double t2,
                                 int samples, std::uint64_t seed, double cp_tol) {
  if (t1 < 0 || t2 < 0)
    throw InvariantError("verify_semigroup: t1, t2 must be non-negative");
  const int n = model.n;
  const CMatrix lhat = lindblad_superoperator(model);
  const CMatrix phi1 = CMatrix(t1 * lhat).exp();
  const CMatrix phi2 = CMatrix(t2 * lhat).exp();
  const CMatrix phi12 = CMatrix((t1 + t2) * lhat).exp();

  SemigroupReport report;
  report.samples = samples;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const CMatrix rho = sample_density_matrix(n, n, rng);
    const Eigen::Map<const Eigen::VectorXcd> v(rho.data(), n * n);
    const Eigen::VectorXcd direct = phi12 * v;
    const Eigen::VectorXcd composed = phi1 * (phi2 * v);
    report.max_composition_deviation = std::max(
        report.max_composition_deviation, (direct - composed).norm());
  }
  // trace preservation: vec(I)^dagger Phi = vec(I)^dagger
  Eigen::VectorXcd vec_id = Eigen::VectorXcd::Zero(n * n);
  for (int i = 0; i < n; ++i) vec_id(i * n + i) = 1.0;
  report.trace_preservation_residual =
      (phi12.adjoint() * vec_id - vec_id).norm();

  report.choi_min_eigenvalue = std::min(
      {choi_min_eigenvalue(choi_matrix(phi1)),
       choi_min_eigenvalue(choi_matrix(phi2)),
       choi_min_eigenvalue(choi_matrix(phi12))});
  report.cptp = report.choi_min_eigenvalue >= -cp_tol &&
                report.trace_preservation_residual < 1e-8;
  return report;
}

}  // namespace geoflow
