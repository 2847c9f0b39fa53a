// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Exit code 0 iff all criteria pass.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <vector>

#include "test_helpers.hpp"

using namespace geoflow;
using gftest::kI;
using gftest::pauli;

namespace {

struct Criterion {
  int id;
  std::string label;
  std::function<bool(std::string&)> run;
  double runtime_limit_s;  // <= 0: no limit stated
};

const HermitianBasis kBasis2 = HermitianBasis::gellmann(2);
const StructureConstants kSc2 = StructureConstants::from_basis(kBasis2);
const HermitianBasis kBasis3 = HermitianBasis::gellmann(3);
const StructureConstants kSc3 = StructureConstants::from_basis(kBasis3);

CoherencePoint pauli_point(double x1, double x2, double x3) {
  RVector xp(3);
  xp << x1, x2, x3;
  return CoherencePoint(2, pauli_to_orthonormal(xp));
}

std::vector<GklsModel> example_models() {
  std::vector<GklsModel> out;
  out.push_back(gftest::phase_damping_model(1.0));
  out.push_back(gftest::energy_damping_model(1.0));
  out.push_back(build_generator(gftest::driven_phase_damping_family()));
  std::mt19937_64 rng(2024);
  RandomUnitaryFamily ru;
  ru.alphas = {0.6, 1.1};
  ru.hermitians = {kBasis3.element(2), kBasis3.element(7)};
  ru.beta = 0.5;
  ru.probs = {0.4, 0.6};
  ru.unitaries = {haar_unitary(3, rng), haar_unitary(3, rng)};
  ru.hamiltonian = random_hermitian(3, rng);
  out.push_back(build_generator(ru));
  return out;
}

bool criterion1_phase_damping(std::string& detail) {
  const PolyField gamma = gkls_field(gftest::phase_damping_model(1.0), kBasis2, kSc2);
  double worst = 0.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(-0.55, 0.55);
  std::vector<RVector> starts;
  {
    RVector x(3);
    x << 1.0, 0.0, 0.0;
    starts.push_back(x);
  }
  for (int s = 0; s < 3; ++s) {
    RVector x(3);
    x << uni(rng), uni(rng), uni(rng);
    starts.push_back(x);
  }
  for (const RVector& x0p : starts) {
    const Trajectory traj =
        integrate(gamma, CoherencePoint(2, pauli_to_orthonormal(x0p)), 5.0,
                  IntegratorConfig::rk4(1e-3));
    for (size_t i = 0; i < traj.times.size(); ++i) {
      const double tau = traj.times[i];
      const RVector xp = orthonormal_to_pauli(traj.points[i]);
      worst = std::max(worst, std::abs(xp(0) - x0p(0) * std::exp(-2.0 * tau)));
      worst = std::max(worst, std::abs(xp(1) - x0p(1) * std::exp(-2.0 * tau)));
      worst = std::max(worst, std::abs(xp(2) - x0p(2)));
    }
  }
  const FixedPointSet fps = fixed_points(gamma);
  const bool axis_ok = fps.solvable && fps.dimension == 1 &&
                       fps.particular.norm() < 1e-12 &&
                       std::abs(std::abs(fps.null_basis(2, 0)) - 1.0) < 1e-12 &&
                       fps.residual < 1e-9;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "trajectory error %.3e (tol 1e-8), fixed set = x3 axis %s, residual %.3e",
                worst, axis_ok ? "yes" : "NO", fps.residual);
  detail = buf;
  return worst < 1e-8 && axis_ok;
}

bool criterion2_energy_damping(std::string& detail) {
  const GklsModel model = gftest::energy_damping_model(1.0);
  const PolyField gamma_pauli =
      to_pauli_convention(gkls_field(model, kBasis2, kSc2));
  RVector expected_c0(3);
  expected_c0 << 0.0, 0.0, 4.0;
  RMatrix expected_c1 = RMatrix::Zero(3, 3);
  expected_c1(0, 0) = expected_c1(1, 1) = -2.0;
  expected_c1(2, 2) = -4.0;
  const double table_err = std::max(
      (gamma_pauli.constant() - expected_c0).cwiseAbs().maxCoeff(),
      (gamma_pauli.linear() - expected_c1).cwiseAbs().maxCoeff());

  const FixedPointSet fps = fixed_points(gkls_field(model, kBasis2, kSc2));
  const RVector fp_pauli = orthonormal_to_pauli(fps.particular);
  const bool fp_ok = fps.solvable && fps.dimension == 0 &&
                     std::abs(fp_pauli(0)) < 1e-9 && std::abs(fp_pauli(1)) < 1e-9 &&
                     std::abs(fp_pauli(2) - 1.0) < 1e-9;

  // decay rates: oracle superoperator spectrum must be {0, -2, -2, -4},
  // and the integrated trajectory must follow those exponentials
  Eigen::ComplexEigenSolver<CMatrix> es(lindblad_superoperator(model));
  RVector re = es.eigenvalues().real();
  std::sort(re.data(), re.data() + re.size());
  double rate_err = std::abs(re(0) + 4.0);
  rate_err = std::max(rate_err, std::abs(re(1) + 2.0));
  rate_err = std::max(rate_err, std::abs(re(2) + 2.0));
  rate_err = std::max(rate_err, std::abs(re(3)));
  rate_err = std::max(rate_err, es.eigenvalues().imag().cwiseAbs().maxCoeff());

  RVector x0p(3);
  x0p << 0.5, -0.4, -0.8;
  const Trajectory traj =
      integrate(gkls_field(model, kBasis2, kSc2),
                CoherencePoint(2, pauli_to_orthonormal(x0p)), 5.0,
                IntegratorConfig::rk4(1e-3));
  double traj_err = 0.0;
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const double tau = traj.times[i];
    const RVector xp = orthonormal_to_pauli(traj.points[i]);
    traj_err = std::max(traj_err, std::abs(xp(0) - x0p(0) * std::exp(-2.0 * tau)));
    traj_err = std::max(traj_err, std::abs(xp(1) - x0p(1) * std::exp(-2.0 * tau)));
    traj_err = std::max(
        traj_err, std::abs(xp(2) - (1.0 + (x0p(2) - 1.0) * std::exp(-4.0 * tau))));
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "table error %.3e (exact), fixed point (0,0,1) %s, rates {-2,-2,-4} "
                "error %.3e, trajectory error %.3e (tol 1e-8)",
                table_err, fp_ok ? "yes" : "NO", rate_err, traj_err);
  detail = buf;
  return table_err < 1e-12 && fp_ok && rate_err < 1e-8 && traj_err < 1e-8;
}

bool criterion3_driven_phase_damping(std::string& detail) {
  const SemigroupFamily fam = gftest::driven_phase_damping_family();
  const GklsModel model = build_generator(fam);
  const PolyField gamma = gkls_field(model, kBasis2, kSc2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-0.55, 0.55);
  double worst = 0.0;
  for (int s = 0; s < 4; ++s) {
    RVector x0p(3);
    x0p << uni(rng), uni(rng), uni(rng);
    const Trajectory traj =
        integrate(gamma, CoherencePoint(2, pauli_to_orthonormal(x0p)), 5.0,
                  IntegratorConfig::rk4(1e-3));
    for (size_t i = 0; i < traj.times.size(); ++i) {
      const RVector expected =
          gftest::driven_phase_damping_flow(x0p, traj.times[i]);
      worst = std::max(worst, (orthonormal_to_pauli(traj.points[i]) - expected)
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  }
  const SInfinityProbe probe =
      s_infinity_probe(fam, 10.0, 12, 7, kBasis2, kSc2);
  const bool singleton =
      probe.classification == SInfinityClass::kSingletonMaximallyMixed;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "closed-form error %.3e (tol 1e-8), S-infinity = %s",
                worst, to_string(probe.classification).c_str());
  detail = buf;
  return worst < 1e-8 && singleton;
}

bool criterion4_commutation(std::string& detail) {
  double worst = 0.0;
  for (int n : {2, 3, 4}) {
    const HermitianBasis basis = HermitianBasis::gellmann(n);
    const StructureConstants sc = StructureConstants::from_basis(basis);
    std::mt19937_64 rng(40 + n);
    for (int pair = 0; pair < 100; ++pair) {
      const CMatrix a = random_traceless_hermitian(n, rng);
      const CMatrix b = random_traceless_hermitian(n, rng);
      const CMatrix ab = lie_product(a, b);
      const PolyField xa = hamiltonian_field(a, basis, sc);
      const PolyField xb = hamiltonian_field(b, basis, sc);
      const PolyField ya = gradient_field(a, basis, sc);
      const PolyField yb = gradient_field(b, basis, sc);
      const PolyField x_ab = hamiltonian_field(ab, basis, sc);
      const PolyField y_ab = gradient_field(ab, basis, sc);
      worst = std::max(worst, max_coeff_difference(bracket(xa, xb), x_ab));
      worst = std::max(worst, max_coeff_difference(bracket(xa, yb), y_ab));
      worst = std::max(worst, max_coeff_difference(bracket(ya, yb), x_ab * (-1.0)));
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "max coefficient deviation %.3e (tol 1e-10) over 3x100 pairs", worst);
  detail = buf;
  return worst < 1e-10;
}

bool criterion5_cancellation(std::string& detail) {
  double worst_gamma_quad = 0.0;
  double min_y_quad = 1e300;
  int checked_y = 0;
  for (int n : {2, 3, 4}) {
    const HermitianBasis basis = HermitianBasis::gellmann(n);
    const StructureConstants sc = StructureConstants::from_basis(basis);
    std::mt19937_64 rng(50 + n);
    std::uniform_int_distribution<int> count_dist(1, n * n - 1);
    for (int trial = 0; trial < 100; ++trial) {
      const GklsModel model = gftest::random_model(n, count_dist(rng), rng, 0.7);
      const GklsDecomposition dec = gkls_decomposition(model, basis, sc);
      worst_gamma_quad = std::max(worst_gamma_quad, dec.total.max_abs_quadratic());
      const CMatrix& v = model.v_sum();
      const CMatrix traceless =
          v - (v.trace() / double(n)) * CMatrix::Identity(n, n);
      if (traceless.norm() > 1e-8) {
        min_y_quad = std::min(min_y_quad, dec.gradient_part.max_abs_quadratic());
        ++checked_y;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max Gamma quadratic %.3e (tol 1e-12); min Y quadratic %.3e > 0 "
                "on %d models with V outside span{I}",
                worst_gamma_quad, min_y_quad, checked_y);
  detail = buf;
  return worst_gamma_quad < 1e-12 && min_y_quad > 0.0 && checked_y > 0;
}

bool criterion6_oracle(std::string& detail) {
  const IntegratorConfig cfg = IntegratorConfig::rk4(1e-3);
  double worst = 0.0;
  double worst_exact = 0.0;  // third route: closed-form affine flow vs oracle
  auto run_one = [&](const GklsModel& model, const HermitianBasis& basis,
                     const StructureConstants& sc, std::uint64_t seed) {
    const CoherencePoint x0 = sample_state(model.n, model.n, seed, basis);
    worst = std::max(
        worst, oracle_consistency(model, x0, 5.0, cfg, basis, sc, 25).max_deviation);
    const PolyField gamma = gkls_field(model, basis, sc);
    for (double tau : {1.0, 3.0, 5.0}) {
      const CMatrix via_exact =
          to_matrix(exact_affine_flow(gamma, x0, tau), basis);
      const CMatrix via_oracle =
          lindblad_matrix_oracle(model, to_matrix(x0, basis), tau);
      worst_exact =
          std::max(worst_exact, frobenius_distance(via_exact, via_oracle));
    }
  };
  for (const GklsModel& model : example_models())
    run_one(model, model.n == 2 ? kBasis2 : kBasis3,
            model.n == 2 ? kSc2 : kSc3, 60);
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> count_dist(1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const GklsModel model = gftest::random_model(3, count_dist(rng), rng, 0.6);
    run_one(model, kBasis3, kSc3, 62 + trial);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "sup-norm field-vs-oracle deviation %.3e, affine-flow-vs-oracle "
                "%.3e (tol 1e-6)",
                worst, worst_exact);
  detail = buf;
  return worst < 1e-6 && worst_exact < 1e-6;
}

bool criterion7_lasalle(std::string& detail) {
  double worst_ld = -1e300;
  double worst_cf = 0.0;
  int families = 0;
  for (int n : {2, 3}) {
    const HermitianBasis& basis = n == 2 ? kBasis2 : kBasis3;
    const StructureConstants& sc = n == 2 ? kSc2 : kSc3;
    std::mt19937_64 rng(70 + n);
    std::uniform_real_distribution<double> uni(0.1, 2.0);
    const int per_kind = 25;  // 25 per n gives 50 per family kind
    for (int s = 0; s < per_kind; ++s) {
      const PoissonFamily pf{haar_unitary(n, rng)};
      const LaSalleReport r1 =
          lasalle_certify(pf, 1000, 700 + s, basis, sc);
      worst_ld = std::max(worst_ld, r1.max_lie_derivative);
      worst_cf = std::max(worst_cf, r1.closed_form_max_deviation);
      ++families;

      const GaussianFamily gf{random_hermitian(n, rng)};
      const LaSalleReport r2 =
          lasalle_certify(gf, 1000, 800 + s, basis, sc);
      worst_ld = std::max(worst_ld, r2.max_lie_derivative);
      worst_cf = std::max(worst_cf, r2.closed_form_max_deviation);
      ++families;

      RandomUnitaryFamily ru;
      // orthonormal self-adjoint pair from the basis, rotated by a random unitary
      const CMatrix w = haar_unitary(n, rng);
      ru.alphas = {uni(rng), uni(rng)};
      ru.hermitians = {w * basis.element(1) * w.adjoint(),
                       w * basis.element(2) * w.adjoint()};
      ru.beta = uni(rng);
      ru.probs = {0.35, 0.65};
      ru.unitaries = {haar_unitary(n, rng), haar_unitary(n, rng)};
      ru.hamiltonian = random_hermitian(n, rng);
      const LaSalleReport r3 =
          lasalle_certify(ru, 1000, 900 + s, basis, sc);
      worst_ld = std::max(worst_ld, r3.max_lie_derivative);
      worst_cf = std::max(worst_cf, r3.closed_form_max_deviation);
      ++families;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max Lie derivative %.3e (tol 1e-12), closed-form deviation %.3e "
                "(tol 1e-10) over %d families x 1000 states",
                worst_ld, worst_cf, families);
  detail = buf;
  return worst_ld <= 1e-12 && worst_cf < 1e-10;
}

bool criterion8_commutant(std::string& detail) {
  bool ok = commutant_dimension(CMatrix::Identity(2, 2)) == 4 &&
            commutant_dimension(CMatrix(pauli(3))) == 2;
  std::mt19937_64 seed_rng(80);
  CMatrix d3 = CMatrix::Zero(3, 3);
  d3(0, 0) = std::exp(kI * 0.3);
  d3(1, 1) = std::exp(kI * 1.4);
  d3(2, 2) = std::exp(kI * 2.6);
  ok = ok && commutant_dimension(d3) == 3;
  int agreements = 0;
  for (int n : {2, 3, 4}) {
    for (int s = 0; s < 100; ++s) {
      const CMatrix u = haar_unitary(n, seed_rng);
      if (commutant_dimension(u) == commutant_kernel_dimension(u)) ++agreements;
    }
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "d_I=4, d_sigma3=2, non-degenerate n=3 -> 3: %s; spectral == kernel on "
                "%d/300 random unitaries",
                ok ? "yes" : "NO", agreements);
  detail = buf;
  return ok && agreements == 300;
}

bool criterion9_strata(std::string& detail) {
  std::mt19937_64 rng(90);
  // spectrum drift under a pure Hamiltonian flow over [0, 10]
  const CMatrix h = random_traceless_hermitian(3, rng);
  const PolyField x_field = hamiltonian_field(h, kBasis3, kSc3);
  const CoherencePoint q0 = sample_state(3, 3, 91, kBasis3);
  Eigen::SelfAdjointEigenSolver<CMatrix> initial(to_matrix(q0, kBasis3));
  const Trajectory orbit =
      integrate(x_field, q0, 10.0, IntegratorConfig::rk4(1e-3));
  double drift = 0.0;
  for (size_t i = 0; i < orbit.points.size(); i += 250) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(
        to_matrix(CoherencePoint(3, orbit.points[i]), kBasis3));
    drift = std::max(
        drift, (es.eigenvalues() - initial.eigenvalues()).cwiseAbs().maxCoeff());
  }

  // rank preservation along the X+Y flow from rank-1 and rank-2 states
  bool rank_ok = true;
  for (int rank : {1, 2}) {
    const CoherencePoint p = sample_state(3, rank, 92 + rank, kBasis3);
    const CMatrix a = random_traceless_hermitian(3, rng);
    const CMatrix b = random_traceless_hermitian(3, rng);
    for (double t : {0.2, 0.5, 1.0}) {
      const CoherencePoint moved = xy_flow(a, b, p, t, kBasis3);
      if (diagnostics(moved, kBasis3).rank != rank) rank_ok = false;
    }
  }

  // phase damping takes a pure state to rank 2; second eigenvalue via both routes
  const GklsModel pd = gftest::phase_damping_model(1.0);
  const PolyField gamma = gkls_field(pd, kBasis2, kSc2);
  const CoherencePoint pure = pauli_point(1.0, 0.0, 0.0);
  const Trajectory traj = integrate(gamma, pure, 0.5, IntegratorConfig::rk4(1e-3));
  const StateDiagnostics d =
      diagnostics(CoherencePoint(2, traj.points.back()), kBasis2);
  const CMatrix rho_oracle =
      lindblad_matrix_oracle(pd, to_matrix(pure, kBasis2), 0.5);
  Eigen::SelfAdjointEigenSolver<CMatrix> es_oracle(
      0.5 * (rho_oracle + rho_oracle.adjoint()));
  const double second_field = d.spectrum(0);
  const double second_oracle = es_oracle.eigenvalues()(0);
  const bool damping_ok = d.rank == 2 && second_field > 1e-4 &&
                          std::abs(second_field - second_oracle) < 1e-8;
  char buf[180];
  std::snprintf(buf, sizeof(buf),
                "spectrum drift %.3e (tol 1e-8), rank preserved %s, phase damping "
                "second eigenvalue %.6f (> 1e-4, oracle gap %.2e)",
                drift, rank_ok ? "yes" : "NO", second_field,
                std::abs(second_field - second_oracle));
  detail = buf;
  return drift < 1e-8 && rank_ok && damping_ok;
}

bool criterion10_cptp(std::string& detail) {
  double worst_min = 0.0;
  for (const GklsModel& model : example_models()) {
    for (double tau : {0.1, 1.0, 10.0}) {
      const double mineig =
          choi_min_eigenvalue(choi_matrix(channel_superoperator(model, tau)));
      worst_min = std::min(worst_min, mineig);
    }
  }
  const double backwards = choi_min_eigenvalue(
      choi_matrix(channel_superoperator(gftest::phase_damping_model(1.0), -0.5)));
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "min Choi eigenvalue %.3e (tol -1e-10) forward; %.3e at tau=-0.5 "
                "(must be < 0)",
                worst_min, backwards);
  detail = buf;
  return worst_min >= -1e-10 && backwards < 0.0;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "phase damping flow and fixed set", criterion1_phase_damping, 1.0},
      {2, "energy damping table, fixed point, rates", criterion2_energy_damping, 1.0},
      {3, "driven phase damping: closed form and S-infinity", criterion3_driven_phase_damping, 5.0},
      {4, "commutation-relation suite", criterion4_commutation, 10.0},
      {5, "quadratic cancellation", criterion5_cancellation, 10.0},
      {6, "oracle equivalence", criterion6_oracle, 30.0},
      {7, "LaSalle certification", criterion7_lasalle, 60.0},
      {8, "commutant dimensions", criterion8_commutant, 0.0},
      {9, "stratum behavior", criterion9_strata, 0.0},
      {10, "CPTP semigroup", criterion10_cptp, 0.0},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool passed = false;
    try {
      passed = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool time_ok = c.runtime_limit_s <= 0.0 || elapsed < c.runtime_limit_s;
    if (!time_ok) passed = false;
    std::printf("[%s] criterion %2d: %s: %s (%.2fs%s)\n",
                passed ? "PASS" : "FAIL", c.id, c.label.c_str(), detail.c_str(),
                elapsed,
                c.runtime_limit_s > 0.0
                    ? (std::string(", limit ") + std::to_string(c.runtime_limit_s) + "s").c_str()
                    : "");
    if (!passed) ++failures;
  }
  if (failures == 0)
    std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
