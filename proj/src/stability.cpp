#include "geoflow/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace geoflow {

namespace {

void require_unitary(const CMatrix& u, double tol = 1e-10) {
  if (u.rows() != u.cols())
    throw InvariantError("SemigroupFamily: unitary must be square");
  const CMatrix id = CMatrix::Identity(u.rows(), u.cols());
  if ((u.adjoint() * u - id).norm() > tol)
    throw InvariantError("SemigroupFamily: operator is not unitary");
}

void require_self_adjoint(const CMatrix& v, double tol = 1e-10) {
  if (v.rows() != v.cols() || hermiticity_residual(v) > tol)
    throw InvariantError("SemigroupFamily: operator is not self-adjoint");
}

CMatrix hamiltonian_or_zero(const CMatrix& h, int n) {
  if (h.size() == 0) return CMatrix::Zero(n, n);
  if (h.rows() != n || h.cols() != n)
    throw InvariantError("SemigroupFamily: Hamiltonian dimension mismatch");
  return h;
}

}  // namespace

GklsModel build_generator(const SemigroupFamily& fam) {
  return std::visit(
      [](const auto& f) -> GklsModel {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PoissonFamily>) {
          require_unitary(f.unitary);
          const int n = static_cast<int>(f.unitary.rows());
          return GklsModel(CMatrix::Zero(n, n), KrausSet({f.unitary}));
        } else if constexpr (std::is_same_v<T, WeightedPoissonFamily>) {
          if (f.weights.size() != f.unitaries.size() || f.unitaries.empty())
            throw InvariantError("weighted_poisson: weights/unitaries mismatch");
          const int n = static_cast<int>(f.unitaries[0].rows());
          std::vector<CMatrix> ops;
          for (size_t j = 0; j < f.unitaries.size(); ++j) {
            require_unitary(f.unitaries[j]);
            if (f.unitaries[j].rows() != n)
              throw InvariantError("weighted_poisson: dimension mismatch");
            ops.push_back(f.weights[j] * f.unitaries[j]);
          }
          return GklsModel(hamiltonian_or_zero(f.hamiltonian, n), KrausSet(ops));
        } else if constexpr (std::is_same_v<T, GaussianFamily>) {
          require_self_adjoint(f.v);
          const int n = static_cast<int>(f.v.rows());
          return GklsModel(CMatrix::Zero(n, n), KrausSet({f.v}));
        } else if constexpr (std::is_same_v<T, WeightedGaussianFamily>) {
          if (f.weights.size() != f.vs.size() || f.vs.empty())
            throw InvariantError("weighted_gaussian: weights/vs mismatch");
          const int n = static_cast<int>(f.vs[0].rows());
          std::vector<CMatrix> ops;
          for (size_t j = 0; j < f.vs.size(); ++j) {
            require_self_adjoint(f.vs[j]);
            if (f.vs[j].rows() != n)
              throw InvariantError("weighted_gaussian: dimension mismatch");
            ops.push_back(f.weights[j] * f.vs[j]);
          }
          return GklsModel(hamiltonian_or_zero(f.hamiltonian, n), KrausSet(ops));
        } else {
          static_assert(std::is_same_v<T, RandomUnitaryFamily>);
          if (f.alphas.size() != f.hermitians.size())
            throw InvariantError("random_unitary: alphas/hermitians mismatch");
          if (f.probs.size() != f.unitaries.size())
            throw InvariantError("random_unitary: probs/unitaries mismatch");
          if (f.beta < 0)
            throw InvariantError("random_unitary: beta must be non-negative");
          int n = 0;
          if (!f.hermitians.empty()) n = static_cast<int>(f.hermitians[0].rows());
          else if (!f.unitaries.empty()) n = static_cast<int>(f.unitaries[0].rows());
          else throw InvariantError("random_unitary: no operators given");
          if (static_cast<int>(f.hermitians.size()) > n * n - 1)
            throw InvariantError("random_unitary: more than n^2-1 hermitians");
          for (size_t i = 0; i < f.hermitians.size(); ++i) {
            require_self_adjoint(f.hermitians[i]);
            if (f.alphas[i] < 0)
              throw InvariantError("random_unitary: alpha_j must be non-negative");
            for (size_t j = 0; j <= i; ++j) {
              const double g =
                  (f.hermitians[i] * f.hermitians[j]).trace().real();
              if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-10)
                throw InvariantError("random_unitary: e_j not orthonormal");
            }
          }
          if (!f.probs.empty()) {
            double total = 0.0;
            for (double pj : f.probs) {
              if (pj < 0)
                throw InvariantError("random_unitary: probabilities must be >= 0");
              total += pj;
            }
            if (std::abs(total - 1.0) > 1e-12)
              throw InvariantError("random_unitary: probabilities must sum to 1");
          }
          std::vector<CMatrix> ops;
          for (size_t j = 0; j < f.hermitians.size(); ++j)
            ops.push_back(std::sqrt(f.alphas[j]) * f.hermitians[j]);
          for (size_t j = 0; j < f.unitaries.size(); ++j) {
            require_unitary(f.unitaries[j]);
            ops.push_back(std::sqrt(f.beta * f.probs[j]) * f.unitaries[j]);
          }
          if (ops.empty()) ops.push_back(CMatrix::Zero(n, n));
          return GklsModel(hamiltonian_or_zero(f.hamiltonian, n), KrausSet(ops));
        }
      },
      fam);
}

std::vector<CMatrix> commutant_generators(const SemigroupFamily& fam) {
  return std::visit(
      [](const auto& f) -> std::vector<CMatrix> {
        using T = std::decay_t<decltype(f)>;
        std::vector<CMatrix> out;
        if constexpr (std::is_same_v<T, PoissonFamily>) {
          out.push_back(f.unitary);
        } else if constexpr (std::is_same_v<T, WeightedPoissonFamily>) {
          for (size_t j = 0; j < f.unitaries.size(); ++j)
            if (std::abs(f.weights[j]) > 0) out.push_back(f.unitaries[j]);
        } else if constexpr (std::is_same_v<T, GaussianFamily>) {
          out.push_back(f.v);
        } else if constexpr (std::is_same_v<T, WeightedGaussianFamily>) {
          for (size_t j = 0; j < f.vs.size(); ++j)
            if (std::abs(f.weights[j]) > 0) out.push_back(f.vs[j]);
        } else {
          for (size_t j = 0; j < f.hermitians.size(); ++j)
            if (f.alphas[j] > 0) out.push_back(f.hermitians[j]);
          for (size_t j = 0; j < f.unitaries.size(); ++j)
            if (f.beta * f.probs[j] > 0) out.push_back(f.unitaries[j]);
        }
        return out;
      },
      fam);
}

FixedPointSet fixed_points(const PolyField& f, double residual_tol,
                           double null_tol) {
  if (!f.is_affine())
    throw InvariantError("fixed_points: field must be affine");
  const int m = f.coord_count();
  Eigen::JacobiSVD<RMatrix> svd(f.linear(),
                                Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  const double cutoff = null_tol * std::max(sigma_max, 1.0);

  FixedPointSet out;
  // minimum-norm least-squares solution of c1 x = -c0
  RVector y = svd.matrixU().transpose() * (-f.constant());
  RVector z = RVector::Zero(m);
  int rank = 0;
  for (int i = 0; i < m; ++i) {
    if (sigma(i) > cutoff) {
      z(i) = y(i) / sigma(i);
      ++rank;
    }
  }
  out.particular = svd.matrixV() * z;
  out.residual = (f.linear() * out.particular + f.constant()).norm();
  out.solvable = out.residual < residual_tol;
  out.dimension = m - rank;
  out.null_basis = svd.matrixV().rightCols(out.dimension);
  return out;
}

double purity_lie_derivative(const PolyField& f, const CoherencePoint& p) {
  return p.x.dot(f.evaluate(p.x));
}

double poisson_angle_formula(const CMatrix& u, const CoherencePoint& p,
                             const HermitianBasis& basis) {
  const int n = basis.dim();
  const CMatrix rho = to_matrix(p, basis);
  const CMatrix tilde = rho - CMatrix::Identity(n, n) / double(n);
  const CMatrix tilde_u = u * tilde * u.adjoint();
  const double norm2 = tilde.squaredNorm();
  if (norm2 < 1e-28) return 0.0;
  const double ip = (tilde_u * tilde).trace().real();
  const double cos_theta = std::clamp(ip / norm2, -1.0, 1.0);
  return norm2 * (cos_theta - 1.0);
}

double gaussian_angle_formula(const CMatrix& v, const CoherencePoint& p,
                              const HermitianBasis& basis) {
  const CMatrix rho = to_matrix(p, basis);
  const CMatrix rv = rho * v;
  const CMatrix vr = v * rho;
  const double na = rv.norm();
  const double nb = vr.norm();
  if (na * nb < 1e-28) return 0.0;
  const double ip = (rv.adjoint() * vr).trace().real();
  const double cos_theta = std::clamp(ip / (na * nb), -1.0, 1.0);
  return na * na * (cos_theta - 1.0);
}

double closed_form_lie_derivative(const SemigroupFamily& fam,
                                  const CoherencePoint& p,
                                  const HermitianBasis& basis) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PoissonFamily>) {
          return poisson_angle_formula(f.unitary, p, basis);
        } else if constexpr (std::is_same_v<T, WeightedPoissonFamily>) {
          double out = 0.0;
          for (size_t j = 0; j < f.unitaries.size(); ++j)
            out += std::norm(f.weights[j]) *
                   poisson_angle_formula(f.unitaries[j], p, basis);
          return out;
        } else if constexpr (std::is_same_v<T, GaussianFamily>) {
          return gaussian_angle_formula(f.v, p, basis);
        } else if constexpr (std::is_same_v<T, WeightedGaussianFamily>) {
          double out = 0.0;
          for (size_t j = 0; j < f.vs.size(); ++j)
            out += std::norm(f.weights[j]) *
                   gaussian_angle_formula(f.vs[j], p, basis);
          return out;
        } else {
          double out = 0.0;
          for (size_t j = 0; j < f.hermitians.size(); ++j)
            out += f.alphas[j] * gaussian_angle_formula(f.hermitians[j], p, basis);
          for (size_t j = 0; j < f.unitaries.size(); ++j)
            out += f.beta * f.probs[j] *
                   poisson_angle_formula(f.unitaries[j], p, basis);
          return out;
        }
      },
      fam);
}

int commutant_dimension(const CMatrix& u, double tol) {
  const int n = static_cast<int>(u.rows());
  Eigen::ComplexEigenSolver<CMatrix> es(u);
  const Eigen::VectorXcd lambda = es.eigenvalues();
  // single-linkage clustering at tol
  std::vector<int> cluster(n);
  std::iota(cluster.begin(), cluster.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (cluster[i] != i) i = cluster[i] = cluster[cluster[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(lambda(i) - lambda(j)) < tol) cluster[find(i)] = find(j);
  // ambiguity: distinct clusters closer than 2 tol
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (find(i) != find(j) && std::abs(lambda(i) - lambda(j)) < 2.0 * tol)
        throw NumericalError(
            "commutant_dimension: ambiguous spectrum (cluster gap in [tol, 2 tol))");
  std::vector<int> sizes(n, 0);
  for (int i = 0; i < n; ++i) ++sizes[static_cast<size_t>(find(i))];
  int dim = 0;
  for (int s : sizes) dim += s * s;
  return dim;
}

int commutant_kernel_dimension(const CMatrix& u, double tol) {
  const int n = static_cast<int>(u.rows());
  CMatrix t(n * n, n * n);
  const CMatrix id = CMatrix::Identity(n, n);
  // vec(UA - AU) = (I ⊗ U - U^T ⊗ I) vec(A), column stacking
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      t.block(i * n, j * n, n, n) =
          (i == j ? CMatrix(u) : CMatrix::Zero(n, n)) - u.transpose()(i, j) * id;
  Eigen::JacobiSVD<CMatrix> svd(t);
  const RVector sigma = svd.singularValues();
  int kernel = 0;
  const double cutoff = tol * std::max(1.0, sigma.size() ? sigma(0) : 0.0);
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) <= cutoff) ++kernel;
  return kernel;
}

RMatrix hermitian_commutant_basis(const std::vector<CMatrix>& ops,
                                  const HermitianBasis& basis, double tol) {
  const int n = basis.dim();
  const int m2 = n * n;
  const int rows = 2 * m2 * static_cast<int>(ops.size());
  RMatrix constraints = RMatrix::Zero(std::max(rows, 1), m2);
  int row = 0;
  for (const CMatrix& k : ops) {
    for (int mu = 0; mu < m2; ++mu) {
      const CMatrix comm = basis.element(mu) * k - k * basis.element(mu);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          constraints(row + i * n + j, mu) = comm(j, i).real();
          constraints(row + m2 + i * n + j, mu) = comm(j, i).imag();
        }
    }
    row += 2 * m2;
  }
  Eigen::JacobiSVD<RMatrix> svd(constraints, Eigen::ComputeFullV);
  const RVector sigma = svd.singularValues();
  const double cutoff =
      tol * std::max(1.0, sigma.size() > 0 ? sigma(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(m2 - rank);
}

std::string to_string(SInfinityClass c) {
  switch (c) {
    case SInfinityClass::kAllOfEFixed: return "all-of-E-fixed";
    case SInfinityClass::kProperSubset: return "proper-subset";
    case SInfinityClass::kSingletonMaximallyMixed:
      return "singleton-maximally-mixed";
  }
  return "unknown";
}

namespace {

std::string describe_e(const SemigroupFamily& fam) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PoissonFamily>)
          return "states commuting with U";
        else if constexpr (std::is_same_v<T, WeightedPoissonFamily>)
          return "states commuting with every weighted U_j";
        else if constexpr (std::is_same_v<T, GaussianFamily>)
          return "states commuting with v";
        else if constexpr (std::is_same_v<T, WeightedGaussianFamily>)
          return "states commuting with every weighted v_j";
        else
          return "states commuting with every weighted e_j and U_j";
      },
      fam);
}

}  // namespace

LaSalleReport lasalle_certify(const SemigroupFamily& fam, int sample_count,
                              std::uint64_t seed, const HermitianBasis& basis,
                              const StructureConstants& sc, double lasalle_tol,
                              double closed_form_tol) {
  if (sample_count < 1)
    throw InvariantError("lasalle_certify: sample_count must be >= 1");
  const GklsModel model = build_generator(fam);
  const PolyField gamma = gkls_field(model, basis, sc);
  const int n = model.n;

  LaSalleReport report;
  report.max_lie_derivative = -std::numeric_limits<double>::infinity();
  report.samples = sample_count;
  report.e_description = describe_e(fam);
  for (const CMatrix& k : commutant_generators(fam))
    report.commutant_dimensions.push_back(commutant_kernel_dimension(k));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> rank_dist(1, n);
  for (int s = 0; s < sample_count; ++s) {
    const CMatrix rho = sample_density_matrix(n, rank_dist(rng), rng);
    const CoherencePoint p = from_matrix(rho, basis);
    const double ld = purity_lie_derivative(gamma, p);
    report.max_lie_derivative = std::max(report.max_lie_derivative, ld);
    const double cf = closed_form_lie_derivative(fam, p, basis);
    report.closed_form_max_deviation =
        std::max(report.closed_form_max_deviation, std::abs(ld - cf));
    if (ld > lasalle_tol) {
      std::ostringstream msg;
      msg << "lasalle_certify: positive purity Lie derivative " << ld
          << " at sample " << s;
      throw NumericalError(msg.str());
    }
  }
  report.certified = report.max_lie_derivative <= lasalle_tol &&
                     report.closed_form_max_deviation <= closed_form_tol;
  return report;
}

SInfinityProbe s_infinity_probe(const SemigroupFamily& fam, double horizon,
                                int sample_count, std::uint64_t seed,
                                const HermitianBasis& basis,
                                const StructureConstants& sc, double stay_tol,
                                double exit_tol) {
  if (horizon <= 0)
    throw InvariantError("s_infinity_probe: horizon must be positive");
  const GklsModel model = build_generator(fam);
  const PolyField gamma = gkls_field(model, basis, sc);
  const int n = model.n;
  const int m = basis.coord_count();

  const RMatrix full_basis =
      hermitian_commutant_basis(commutant_generators(fam), basis);
  // split off the identity direction; keep the traceless span of E
  RMatrix traceless = full_basis.bottomRows(m);
  Eigen::JacobiSVD<RMatrix> svd(traceless, Eigen::ComputeFullU);
  const RVector sigma = svd.singularValues();
  int dim_t = 0;
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) > 1e-10 * std::max(1.0, sigma(0))) ++dim_t;
  const RMatrix w = svd.matrixU().leftCols(dim_t);  // m x dim_t, orthonormal

  SInfinityProbe probe;
  probe.samples = sample_count;
  probe.e_dimension = dim_t;
  if (dim_t == 0) {
    // E is the maximally mixed state alone.
    probe.classification = SInfinityClass::kSingletonMaximallyMixed;
    return probe;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.5, 0.95);
  bool all_fixed = true;
  bool all_exit = true;
  for (int s = 0; s < sample_count; ++s) {
    RVector g(dim_t);
    do {
      for (int i = 0; i < dim_t; ++i) g(i) = gauss(rng);
    } while (g.norm() < 1e-8);
    RVector dir = w * g;
    dir /= dir.norm();
    // largest radius keeping I/n + r * D positive, D = dir . e
    CMatrix d = CMatrix::Zero(n, n);
    for (int j = 0; j < m; ++j) d += dir(j) * basis.element(j + 1);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(d);
    const double lambda_min = es.eigenvalues().minCoeff();
    const double r_max = (lambda_min < 0) ? (1.0 / n) / (-lambda_min) : 1.0;
    const RVector x0 = radius(rng) * r_max * dir;

    const Trajectory traj =
        integrate(gamma, CoherencePoint(n, x0), horizon, IntegratorConfig::rk4());
    double displacement = 0.0;
    double exit_distance = 0.0;
    for (const RVector& x : traj.points) {
      displacement = std::max(displacement, (x - x0).norm());
      exit_distance =
          std::max(exit_distance, (x - w * (w.transpose() * x)).norm());
    }
    probe.max_displacement = std::max(probe.max_displacement, displacement);
    probe.max_exit_distance = std::max(probe.max_exit_distance, exit_distance);
    if (displacement >= stay_tol) all_fixed = false;
    if (exit_distance <= exit_tol) all_exit = false;
  }
  if (all_fixed)
    probe.classification = SInfinityClass::kAllOfEFixed;
  else if (all_exit)
    probe.classification = SInfinityClass::kSingletonMaximallyMixed;
  else
    probe.classification = SInfinityClass::kProperSubset;
  return probe;
}

}  // namespace geoflow
