#include "geoflow/statespace.hpp"

#include <algorithm>
#include <cmath>

namespace geoflow {

CoherencePoint::CoherencePoint(int n_, RVector x_) : n(n_), x(std::move(x_)) {
  if (n < 2) throw InvariantError("CoherencePoint: dimension must be >= 2");
  if (x.size() != n * n - 1)
    throw InvariantError("CoherencePoint: coordinate vector must have length n^2-1");
  if (!x.allFinite())
    throw NumericalError("CoherencePoint: non-finite coordinates");
}

CoherencePoint CoherencePoint::maximally_mixed(int n) {
  return CoherencePoint(n, RVector::Zero(n * n - 1));
}

CMatrix to_matrix(const CoherencePoint& p, const HermitianBasis& basis) {
  if (p.n != basis.dim())
    throw InvariantError("to_matrix: point/basis dimension mismatch");
  CMatrix out = basis.element(0) / std::sqrt(double(p.n));
  for (int j = 1; j < basis.size(); ++j) out += p.x(j - 1) * basis.element(j);
  return out;
}

CoherencePoint from_matrix(const CMatrix& a, const HermitianBasis& basis,
                           double trace_tol, double herm_tol) {
  const int n = basis.dim();
  if (a.rows() != n || a.cols() != n)
    throw InvariantError("from_matrix: matrix/basis dimension mismatch");
  if (hermiticity_residual(a) > herm_tol)
    throw InvariantError("from_matrix: input not self-adjoint");
  if (std::abs(a.trace() - Complex(1.0, 0.0)) > trace_tol)
    throw InvariantError("from_matrix: input not on the trace-one hyperplane");
  return CoherencePoint(n, basis.traceless_components(a));
}

StateDiagnostics diagnostics(const CoherencePoint& p, const HermitianBasis& basis,
                             double rank_tol, double state_tol) {
  if (rank_tol <= 0 || state_tol <= 0)
    throw InvariantError("diagnostics: tolerances must be positive");
  StateDiagnostics out;
  out.purity = 1.0 / p.n + p.x.squaredNorm();
  const CMatrix rho = to_matrix(p, basis);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  out.spectrum = es.eigenvalues();
  out.spectral_purity = out.spectrum.squaredNorm();
  out.min_eigenvalue = out.spectrum.minCoeff();
  out.rank = 0;
  for (int i = 0; i < out.spectrum.size(); ++i)
    if (out.spectrum(i) > rank_tol) ++out.rank;
  out.is_state = out.min_eigenvalue >= -state_tol;
  out.stratum = out.rank;
  return out;
}

CMatrix haar_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase freedom so the distribution is Haar, not QR-convention.
  for (int j = 0; j < n; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= (mag > 0) ? rjj / mag : Complex(1.0, 0.0);
  }
  return q;
}

CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(gauss(rng), gauss(rng));
  return CMatrix(0.5 * (a + a.adjoint()));
}

CMatrix random_traceless_hermitian(int n, std::mt19937_64& rng) {
  CMatrix a = random_hermitian(n, rng);
  a -= (a.trace() / double(n)) * CMatrix::Identity(n, n);
  return a;
}

CMatrix sample_density_matrix(int n, int rank, std::mt19937_64& rng) {
  if (rank < 1 || rank > n)
    throw InvariantError("sample_density_matrix: rank must be in 1..n");
  // Dirichlet(1,...,1) on the k-simplex = normalized unit exponentials.
  // Resample the (measure ~0) draws that would sit below the rank
  // tolerance, so the reported rank is exactly k.
  std::exponential_distribution<double> expo(1.0);
  RVector lambda = RVector::Zero(n);
  do {
    double total = 0.0;
    for (int i = 0; i < rank; ++i) {
      lambda(i) = expo(rng);
      total += lambda(i);
    }
    lambda.head(rank) /= total;
  } while (lambda.head(rank).minCoeff() < 10.0 * kDefaultRankTol);
  const CMatrix u = haar_unitary(n, rng);
  return u * lambda.asDiagonal().toDenseMatrix().cast<Complex>() * u.adjoint();
}

CoherencePoint sample_state(int n, int rank, std::uint64_t seed,
                            const HermitianBasis& basis) {
  std::mt19937_64 rng(seed);
  return from_matrix(sample_density_matrix(n, rank, rng), basis);
}

}  // namespace geoflow
