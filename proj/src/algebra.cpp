#include "geoflow/algebra.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace geoflow {

namespace {

const Complex kImag(0.0, 1.0);

void require_same_square(const CMatrix& a, const CMatrix& b, const char* who) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    std::ostringstream msg;
    msg << who << ": dimension mismatch (" << a.rows() << "x" << a.cols()
        << " vs " << b.rows() << "x" << b.cols() << ")";
    throw InvariantError(msg.str());
  }
}

}  // namespace

CMatrix jordan_product(const CMatrix& a, const CMatrix& b) {
  require_same_square(a, b, "jordan_product");
  return 0.5 * (a * b + b * a);
}

CMatrix lie_product(const CMatrix& a, const CMatrix& b) {
  require_same_square(a, b, "lie_product");
  return 0.5 * kImag * (a * b - b * a);
}

HermitianBasis HermitianBasis::gellmann(int n) {
  if (n < 2) throw InvariantError("gellmann basis: dimension must be >= 2");
  std::vector<CMatrix> e;
  e.reserve(static_cast<size_t>(n) * n);
  e.push_back(CMatrix::Identity(n, n) / std::sqrt(double(n)));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      CMatrix s = CMatrix::Zero(n, n);
      s(j, k) = s(k, j) = inv_sqrt2;
      e.push_back(s);
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      CMatrix a = CMatrix::Zero(n, n);
      a(j, k) = -kImag * inv_sqrt2;
      a(k, j) = kImag * inv_sqrt2;
      e.push_back(a);
    }
  }
  for (int l = 1; l < n; ++l) {
    CMatrix d = CMatrix::Zero(n, n);
    const double norm = std::sqrt(double(l) * (l + 1.0));
    for (int k = 0; k < l; ++k) d(k, k) = 1.0 / norm;
    d(l, l) = -double(l) / norm;
    e.push_back(d);
  }
  return HermitianBasis(n, std::move(e));
}

HermitianBasis::HermitianBasis(int n, std::vector<CMatrix> elements)
    : n_(n), e_(std::move(elements)) {
  if (n_ < 2) throw InvariantError("HermitianBasis: dimension must be >= 2");
  if (static_cast<int>(e_.size()) != n_ * n_)
    throw InvariantError("HermitianBasis: expected n^2 elements");
  validate();
}

RVector HermitianBasis::components(const CMatrix& a) const {
  RVector out(size());
  for (int mu = 0; mu < size(); ++mu)
    out(mu) = (a * e_[static_cast<size_t>(mu)]).trace().real();
  return out;
}

RVector HermitianBasis::traceless_components(const CMatrix& a) const {
  RVector out(coord_count());
  for (int j = 1; j < size(); ++j)
    out(j - 1) = (a * e_[static_cast<size_t>(j)]).trace().real();
  return out;
}

void HermitianBasis::validate(double tol) const {
  const CMatrix e0_expected = CMatrix::Identity(n_, n_) / std::sqrt(double(n_));
  if (frobenius_distance(e_[0], e0_expected) > tol)
    throw InvariantError("HermitianBasis: e^0 != I/sqrt(n)");
  for (int mu = 0; mu < size(); ++mu) {
    const CMatrix& em = e_[static_cast<size_t>(mu)];
    if (em.rows() != n_ || em.cols() != n_)
      throw InvariantError("HermitianBasis: element has wrong shape");
    if (hermiticity_residual(em) > tol)
      throw InvariantError("HermitianBasis: element not self-adjoint");
    if (mu >= 1 && std::abs(em.trace()) > tol)
      throw InvariantError("HermitianBasis: traceless element has trace");
    for (int nu = mu; nu < size(); ++nu) {
      const Complex g = (em * e_[static_cast<size_t>(nu)]).trace();
      const double expected = (mu == nu) ? 1.0 : 0.0;
      if (std::abs(g - expected) > tol)
        throw InvariantError("HermitianBasis: orthonormality violated");
    }
  }
}

StructureConstants StructureConstants::from_basis(const HermitianBasis& basis) {
  const int m = basis.size();
  StructureConstants sc(basis.dim());
  // One pass over products e^mu e^nu; project the (anti)symmetric parts.
  for (int mu = 0; mu < m; ++mu) {
    for (int nu = 0; nu < m; ++nu) {
      const CMatrix prod = basis.element(mu) * basis.element(nu);
      const CMatrix sym = 0.5 * (prod + prod.adjoint());
      const CMatrix anti = 0.5 * kImag * (prod - prod.adjoint());
      for (int sigma = 0; sigma < m; ++sigma) {
        const CMatrix& es = basis.element(sigma);
        sc.d_[sc.idx(mu, nu, sigma)] = (sym * es).trace().real();
        sc.c_[sc.idx(mu, nu, sigma)] = (anti * es).trace().real();
      }
    }
  }
  return sc;
}

void StructureConstants::validate(const HermitianBasis& basis, double sym_tol,
                                  double reconstruction_tol) const {
  const int m = m_;
  const double inv_sqrt_n = 1.0 / std::sqrt(double(n_));
  for (int mu = 0; mu < m; ++mu) {
    for (int nu = 0; nu < m; ++nu) {
      if (std::abs(d(mu, nu, 0) - (mu == nu ? inv_sqrt_n : 0.0)) > sym_tol)
        throw InvariantError("StructureConstants: d^{mu nu}_0 != delta/sqrt(n)");
      for (int sigma = 0; sigma < m; ++sigma) {
        const double cv = c(mu, nu, sigma);
        if (std::abs(cv + c(nu, mu, sigma)) > sym_tol ||
            std::abs(cv - c(nu, sigma, mu)) > sym_tol)
          throw InvariantError("StructureConstants: c not fully antisymmetric");
        if (std::abs(d(mu, nu, sigma) - d(nu, mu, sigma)) > sym_tol)
          throw InvariantError("StructureConstants: d not symmetric in mu,nu");
      }
    }
  }
  for (int j = 1; j < m; ++j)
    if (std::abs(d(0, 0, j)) > sym_tol)
      throw InvariantError("StructureConstants: d^{00}_j != 0");
  // Reconstruction ties c,d back to plain matrix multiplication.
  const int n = basis.dim();
  for (int mu = 0; mu < m; ++mu) {
    for (int nu = 0; nu < m; ++nu) {
      CMatrix rhs = CMatrix::Zero(n, n);
      for (int sigma = 0; sigma < m; ++sigma)
        rhs += (d(mu, nu, sigma) - kImag * c(mu, nu, sigma)) *
               basis.element(sigma);
      const CMatrix lhs = basis.element(mu) * basis.element(nu);
      if (frobenius_distance(lhs, rhs) > reconstruction_tol)
        throw InvariantError("StructureConstants: reconstruction identity failed");
    }
  }
}

KrausSet::KrausSet(std::vector<CMatrix> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw InvariantError("KrausSet: need at least one operator");
  n_ = static_cast<int>(ops_[0].rows());
  for (const CMatrix& v : ops_)
    if (v.rows() != n_ || v.cols() != n_)
      throw InvariantError("KrausSet: operators must be square, equal dims");
  v_ = CMatrix::Zero(n_, n_);
  for (const CMatrix& v : ops_) v_ += v.adjoint() * v;
  validate();
}

CMatrix KrausSet::apply(const CMatrix& xi) const {
  if (xi.rows() != n_ || xi.cols() != n_)
    throw InvariantError("KrausSet::apply: dimension mismatch");
  CMatrix out = CMatrix::Zero(n_, n_);
  for (const CMatrix& v : ops_) out += v * xi * v.adjoint();
  return out;
}

CMatrix KrausSet::apply_sharp(const CMatrix& xi) const {
  if (xi.rows() != n_ || xi.cols() != n_)
    throw InvariantError("KrausSet::apply_sharp: dimension mismatch");
  CMatrix out = CMatrix::Zero(n_, n_);
  for (const CMatrix& v : ops_) out += v.adjoint() * xi * v;
  return out;
}

void KrausSet::validate(double herm_tol, double psd_tol) const {
  if (hermiticity_residual(v_) > herm_tol)
    throw InvariantError("KrausSet: V = sum v^dagger v not self-adjoint");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(v_);
  if (es.eigenvalues().minCoeff() < -psd_tol)
    throw InvariantError("KrausSet: V not positive semidefinite");
}

LieJordanReport verify_lie_jordan(int n, int trials, std::uint64_t seed,
                                  double tol) {
  if (trials < 1) throw InvariantError("verify_lie_jordan: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_hermitian = [&]() {
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = Complex(gauss(rng), gauss(rng));
    return CMatrix(0.5 * (a + a.adjoint()));
  };
  LieJordanReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const CMatrix a = random_hermitian();
    const CMatrix b = random_hermitian();
    const CMatrix c = random_hermitian();
    const CMatrix leibniz = lie_product(a, jordan_product(b, c)) -
                            jordan_product(lie_product(a, b), c) -
                            jordan_product(b, lie_product(a, c));
    const CMatrix associator =
        jordan_product(jordan_product(a, b), c) -
        jordan_product(a, jordan_product(b, c)) -
        lie_product(b, lie_product(c, a));
    report.max_leibniz_residual =
        std::max(report.max_leibniz_residual, leibniz.norm());
    report.max_associator_residual =
        std::max(report.max_associator_residual, associator.norm());
  }
  report.passed = report.max_leibniz_residual < tol &&
                  report.max_associator_residual < tol;
  return report;
}

LieJordanReport verify_lie_jordan(const HermitianBasis& basis, int trials,
                                  std::uint64_t seed, double tol) {
  return verify_lie_jordan(basis.dim(), trials, seed, tol);
}

namespace {

CMatrix choi_from_action(int n, const std::function<CMatrix(const CMatrix&)>& phi) {
  CMatrix choi = CMatrix::Zero(n * n, n * n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      CMatrix ekl = CMatrix::Zero(n, n);
      ekl(k, l) = 1.0;
      const CMatrix block = phi(ekl);
      // E_{kl} ⊗ Phi(E_{kl}) occupies block (k,l) of the n x n block grid.
      choi.block(k * n, l * n, n, n) += block;
    }
  }
  return choi;
}

}  // namespace

CMatrix choi_matrix(const KrausSet& map) {
  return choi_from_action(map.dim(),
                          [&](const CMatrix& e) { return map.apply(e); });
}

CMatrix choi_matrix(const CMatrix& superop) {
  const int n2 = static_cast<int>(superop.rows());
  const int n = static_cast<int>(std::lround(std::sqrt(double(n2))));
  if (superop.cols() != n2 || n * n != n2)
    throw InvariantError("choi_matrix: superoperator must be n^2 x n^2");
  return choi_from_action(n, [&](const CMatrix& e) {
    // column-stacking vec / unvec
    Eigen::VectorXcd v(Eigen::Map<const Eigen::VectorXcd>(e.data(), n2));
    Eigen::VectorXcd w = superop * v;
    return CMatrix(Eigen::Map<const CMatrix>(w.data(), n, n));
  });
}

double choi_min_eigenvalue(const CMatrix& choi) {
  const CMatrix herm = 0.5 * (choi + choi.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  return es.eigenvalues().minCoeff();
}

bool is_completely_positive(const KrausSet& map, double tol) {
  if (tol <= 0) throw InvariantError("is_completely_positive: tol must be > 0");
  return choi_min_eigenvalue(choi_matrix(map)) >= -tol;
}

bool is_completely_positive(const CMatrix& superop, double tol) {
  if (tol <= 0) throw InvariantError("is_completely_positive: tol must be > 0");
  return choi_min_eigenvalue(choi_matrix(superop)) >= -tol;
}

double frobenius_distance(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm();
}

double hermiticity_residual(const CMatrix& a) {
  return (a - a.adjoint()).norm();
}

}  // namespace geoflow
