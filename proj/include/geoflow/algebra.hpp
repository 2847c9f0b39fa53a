#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "geoflow/errors.hpp"

namespace geoflow {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Jordan product a ⊙ b = (ab + ba)/2. Self-adjoint in, self-adjoint out.
CMatrix jordan_product(const CMatrix& a, const CMatrix& b);

/// Lie product [[a, b]] = i(ab − ba)/2. Self-adjoint in, self-adjoint out.
CMatrix lie_product(const CMatrix& a, const CMatrix& b);

/// Orthonormal self-adjoint basis {e^0, ..., e^{n^2-1}} with e^0 = I/sqrt(n)
/// and Tr(e^mu e^nu) = delta^{mu nu}. Anchors every coordinate expression.
class HermitianBasis {
 public:
  /// Canonical realization: normalized generalized Gell-Mann matrices,
  /// ordered symmetric block, antisymmetric block, diagonal block.
  /// For n = 2 this is exactly {I, sigma_1, sigma_2, sigma_3}/sqrt(2).
  static HermitianBasis gellmann(int n);

  /// Arbitrary element list (e.g. a conjugated basis); invariants are checked.
  HermitianBasis(int n, std::vector<CMatrix> elements);

  int dim() const { return n_; }                  // Hilbert-space dimension n
  int size() const { return n_ * n_; }            // number of elements, n^2
  int coord_count() const { return n_ * n_ - 1; } // traceless directions

  const CMatrix& element(int mu) const { return e_[static_cast<size_t>(mu)]; }

  /// Components a_mu = Tr(a e^mu), mu = 0..n^2-1 (real for self-adjoint a).
  RVector components(const CMatrix& a) const;
  /// Traceless components a_j = Tr(a e^j), j = 1..n^2-1.
  RVector traceless_components(const CMatrix& a) const;

  /// Throws InvariantError on violated orthonormality, tracelessness,
  /// self-adjointness, or e^0 != I/sqrt(n).
  void validate(double tol = 1e-12) const;

 private:
  int n_;
  std::vector<CMatrix> e_;
};

/// Dense structure constants of the Lie and Jordan products in a given basis:
/// c^{mu nu}_sigma = Tr([[e^mu, e^nu]] e^sigma),
/// d^{mu nu}_sigma = Tr((e^mu ⊙ e^nu) e^sigma).
class StructureConstants {
 public:
  static StructureConstants from_basis(const HermitianBasis& basis);

  int dim() const { return n_; }
  int size() const { return m_; }  // n^2

  double c(int mu, int nu, int sigma) const { return c_[idx(mu, nu, sigma)]; }
  double d(int mu, int nu, int sigma) const { return d_[idx(mu, nu, sigma)]; }

  /// Symmetry checks (c antisymmetric in all indices, d symmetric, the e^0
  /// rows) and the reconstruction identity
  /// e^mu e^nu = sum_sigma (d^{mu nu}_sigma - i c^{mu nu}_sigma) e^sigma.
  void validate(const HermitianBasis& basis, double sym_tol = 1e-12,
                double reconstruction_tol = 1e-10) const;

 private:
  StructureConstants(int n) : n_(n), m_(n * n) {
    c_.assign(static_cast<size_t>(m_) * m_ * m_, 0.0);
    d_.assign(static_cast<size_t>(m_) * m_ * m_, 0.0);
  }
  size_t idx(int mu, int nu, int sigma) const {
    return (static_cast<size_t>(mu) * m_ + nu) * m_ + sigma;
  }
  int n_, m_;
  std::vector<double> c_, d_;
};

/// Kraus presentation {v_1, ..., v_N} of a completely positive map
/// K(xi) = sum_j v_j xi v_j^dagger, with V = sum_j v_j^dagger v_j.
class KrausSet {
 public:
  explicit KrausSet(std::vector<CMatrix> ops);

  int dim() const { return n_; }
  int count() const { return static_cast<int>(ops_.size()); }
  const std::vector<CMatrix>& ops() const { return ops_; }

  const CMatrix& v_sum() const { return v_; }  // V = sum v^dagger v

  CMatrix apply(const CMatrix& xi) const;        // K(xi)
  CMatrix apply_sharp(const CMatrix& xi) const;  // K#(xi) = sum v^dagger xi v

  /// V self-adjoint within herm_tol, V >= -psd_tol.
  void validate(double herm_tol = 1e-12, double psd_tol = 1e-10) const;

 private:
  int n_;
  std::vector<CMatrix> ops_;
  CMatrix v_;
};

/// Residuals of the two Lie-Jordan algebra identities on random triples:
/// [[a, b⊙c]] = [[a,b]]⊙c + b⊙[[a,c]]  (Leibniz) and
/// (a⊙b)⊙c − a⊙(b⊙c) = [[b, [[c,a]]]]  (associator).
struct LieJordanReport {
  int trials = 0;
  double max_leibniz_residual = 0.0;
  double max_associator_residual = 0.0;
  bool passed = false;
};

LieJordanReport verify_lie_jordan(int n, int trials, std::uint64_t seed,
                                  double tol = 1e-10);
LieJordanReport verify_lie_jordan(const HermitianBasis& basis, int trials,
                                  std::uint64_t seed, double tol = 1e-10);

/// Choi matrix C = sum_{kl} E_{kl} ⊗ Phi(E_{kl}) over the matrix units E_{kl}.
CMatrix choi_matrix(const KrausSet& map);
/// Same, for a map given as its n^2 x n^2 superoperator (column-stacking).
CMatrix choi_matrix(const CMatrix& superop);

/// Minimum eigenvalue of the hermitized Choi matrix.
double choi_min_eigenvalue(const CMatrix& choi);

/// Complete positivity test: min Choi eigenvalue >= -tol.
bool is_completely_positive(const KrausSet& map, double tol);
bool is_completely_positive(const CMatrix& superop, double tol);

/// Frobenius distance used for all matrix comparisons in this library.
double frobenius_distance(const CMatrix& a, const CMatrix& b);

/// Hermiticity residual ||a - a^dagger||_F.
double hermiticity_residual(const CMatrix& a);

}  // namespace geoflow
