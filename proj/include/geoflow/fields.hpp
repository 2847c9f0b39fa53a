#pragma once

#include <optional>
#include <vector>

#include "geoflow/statespace.hpp"

namespace geoflow {

inline constexpr double kDefaultAffineTol = 1e-10;

/// Polynomial vector field on T1, degree <= 3, stored by exact coefficient
/// tensors. Component k evaluates to
///   v^k(x) = c0_k + c1_{ka} x^a + c2_k(x,x) + c3_k(x,x,x),
/// with c2 symmetric in its two input slots and c3 in its three. Degree 3
/// exists only so brackets of quadratic fields stay exact; the field
/// constructors never emit it.
class PolyField {
 public:
  explicit PolyField(int coord_count);

  static PolyField affine(RVector constant, RMatrix linear);

  int coord_count() const { return m_; }
  int degree() const;

  const RVector& constant() const { return c0_; }
  const RMatrix& linear() const { return c1_; }

  bool has_quadratic() const { return !c2_.empty(); }
  bool has_cubic() const { return !c3_.empty(); }

  /// Quadratic slab of component k: symmetric m x m matrix Q with
  /// v^k quadratic part = x^T Q x.
  const RMatrix& quadratic(int k) const { return c2_[static_cast<size_t>(k)]; }
  double cubic(int k, int a, int b, int c) const;

  RVector& mutable_constant() { return c0_; }
  RMatrix& mutable_linear() { return c1_; }
  /// Allocates zero quadratic slabs on first use.
  RMatrix& mutable_quadratic(int k);
  /// Accumulates t into c3[k](a,b,c), symmetrized over (a,b,c).
  void add_cubic_sym(int k, int a, int b, int c, double t);

  RVector evaluate(const RVector& x) const;
  RVector evaluate(const CoherencePoint& p) const;

  /// Exact Jacobian d v^k / d x^j at a point.
  RMatrix jacobian(const RVector& x) const;

  double max_abs_quadratic() const;
  double max_abs_cubic() const;
  bool is_affine(double tol = kDefaultAffineTol) const;

  /// Checks the input-slot symmetry of the quadratic slabs (the cubic block
  /// is symmetric by construction). Throws InvariantError beyond sym_tol.
  void validate(double sym_tol = 1e-14) const;

  /// Drops quadratic/cubic blocks whose every entry is below tol.
  void prune(double tol = 0.0);

  PolyField operator+(const PolyField& other) const;
  PolyField operator-(const PolyField& other) const;
  PolyField operator*(double s) const;

 private:
  friend PolyField bracket(const PolyField& f, const PolyField& g);
  void ensure_quadratic();
  void ensure_cubic();
  size_t c3_index(int k, int a, int b, int c) const {
    return ((static_cast<size_t>(k) * m_ + a) * m_ + b) * m_ + c;
  }
  int m_;
  RVector c0_;
  RMatrix c1_;
  std::vector<RMatrix> c2_;   // empty or size m
  std::vector<double> c3_;    // empty or size m^4, symmetric in last three
};

/// Largest absolute coefficient difference between two fields, degree by
/// degree (absent blocks compare as zero).
double max_coeff_difference(const PolyField& f, const PolyField& g);

struct AffinityReport {
  double max_abs_quadratic = 0.0;
  double max_abs_cubic = 0.0;
  bool is_affine = false;
};

AffinityReport affinity_report(const PolyField& f,
                               double tol = kDefaultAffineTol);

/// Exact Jacobi-Lie bracket [f,g] = (f·∇)g − (g·∇)f on polynomial
/// coefficients. Throws InvariantError when the result would exceed degree 3.
PolyField bracket(const PolyField& f, const PolyField& g);

/// Hamiltonian vector field X_a = c^{jk}_l a_j x^l ∂_k. Purely linear;
/// independent of Tr(a).
PolyField hamiltonian_field(const CMatrix& a, const HermitianBasis& basis,
                            const StructureConstants& sc);

/// Gradient-like vector field
/// Y_b = (d^{jk}_l x^l b_j + δ^{jk} b_j / n) ∂_k − (x^j b_j) Δ.
/// Carries a quadratic term; independent of Tr(b).
PolyField gradient_field(const CMatrix& b, const HermitianBasis& basis,
                         const StructureConstants& sc);

/// Kraus vector field of a completely positive map A:
/// Z_A = (A^k_mu x^mu − x^k f_V) ∂_k with A^k_mu = Tr(A(e^mu) e^k),
/// f_V(xi) = Tr(V xi), V = A#(I); x^0 = 1/sqrt(n) implicit.
PolyField kraus_field(const KrausSet& map, const HermitianBasis& basis);

/// GKLS model: Hamiltonian plus Kraus list, the physical input from which
/// the vector field is assembled. Generator ground truth:
/// L(rho) = −i[H,rho] − ½{V,rho} + Σ v_j rho v_j†, V = Σ v_j† v_j.
struct GklsModel {
  int n = 0;
  CMatrix hamiltonian;
  KrausSet kraus;

  GklsModel(CMatrix hamiltonian_, KrausSet kraus_);

  const CMatrix& v_sum() const { return kraus.v_sum(); }
  /// Matrix-space generator L(rho); the oracle every field is checked against.
  CMatrix apply_generator(const CMatrix& rho) const;
};

/// The three pieces of Γ = X_a + Y_b + Z_K (a = 2H, b = −V) plus their sum.
struct GklsDecomposition {
  PolyField hamiltonian_part;
  PolyField gradient_part;
  PolyField kraus_part;
  PolyField total;
};

GklsDecomposition gkls_decomposition(const GklsModel& model,
                                     const HermitianBasis& basis,
                                     const StructureConstants& sc,
                                     double affine_tol = kDefaultAffineTol);

PolyField gkls_field(const GklsModel& model, const HermitianBasis& basis,
                     const StructureConstants& sc,
                     double affine_tol = kDefaultAffineTol);

/// Nonlinear SL(n,C) action α_g(ρ) = g ρ g† / Tr(g ρ g†). Throws
/// NumericalError when the denominator is below denom_tol · ||g ρ g†||.
CoherencePoint sl_action(const CMatrix& g, const CoherencePoint& p,
                         const HermitianBasis& basis, double denom_tol = 1e-12);

/// Conversions between the internal orthonormal coordinates and the usual
/// Bloch-vector convention for n = 2, where rho = (sigma_0 + x.sigma)/2
/// over the orthogonal Pauli basis (x_pauli = sqrt(2) · x_orthonormal).
RVector orthonormal_to_pauli(const RVector& x);
RVector pauli_to_orthonormal(const RVector& x);
/// Rescales a field's coefficients into Pauli-convention coordinates.
PolyField to_pauli_convention(const PolyField& f);

}  // namespace geoflow
