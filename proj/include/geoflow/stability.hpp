#pragma once

#include <variant>

#include "geoflow/flow.hpp"

namespace geoflow {

/// Semigroup families of the LaSalle analysis. Weighted variants accept
/// complex weights; only |alpha_j|^2 enters the generator.
struct PoissonFamily {
  CMatrix unitary;
};

struct WeightedPoissonFamily {
  std::vector<Complex> weights;
  std::vector<CMatrix> unitaries;
  CMatrix hamiltonian;  // may be empty for H = 0
};

struct GaussianFamily {
  CMatrix v;  // self-adjoint
};

struct WeightedGaussianFamily {
  std::vector<Complex> weights;
  std::vector<CMatrix> vs;  // self-adjoint
  CMatrix hamiltonian;
};

/// L(xi) = -2[[H,xi]] - V⊙xi + sum_j alpha_j e_j xi e_j
///         + beta sum_j p_j U_j xi U_j^dagger,
/// alpha_j >= 0, beta >= 0, p a probability vector, e_j orthonormal
/// self-adjoint, U_j unitary.
struct RandomUnitaryFamily {
  std::vector<double> alphas;
  std::vector<CMatrix> hermitians;  // the orthonormal self-adjoint set e_j
  double beta = 0.0;
  std::vector<double> probs;
  std::vector<CMatrix> unitaries;
  CMatrix hamiltonian;
};

using SemigroupFamily =
    std::variant<PoissonFamily, WeightedPoissonFamily, GaussianFamily,
                 WeightedGaussianFamily, RandomUnitaryFamily>;

/// Builds the GKLS model of a family after checking its invariants
/// (unitarity, self-adjointness, weight positivity, sum p_j = 1).
GklsModel build_generator(const SemigroupFamily& fam);

/// Operators whose simultaneous commutant characterizes the zero set E of
/// the purity Lie derivative (U_j for Poisson parts, v_j / e_j for Gaussian
/// parts with positive weight).
std::vector<CMatrix> commutant_generators(const SemigroupFamily& fam);

/// Affine fixed-point set: particular solution of c1 x = -c0 plus an
/// orthonormal basis of ker(c1).
struct FixedPointSet {
  bool solvable = false;
  RVector particular;
  RMatrix null_basis;  // m x dimension, orthonormal columns
  int dimension = 0;
  double residual = 0.0;
};

FixedPointSet fixed_points(const PolyField& f, double residual_tol = 1e-10,
                           double null_tol = 1e-10);

/// L_Γ F at p for F = purity/2: sum_k x^k Γ^k(x) in orthonormal coordinates.
double purity_lie_derivative(const PolyField& f, const CoherencePoint& p);

/// Closed form for Poisson semigroups: |ρ̃|^2 (cos θ − 1), θ the angle
/// between the traceless parts ρ̃ and U ρ̃ U†.
double poisson_angle_formula(const CMatrix& u, const CoherencePoint& p,
                             const HermitianBasis& basis);

/// Closed form for Gaussian semigroups: |ρv|^2 (cos θ − 1), θ the angle
/// between ρv and vρ in the trace inner product.
double gaussian_angle_formula(const CMatrix& v, const CoherencePoint& p,
                              const HermitianBasis& basis);

/// Weighted closed form covering every family variant (Hamiltonian part
/// contributes zero).
double closed_form_lie_derivative(const SemigroupFamily& fam,
                                  const CoherencePoint& p,
                                  const HermitianBasis& basis);

/// Commutant dimension d_U = sum_j d_j^2 from spectral clustering at tol.
/// Throws NumericalError when two eigenvalue clusters sit between tol and
/// 2 tol apart (ambiguous).
int commutant_dimension(const CMatrix& u, double tol = 1e-8);

/// Independent route: complex dimension of ker(A -> AU - UA).
int commutant_kernel_dimension(const CMatrix& u, double tol = 1e-8);

/// Orthonormal coordinate basis (over the full e^mu system, length n^2) of
/// the self-adjoint part of the simultaneous commutant of `ops`.
RMatrix hermitian_commutant_basis(const std::vector<CMatrix>& ops,
                                  const HermitianBasis& basis,
                                  double tol = 1e-10);

enum class SInfinityClass {
  kAllOfEFixed,
  kProperSubset,
  kSingletonMaximallyMixed,
};

std::string to_string(SInfinityClass c);

struct LaSalleReport {
  double max_lie_derivative = 0.0;
  double closed_form_max_deviation = 0.0;
  std::string e_description;
  std::vector<int> commutant_dimensions;
  bool certified = false;
  int samples = 0;
};

/// Samples states across strata and certifies L_Γ F <= lasalle_tol, with the
/// closed-form cross-check. Throws NumericalError when a sampled Lie
/// derivative is positive beyond tolerance.
LaSalleReport lasalle_certify(const SemigroupFamily& fam, int sample_count,
                              std::uint64_t seed, const HermitianBasis& basis,
                              const StructureConstants& sc,
                              double lasalle_tol = 1e-12,
                              double closed_form_tol = 1e-10);

struct SInfinityProbe {
  SInfinityClass classification = SInfinityClass::kProperSubset;
  double max_displacement = 0.0;  // movement of E-samples under the flow
  double max_exit_distance = 0.0; // distance from the commutant subspace
  int samples = 0;
  int e_dimension = 0;            // traceless directions inside E
};

/// Samples states in E, flows them for the horizon, and classifies the
/// largest invariant set: every sample fixed (< stay_tol), every sample
/// expelled (> exit_tol), or neither (proper subset, raw distances attached).
SInfinityProbe s_infinity_probe(const SemigroupFamily& fam, double horizon,
                                int sample_count, std::uint64_t seed,
                                const HermitianBasis& basis,
                                const StructureConstants& sc,
                                double stay_tol = 1e-8, double exit_tol = 1e-4);

}  // namespace geoflow
