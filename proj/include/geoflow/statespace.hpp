#pragma once

#include <cstdint>
#include <random>

#include "geoflow/algebra.hpp"

namespace geoflow {

/// A point of the trace-one hyperplane T1 in coherence coordinates:
/// xi = e^0/sqrt(n) + x^j e^j, with x real of length n^2 - 1.
struct CoherencePoint {
  int n = 0;
  RVector x;

  CoherencePoint() = default;
  CoherencePoint(int n_, RVector x_);

  static CoherencePoint maximally_mixed(int n);
};

/// Rank, spectrum, and purity readout of a point. Stratum membership is
/// reported, never enforced; flows may cross strata.
struct StateDiagnostics {
  double purity = 0.0;           // coordinate purity 1/n + |x|^2
  double spectral_purity = 0.0;  // sum lambda_i^2
  RVector spectrum;              // ascending, length n
  int rank = 0;                  // eigenvalues above rank_tol
  double min_eigenvalue = 0.0;
  bool is_state = false;         // min eigenvalue >= -state_tol
  int stratum = 0;               // = rank when is_state
};

inline constexpr double kDefaultRankTol = 1e-8;
inline constexpr double kDefaultStateTol = 1e-10;

CMatrix to_matrix(const CoherencePoint& p, const HermitianBasis& basis);

CoherencePoint from_matrix(const CMatrix& a, const HermitianBasis& basis,
                           double trace_tol = 1e-10, double herm_tol = 1e-10);

StateDiagnostics diagnostics(const CoherencePoint& p, const HermitianBasis& basis,
                             double rank_tol = kDefaultRankTol,
                             double state_tol = kDefaultStateTol);

/// Density matrix of rank exactly k: Dirichlet(1,...,1) eigenvalues on the
/// k-simplex conjugated by a Haar-random unitary.
CMatrix sample_density_matrix(int n, int rank, std::mt19937_64& rng);

/// Coordinate version of the sampler, deterministic for a given seed.
CoherencePoint sample_state(int n, int rank, std::uint64_t seed,
                            const HermitianBasis& basis);

/// Haar-distributed unitary (QR of a complex Ginibre matrix, phases fixed).
CMatrix haar_unitary(int n, std::mt19937_64& rng);

/// GUE-style random self-adjoint matrix.
CMatrix random_hermitian(int n, std::mt19937_64& rng);

/// Traceless GUE-style random self-adjoint matrix.
CMatrix random_traceless_hermitian(int n, std::mt19937_64& rng);

}  // namespace geoflow
