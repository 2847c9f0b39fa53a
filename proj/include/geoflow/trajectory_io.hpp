#pragma once

#include <string>

#include "geoflow/flow.hpp"
#include "geoflow/model_io.hpp"

namespace geoflow {

/// One CSV row per trajectory sample: tau, the coordinates (in the file's
/// declared convention), and the state diagnostics.
struct TrajectoryTable {
  int coord_count = 0;
  std::vector<double> tau;
  std::vector<RVector> x;
  std::vector<double> purity;
  std::vector<int> rank;
  std::vector<double> min_eig;
};

/// Renders the exact header `tau,x_1,...,x_{n^2-1},purity,rank,min_eig` and
/// one row per sample. Coordinates are emitted in `convention`; diagnostics
/// are computed in the orthonormal basis.
std::string trajectory_to_csv(const Trajectory& traj, const HermitianBasis& basis,
                              BasisConvention convention,
                              double rank_tol = kDefaultRankTol,
                              double state_tol = kDefaultStateTol);

/// Writes the CSV atomically.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const HermitianBasis& basis, BasisConvention convention,
                          double rank_tol = kDefaultRankTol,
                          double state_tol = kDefaultStateTol);

TrajectoryTable parse_trajectory_csv(const std::string& text);
TrajectoryTable read_trajectory_csv(const std::string& path);

}  // namespace geoflow
