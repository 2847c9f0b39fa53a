#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>

#include "geoflow/stability.hpp"

namespace geoflow {

enum class BasisConvention { kOrthonormal, kPauli };

std::string to_string(BasisConvention c);

/// Parsed model document. Matrices are given as explicit {"re": [[...]],
/// "im": [[...]]} component arrays; exactly one of kraus / semigroup is
/// present. `basis_convention` ("orthonormal" default, "pauli" for n = 2)
/// fixes the coordinate convention of CLI inputs and outputs.
struct ModelFile {
  int n = 0;
  BasisConvention convention = BasisConvention::kOrthonormal;
  std::optional<CMatrix> hamiltonian;
  std::optional<std::vector<CMatrix>> kraus;
  std::optional<SemigroupFamily> semigroup;

  static ModelFile load(const std::string& path);
  static ModelFile from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  bool has_semigroup() const { return semigroup.has_value(); }
  GklsModel build_model() const;
};

/// Shared run parameters of the CLI commands (defaults per the artifact).
struct RunConfig {
  double t_end = 5.0;
  IntegratorConfig integrator = IntegratorConfig::rk4();
  std::uint64_t seed = 0;
  int lasalle_samples = 1000;
  int s_infinity_samples = 20;
  double horizon = 20.0;
  double rank_tol = kDefaultRankTol;
  double state_tol = kDefaultStateTol;

  void validate() const;
};

/// Writes `text` to `path` atomically (write-then-rename).
void atomic_write_file(const std::string& path, const std::string& text);

}  // namespace geoflow
