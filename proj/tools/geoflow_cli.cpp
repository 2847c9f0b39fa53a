#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "geoflow/bloch_svg.hpp"
#include "geoflow/model_io.hpp"
#include "geoflow/trajectory_io.hpp"

namespace gf = geoflow;
using nlohmann::json;

namespace {

constexpr int kExitCheckFailure = 1;
constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitNumerical = 4;

gf::RVector parse_x0(const std::string& spec, int m) {
  std::vector<double> vals;
  std::istringstream in(spec);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      vals.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw gf::ParseError("--x0: bad number '" + cell + "'");
    }
  }
  if (static_cast<int>(vals.size()) != m)
    throw gf::ParseError("--x0: expected " + std::to_string(m) +
                         " comma-separated coordinates");
  gf::RVector x(m);
  for (int i = 0; i < m; ++i) x(i) = vals[static_cast<size_t>(i)];
  return x;
}

json vector_to_json(const gf::RVector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json_rows(const gf::RMatrix& a) {
  json out = json::array();
  for (int i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    out.push_back(row);
  }
  return out;
}

gf::PolyField in_convention(const gf::PolyField& f, gf::BasisConvention conv) {
  return conv == gf::BasisConvention::kPauli ? gf::to_pauli_convention(f) : f;
}

void print_field_table(std::ostream& os, const std::string& name,
                       const gf::PolyField& f) {
  const Eigen::IOFormat fmt(6, 0, "  ", "\n    ", "", "", "", "");
  os << name << ":\n";
  os << "  constant: [" << f.constant().transpose().format(fmt) << "]\n";
  os << "  linear:\n    " << f.linear().format(fmt) << "\n";
  os << "  max |quadratic| = " << f.max_abs_quadratic()
     << ", max |cubic| = " << f.max_abs_cubic() << "\n";
}

json field_to_json(const gf::PolyField& f) {
  json out;
  out["constant"] = vector_to_json(f.constant());
  out["linear"] = matrix_to_json_rows(f.linear());
  out["max_abs_quadratic"] = f.max_abs_quadratic();
  out["max_abs_cubic"] = f.max_abs_cubic();
  if (f.has_quadratic()) {
    json q = json::array();
    for (int k = 0; k < f.coord_count(); ++k)
      q.push_back(matrix_to_json_rows(f.quadratic(k)));
    out["quadratic"] = q;
  }
  return out;
}

struct LoadedModel {
  gf::ModelFile file;
  gf::GklsModel model;
  gf::HermitianBasis basis;
  gf::StructureConstants sc;

  explicit LoadedModel(const std::string& path)
      : file(gf::ModelFile::load(path)),
        model(file.build_model()),
        basis(gf::HermitianBasis::gellmann(file.n)),
        sc(gf::StructureConstants::from_basis(basis)) {}
};

json integrator_meta(const gf::IntegratorConfig& cfg) {
  json meta;
  meta["method"] = cfg.method_name();
  if (cfg.method == gf::IntegratorMethod::kRk4Fixed)
    meta["dt"] = cfg.dt;
  else {
    meta["rel_tol"] = cfg.rel_tol;
    meta["abs_tol"] = cfg.abs_tol;
  }
  return meta;
}

int cmd_simulate(const std::string& model_path, const std::string& x0_spec,
                 const gf::RunConfig& run, const std::string& out_path) {
  LoadedModel lm(model_path);
  const int m = lm.basis.coord_count();
  gf::RVector x0 = parse_x0(x0_spec, m);
  if (lm.file.convention == gf::BasisConvention::kPauli)
    x0 = gf::pauli_to_orthonormal(x0);
  const gf::CoherencePoint p0(lm.file.n, x0);
  const gf::PolyField gamma = gf::gkls_field(lm.model, lm.basis, lm.sc);
  const gf::Trajectory traj = gf::integrate(gamma, p0, run.t_end, run.integrator);
  gf::write_trajectory_csv(out_path, traj, lm.basis, lm.file.convention,
                           run.rank_tol, run.state_tol);

  json sidecar;
  sidecar["model"] = lm.file.to_json();
  sidecar["basis_convention"] = gf::to_string(lm.file.convention);
  sidecar["convention_note"] =
      "coordinates in the CSV are " + gf::to_string(lm.file.convention) +
      "; pauli coordinates are sqrt(2) times orthonormal ones (n=2 only)";
  sidecar["integrator"] = integrator_meta(run.integrator);
  sidecar["t_end"] = run.t_end;
  sidecar["seed"] = run.seed;
  sidecar["x0"] = vector_to_json(parse_x0(x0_spec, m));
  sidecar["rows"] = traj.times.size();
  sidecar["negative_time"] = traj.leaves_state_space_possible;
  gf::atomic_write_file(out_path + ".json", sidecar.dump(2) + "\n");
  std::cout << "wrote " << out_path << " (" << traj.times.size() << " rows) and "
            << out_path << ".json\n";
  return 0;
}

int cmd_decompose(const std::string& model_path, bool as_json) {
  LoadedModel lm(model_path);
  const gf::GklsDecomposition dec =
      gf::gkls_decomposition(lm.model, lm.basis, lm.sc);
  const gf::AffinityReport aff = gf::affinity_report(dec.total);
  const gf::FixedPointSet fps = gf::fixed_points(dec.total);

  const gf::BasisConvention conv = lm.file.convention;
  const gf::PolyField x = in_convention(dec.hamiltonian_part, conv);
  const gf::PolyField y = in_convention(dec.gradient_part, conv);
  const gf::PolyField z = in_convention(dec.kraus_part, conv);
  const gf::PolyField total = in_convention(dec.total, conv);
  gf::RVector particular = fps.particular;
  if (conv == gf::BasisConvention::kPauli)
    particular = gf::orthonormal_to_pauli(particular);

  if (as_json) {
    json out;
    out["basis_convention"] = gf::to_string(conv);
    out["hamiltonian_field"] = field_to_json(x);
    out["gradient_field"] = field_to_json(y);
    out["kraus_field"] = field_to_json(z);
    out["gkls_field"] = field_to_json(total);
    out["affinity"] = {{"max_abs_quadratic", aff.max_abs_quadratic},
                       {"max_abs_cubic", aff.max_abs_cubic},
                       {"is_affine", aff.is_affine}};
    out["fixed_points"] = {{"solvable", fps.solvable},
                           {"particular", vector_to_json(particular)},
                           {"dimension", fps.dimension},
                           {"residual", fps.residual},
                           {"null_basis", matrix_to_json_rows(fps.null_basis)}};
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  std::cout << "basis convention: " << gf::to_string(conv) << "\n\n";
  print_field_table(std::cout, "X (Hamiltonian field)", x);
  print_field_table(std::cout, "Y (gradient-like field)", y);
  print_field_table(std::cout, "Z (Kraus field)", z);
  print_field_table(std::cout, "Gamma = X + Y + Z", total);
  std::cout << "affinity: max |quadratic| = " << aff.max_abs_quadratic
            << ", max |cubic| = " << aff.max_abs_cubic << ", affine "
            << (aff.is_affine ? "yes" : "NO") << "\n";
  std::cout << "fixed points: "
            << (fps.solvable ? "solvable" : "no solution within tolerance")
            << ", particular = [" << particular.transpose()
            << "], null-space dimension " << fps.dimension << ", residual "
            << fps.residual << "\n";
  return 0;
}

int cmd_lasalle(const std::string& model_path, const gf::RunConfig& run,
                bool as_json, bool force) {
  LoadedModel lm(model_path);
  if (!lm.file.has_semigroup() && !force)
    throw gf::InvariantError(
        "lasalle: the model does not declare a semigroup family "
        "(use --force to probe the raw generator)");

  json out;
  std::ostringstream text;
  bool ok = true;
  if (lm.file.has_semigroup()) {
    const gf::SemigroupFamily& fam = *lm.file.semigroup;
    const gf::LaSalleReport report = gf::lasalle_certify(
        fam, run.lasalle_samples, run.seed, lm.basis, lm.sc);
    const gf::SInfinityProbe probe =
        gf::s_infinity_probe(fam, run.horizon, run.s_infinity_samples,
                             run.seed + 1, lm.basis, lm.sc);
    ok = report.certified;
    out["certified"] = report.certified;
    out["max_lie_derivative"] = report.max_lie_derivative;
    out["closed_form_max_deviation"] = report.closed_form_max_deviation;
    out["e_description"] = report.e_description;
    out["commutant_dimensions"] = report.commutant_dimensions;
    out["samples"] = report.samples;
    out["s_infinity"] = {{"classification", gf::to_string(probe.classification)},
                         {"max_displacement", probe.max_displacement},
                         {"max_exit_distance", probe.max_exit_distance},
                         {"e_dimension", probe.e_dimension},
                         {"samples", probe.samples}};
    text << "LaSalle certification: " << (report.certified ? "PASS" : "FAIL")
         << "\n  max purity Lie derivative over " << report.samples
         << " samples: " << report.max_lie_derivative
         << "\n  closed-form max deviation: " << report.closed_form_max_deviation
         << "\n  E: " << report.e_description << "\n  commutant dimensions:";
    for (int d : report.commutant_dimensions) text << ' ' << d;
    text << "\n  S-infinity: " << gf::to_string(probe.classification)
         << " (max displacement " << probe.max_displacement
         << ", max exit distance " << probe.max_exit_distance << ")\n";
  } else {
    // raw generator probe: sampled Lie derivative statistics only
    const gf::PolyField gamma = gf::gkls_field(lm.model, lm.basis, lm.sc);
    std::mt19937_64 rng(run.seed);
    double max_ld = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < run.lasalle_samples; ++s) {
      const gf::CMatrix rho = gf::sample_density_matrix(lm.file.n, lm.file.n, rng);
      const gf::CoherencePoint p = gf::from_matrix(rho, lm.basis);
      max_ld = std::max(max_ld, gf::purity_lie_derivative(gamma, p));
    }
    out["certified"] = nullptr;
    out["max_lie_derivative"] = max_ld;
    out["note"] = "raw generator (--force): no family structure, no certification";
    text << "raw generator probe (--force): max purity Lie derivative over "
         << run.lasalle_samples << " samples: " << max_ld << "\n";
  }
  if (as_json)
    std::cout << out.dump(2) << "\n";
  else
    std::cout << text.str();
  return ok ? 0 : kExitCheckFailure;
}

int cmd_verify(const std::string& model_path, const gf::RunConfig& run) {
  LoadedModel lm(model_path);
  const int n = lm.file.n;
  int failures = 0;
  auto check = [&](const std::string& name, bool passed, const std::string& detail) {
    std::cout << (passed ? "[ ok ] " : "[FAIL] ") << name << ": " << detail << "\n";
    if (!passed) ++failures;
  };

  // oracle consistency from sampled initial states
  {
    std::mt19937_64 rng(run.seed);
    double worst = 0.0;
    for (int s = 0; s < 3; ++s) {
      const gf::CMatrix rho = gf::sample_density_matrix(n, n, rng);
      const gf::CoherencePoint p = gf::from_matrix(rho, lm.basis);
      const gf::OracleReport rep = gf::oracle_consistency(
          lm.model, p, run.t_end, run.integrator, lm.basis, lm.sc, 25);
      worst = std::max(worst, rep.max_deviation);
    }
    std::ostringstream d;
    d << "max deviation " << worst << " (tol 1e-6) over t in [0," << run.t_end << "]";
    check("oracle consistency", worst < 1e-6, d.str());
  }

  // semigroup composition law + CPTP of the composed channel
  {
    const gf::SemigroupReport rep =
        gf::verify_semigroup(lm.model, 0.3, 0.7, 20, run.seed);
    std::ostringstream d;
    d << "composition deviation " << rep.max_composition_deviation
      << " (tol 1e-8), trace residual " << rep.trace_preservation_residual
      << ", Choi min eig " << rep.choi_min_eigenvalue;
    check("semigroup law + CPTP", rep.cptp && rep.max_composition_deviation < 1e-8,
          d.str());
  }

  // CPTP at fixed times
  for (double tau : {0.1, 1.0, 10.0}) {
    const double mineig =
        gf::choi_min_eigenvalue(gf::choi_matrix(gf::channel_superoperator(lm.model, tau)));
    std::ostringstream d;
    d << "Choi min eigenvalue " << mineig << " at tau = " << tau << " (tol -1e-10)";
    check("CPTP", mineig >= -1e-10, d.str());
  }

  // commutation relations at the model's dimension
  {
    std::mt19937_64 rng(run.seed + 17);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      const gf::CMatrix a = gf::random_traceless_hermitian(n, rng);
      const gf::CMatrix b = gf::random_traceless_hermitian(n, rng);
      const gf::CMatrix ab = gf::lie_product(a, b);
      const gf::PolyField xa = gf::hamiltonian_field(a, lm.basis, lm.sc);
      const gf::PolyField xb = gf::hamiltonian_field(b, lm.basis, lm.sc);
      const gf::PolyField ya = gf::gradient_field(a, lm.basis, lm.sc);
      const gf::PolyField yb = gf::gradient_field(b, lm.basis, lm.sc);
      worst = std::max(worst, gf::max_coeff_difference(
                                  gf::bracket(xa, xb),
                                  gf::hamiltonian_field(ab, lm.basis, lm.sc)));
      worst = std::max(worst, gf::max_coeff_difference(
                                  gf::bracket(xa, yb),
                                  gf::gradient_field(ab, lm.basis, lm.sc)));
      worst = std::max(
          worst, gf::max_coeff_difference(
                     gf::bracket(ya, yb),
                     gf::hamiltonian_field(ab, lm.basis, lm.sc) * (-1.0)));
    }
    std::ostringstream d;
    d << "max coefficient deviation " << worst << " (tol 1e-10) on 20 pairs";
    check("commutation relations", worst < 1e-10, d.str());
  }

  // informational: positivity fails backwards in time
  {
    const double mineig = gf::choi_min_eigenvalue(
        gf::choi_matrix(gf::channel_superoperator(lm.model, -0.5)));
    std::cout << "[info] tau = -0.5: Choi min eigenvalue " << mineig
              << (mineig < 0 ? " (not CP for tau < 0, as expected)" : "") << "\n";
  }

  std::cout << (failures == 0 ? "verify: all checks passed\n"
                              : "verify: FAILURES present\n");
  return failures == 0 ? 0 : kExitCheckFailure;
}

int cmd_bloch_plot(const std::string& traj_path, const std::string& out_path,
                   const std::string& convention) {
  const gf::TrajectoryTable table = gf::read_trajectory_csv(traj_path);
  gf::BasisConvention conv;
  if (convention == "orthonormal")
    conv = gf::BasisConvention::kOrthonormal;
  else if (convention == "pauli")
    conv = gf::BasisConvention::kPauli;
  else
    throw gf::ParseError("--convention must be orthonormal|pauli");
  gf::write_bloch_svg(out_path, table, conv);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("GEOFLOW_THREADS")) {
    const int k = std::atoi(threads);
    if (k > 0) Eigen::setNbThreads(k);
  }

  CLI::App app{"Geometric GKLS dynamics on the trace-one hyperplane"};
  app.require_subcommand(1);

  std::string model_path, x0_spec, out_path, traj_path, convention = "orthonormal";
  bool as_json = false, force = false, adaptive = false;
  gf::RunConfig run;

  auto add_model_flag = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_path, "model JSON file")->required();
  };

  CLI::App* sim = app.add_subcommand("simulate", "integrate the GKLS field");
  add_model_flag(sim);
  sim->add_option("--x0", x0_spec,
                  "initial coherence vector, comma separated, in the model's convention")
      ->required();
  sim->add_option("--t-end", run.t_end, "integration horizon");
  sim->add_option("--dt", run.integrator.dt, "fixed RK4 step");
  sim->add_flag("--adaptive", adaptive, "use the adaptive RK45 integrator");
  sim->add_option("--seed", run.seed, "run seed (echoed in the sidecar)");
  sim->add_option("--out", out_path, "output CSV path")->default_val("trajectory.csv");

  CLI::App* dec = app.add_subcommand("decompose", "print the X + Y + Z decomposition");
  add_model_flag(dec);
  dec->add_flag("--json", as_json, "machine-readable output");

  CLI::App* las = app.add_subcommand("lasalle", "LaSalle certification and S-infinity probe");
  add_model_flag(las);
  las->add_option("--samples", run.lasalle_samples, "states sampled for certification");
  las->add_option("--probe-samples", run.s_infinity_samples, "E-samples for the probe");
  las->add_option("--horizon", run.horizon, "probe flow horizon");
  las->add_option("--seed", run.seed, "sampling seed");
  las->add_flag("--json", as_json, "machine-readable output");
  las->add_flag("--force", force, "probe a raw GKLS model without family structure");

  CLI::App* ver = app.add_subcommand("verify", "oracle, semigroup, CPTP and bracket checks");
  add_model_flag(ver);
  ver->add_option("--t-end", run.t_end, "oracle-consistency horizon");
  ver->add_option("--seed", run.seed, "sampling seed");

  CLI::App* plot = app.add_subcommand("bloch-plot", "render a qubit trajectory as SVG");
  plot->add_option("--traj", traj_path, "trajectory CSV")->required();
  plot->add_option("--out", out_path, "output SVG path")->required();
  plot->add_option("--convention", convention,
                   "coordinate convention of the CSV (orthonormal|pauli)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParse;
  }

  try {
    if (adaptive)
      run.integrator = gf::IntegratorConfig::rk45();
    run.validate();
    if (sim->parsed()) return cmd_simulate(model_path, x0_spec, run, out_path);
    if (dec->parsed()) return cmd_decompose(model_path, as_json);
    if (las->parsed()) return cmd_lasalle(model_path, run, as_json, force);
    if (ver->parsed()) return cmd_verify(model_path, run);
    if (plot->parsed()) return cmd_bloch_plot(traj_path, out_path, convention);
  } catch (const gf::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const gf::InvariantError& e) {
    std::cerr << "invariant error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const gf::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
