#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geoflow/bloch_svg.hpp"
#include "geoflow/trajectory_io.hpp"
#include "test_helpers.hpp"

using namespace geoflow;
using gftest::pauli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const HermitianBasis kBasis2 = HermitianBasis::gellmann(2);
const StructureConstants kSc2 = StructureConstants::from_basis(kBasis2);

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("geoflow_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string phase_damping_json(const std::string& convention = "pauli") {
  json doc;
  doc["n"] = 2;
  doc["basis_convention"] = convention;
  doc["kraus"] = {{{"re", {{0.0, 0.0}, {0.0, 0.0}}},
                   {"im", {{0.0, 0.0}, {0.0, 0.0}}}}};
  doc["kraus"][0]["re"] = {{1.0, 0.0}, {0.0, -1.0}};
  doc["kraus"][0]["im"] = {{0.0, 0.0}, {0.0, 0.0}};
  return doc.dump();
}

std::string driven_phase_damping_json() {
  json doc;
  doc["n"] = 2;
  doc["basis_convention"] = "pauli";
  doc["semigroup"] = {
      {"type", "weighted_poisson"},
      {"weights", {1.0}},
      {"unitaries", {{{"re", {{1.0, 0.0}, {0.0, -1.0}}}}}},
      {"hamiltonian", {{"re", {{0.0, 1.0}, {1.0, 0.0}}}}},
  };
  return doc.dump();
}

#ifdef GEOFLOW_CLI_PATH
int run_cli(const std::string& args, const std::string& log_path) {
  const std::string cmd =
      std::string(GEOFLOW_CLI_PATH) + " " + args + " > " + log_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_CASE("model parsing: kraus document round trip") {
  const ModelFile mf = ModelFile::from_json(json::parse(phase_damping_json()));
  CHECK(mf.n == 2);
  CHECK(mf.convention == BasisConvention::kPauli);
  REQUIRE(mf.kraus.has_value());
  CHECK((*mf.kraus)[0] == CMatrix(pauli(3)));
  const GklsModel model = mf.build_model();
  CHECK(max_coeff_difference(gkls_field(model, kBasis2, kSc2),
                             gkls_field(gftest::phase_damping_model(1.0),
                                        kBasis2, kSc2)) < 1e-13);
  // echo keeps the declared convention
  const json echo = mf.to_json();
  CHECK(echo.at("basis_convention") == "pauli");
  const ModelFile again = ModelFile::from_json(echo);
  CHECK((*again.kraus)[0] == (*mf.kraus)[0]);
}

TEST_CASE("model parsing: semigroup documents") {
  const ModelFile mf = ModelFile::from_json(json::parse(driven_phase_damping_json()));
  REQUIRE(mf.has_semigroup());
  const GklsModel model = mf.build_model();
  CHECK((model.hamiltonian - pauli(1)).norm() < 1e-14);
  const PolyField gamma =
      to_pauli_convention(gkls_field(model, kBasis2, kSc2));
  RMatrix expected(3, 3);
  expected << -2, 0, 0, 0, -2, -2, 0, 2, 0;
  CHECK((gamma.linear() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("model parsing: schema violations raise ParseError") {
  CHECK_THROWS_AS(ModelFile::from_json(json::parse(R"({"n": 2})")), ParseError);
  CHECK_THROWS_AS(ModelFile::from_json(json::parse(
                      R"({"n": 2, "kraus": [], "semigroup": {"type": "poisson"}})")),
                  ParseError);
  CHECK_THROWS_AS(
      ModelFile::from_json(json::parse(
          R"({"n": 3, "basis_convention": "pauli", "kraus": [{"re": [[1,0,0],[0,1,0],[0,0,1]]}]})")),
      ParseError);
  CHECK_THROWS_AS(
      ModelFile::from_json(json::parse(
          R"({"n": 2, "kraus": [{"re": [[1,0],[0,1],[0,0]]}]})")),
      ParseError);
  CHECK_THROWS_AS(
      ModelFile::from_json(json::parse(
          R"({"n": 2, "basis_convention": "sideways", "kraus": [{"re": [[1,0],[0,1]]}]})")),
      ParseError);
}

TEST_CASE("model invariants: violations raise InvariantError after parse") {
  const std::string bad_poisson =
      R"({"n": 2, "semigroup": {"type": "poisson", "unitary": {"re": [[1,1],[0,1]]}}})";
  const ModelFile mf = ModelFile::from_json(json::parse(bad_poisson));
  CHECK_THROWS_AS(mf.build_model(), InvariantError);
}

TEST_CASE("trajectory csv: exact header and round trip at 1e-12") {
  const PolyField gamma = gkls_field(gftest::phase_damping_model(1.0), kBasis2, kSc2);
  RVector x0p(3);
  x0p << 0.8, -0.1, 0.4;
  const Trajectory traj = integrate(gamma, CoherencePoint(2, pauli_to_orthonormal(x0p)),
                                    1.0, IntegratorConfig::rk4(1e-2));
  const std::string csv = trajectory_to_csv(traj, kBasis2, BasisConvention::kPauli);
  CHECK(csv.rfind("tau,x_1,x_2,x_3,purity,rank,min_eig\n", 0) == 0);

  const TrajectoryTable table = parse_trajectory_csv(csv);
  REQUIRE(table.tau.size() == traj.times.size());
  double worst = 0.0;
  for (size_t i = 0; i < table.tau.size(); ++i) {
    worst = std::max(worst, std::abs(table.tau[i] - traj.times[i]));
    worst = std::max(
        worst,
        (table.x[i] - orthonormal_to_pauli(traj.points[i])).cwiseAbs().maxCoeff());
    const StateDiagnostics d = diagnostics(CoherencePoint(2, traj.points[i]), kBasis2);
    worst = std::max(worst, std::abs(table.purity[i] - d.purity));
    worst = std::max(worst, std::abs(table.min_eig[i] - d.min_eigenvalue));
    CHECK(table.rank[i] == d.rank);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("trajectory csv: malformed input raises ParseError") {
  CHECK_THROWS_AS(parse_trajectory_csv(""), ParseError);
  CHECK_THROWS_AS(parse_trajectory_csv("a,b,c\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(
      parse_trajectory_csv("tau,x_1,x_2,x_3,purity,rank,min_eig\n0,1,2\n"),
      ParseError);
  CHECK_THROWS_AS(
      parse_trajectory_csv("tau,x_1,x_2,x_3,purity,rank,min_eig\n0,a,0,0,1,2,0\n"),
      ParseError);
}

TEST_CASE("bloch svg: deterministic output with circles and polyline") {
  const PolyField gamma = gkls_field(gftest::phase_damping_model(1.0), kBasis2, kSc2);
  RVector x0p(3);
  x0p << 0.9, 0.0, 0.3;
  const Trajectory traj = integrate(gamma, CoherencePoint(2, pauli_to_orthonormal(x0p)),
                                    2.0, IntegratorConfig::rk4(1e-2));
  const TrajectoryTable table = parse_trajectory_csv(
      trajectory_to_csv(traj, kBasis2, BasisConvention::kPauli));
  const std::string svg1 = render_bloch_svg(table, BasisConvention::kPauli);
  const std::string svg2 = render_bloch_svg(table, BasisConvention::kPauli);
  CHECK(svg1 == svg2);
  CHECK(svg1.find("<circle") != std::string::npos);
  CHECK(svg1.find("<polyline") != std::string::npos);
  CHECK(svg1.find("<svg") == 0);

  TrajectoryTable bad = table;
  bad.coord_count = 8;
  CHECK_THROWS_AS(render_bloch_svg(bad, BasisConvention::kPauli), InvariantError);
}

TEST_CASE("bloch svg: constant trajectory still renders markers") {
  TrajectoryTable table;
  table.coord_count = 3;
  table.tau = {0.0};
  RVector x(3);
  x << 0.2, 0.1, -0.3;
  table.x = {x};
  table.purity = {0.5};
  table.rank = {2};
  table.min_eig = {0.1};
  const std::string svg = render_bloch_svg(table, BasisConvention::kPauli);
  CHECK(svg.find("<polyline") == std::string::npos);
  CHECK(svg.find("fill=\"#c03030\"") != std::string::npos);
}

#ifdef GEOFLOW_MODELS_DIR
TEST_CASE("bundled model files parse, build, and stay consistent") {
  const fs::path dir(GEOFLOW_MODELS_DIR);
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    const ModelFile mf = ModelFile::load(entry.path().string());
    const GklsModel model = mf.build_model();
    const HermitianBasis basis = HermitianBasis::gellmann(mf.n);
    const StructureConstants sc = StructureConstants::from_basis(basis);
    const PolyField gamma = gkls_field(model, basis, sc);
    CHECK(gamma.is_affine());
    const CoherencePoint x0 = sample_state(mf.n, mf.n, 7, basis);
    CHECK(oracle_consistency(model, x0, 1.0, IntegratorConfig::rk4(1e-3), basis,
                             sc, 10)
              .max_deviation < 1e-6);
    if (mf.has_semigroup()) {
      const LaSalleReport report =
          lasalle_certify(*mf.semigroup, 100, 5, basis, sc);
      CHECK(report.certified);
    }
  }
  CHECK(seen >= 5);
}
#endif

TEST_CASE("atomic file write replaces content") {
  TempDir dir;
  const std::string path = dir.file("out.txt");
  atomic_write_file(path, "one");
  atomic_write_file(path, "two");
  CHECK(read_text(path) == "two");
  CHECK_FALSE(fs::exists(path + ".tmp"));
}

#ifdef GEOFLOW_CLI_PATH

TEST_CASE("cli simulate: phase damping CSV matches exp(-2 tau)") {
  TempDir dir;
  const std::string model = dir.file("pd.json");
  write_text(model, phase_damping_json());
  const std::string out = dir.file("traj.csv");
  const int rc = run_cli("simulate --model " + model +
                             " --x0 1,0,0 --t-end 2 --out " + out,
                         dir.file("log.txt"));
  REQUIRE(rc == 0);
  const TrajectoryTable table = read_trajectory_csv(out);
  double worst = 0.0;
  for (size_t i = 0; i < table.tau.size(); ++i)
    worst = std::max(worst,
                     std::abs(table.x[i](0) - std::exp(-2.0 * table.tau[i])));
  CHECK(worst < 1e-8);
  // sidecar exists and echoes the convention
  const json sidecar = json::parse(read_text(out + ".json"));
  CHECK(sidecar.at("basis_convention") == "pauli");
  CHECK(sidecar.at("integrator").at("method") == "rk4-fixed");
}

TEST_CASE("cli simulate: zero model produces a constant trajectory") {
  TempDir dir;
  json doc;
  doc["n"] = 2;
  doc["basis_convention"] = "pauli";
  doc["kraus"] = {{{"re", {{1.0, 0.0}, {0.0, 1.0}}}}};
  const std::string model = dir.file("zero.json");
  write_text(model, doc.dump());
  const std::string out = dir.file("traj.csv");
  REQUIRE(run_cli("simulate --model " + model + " --x0 0.3,0.2,0.1 --t-end 1 --out " + out,
                  dir.file("log.txt")) == 0);
  const TrajectoryTable table = read_trajectory_csv(out);
  for (const RVector& x : table.x) {
    CHECK(x(0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(x(1) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(x(2) == doctest::Approx(0.1).epsilon(1e-12));
  }
}

TEST_CASE("cli simulate: driven phase damping matches the closed form") {
  TempDir dir;
  const std::string model = dir.file("driven.json");
  write_text(model, driven_phase_damping_json());
  const std::string out = dir.file("traj.csv");
  REQUIRE(run_cli("simulate --model " + model + " --x0 0.4,-0.3,0.6 --t-end 5 --out " + out,
                  dir.file("log.txt")) == 0);
  const TrajectoryTable table = read_trajectory_csv(out);
  RVector x0p(3);
  x0p << 0.4, -0.3, 0.6;
  double worst = 0.0;
  for (size_t i = 0; i < table.tau.size(); ++i) {
    const RVector expected = gftest::driven_phase_damping_flow(x0p, table.tau[i]);
    worst = std::max(worst, (table.x[i] - expected).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("cli decompose: phase damping tables in json") {
  TempDir dir;
  const std::string model = dir.file("pd.json");
  write_text(model, phase_damping_json());
  const std::string log = dir.file("out.json");
  REQUIRE(run_cli("decompose --model " + model + " --json", log) == 0);
  const json doc = json::parse(read_text(log));
  CHECK(doc.at("affinity").at("is_affine") == true);
  CHECK(doc.at("basis_convention") == "pauli");
  const json& linear = doc.at("gkls_field").at("linear");
  CHECK(linear.at(0).at(0).get<double>() == doctest::Approx(-2.0));
  CHECK(linear.at(1).at(1).get<double>() == doctest::Approx(-2.0));
  CHECK(linear.at(2).at(2).get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  // X and Y vanish for phase damping
  CHECK(doc.at("hamiltonian_field").at("linear").at(0).at(1).get<double>() ==
        doctest::Approx(0.0));
  CHECK(doc.at("gradient_field").at("max_abs_quadratic").get<double>() < 1e-13);
  CHECK(doc.at("fixed_points").at("dimension") == 1);
}

TEST_CASE("cli lasalle: driven phase damping classifies the singleton") {
  TempDir dir;
  const std::string model = dir.file("driven.json");
  write_text(model, driven_phase_damping_json());
  const std::string log = dir.file("out.json");
  REQUIRE(run_cli("lasalle --model " + model +
                      " --samples 200 --probe-samples 8 --horizon 10 --json",
                  log) == 0);
  const json doc = json::parse(read_text(log));
  CHECK(doc.at("certified") == true);
  CHECK(doc.at("max_lie_derivative").get<double>() <= 1e-12);
  CHECK(doc.at("s_infinity").at("classification") == "singleton-maximally-mixed");
}

TEST_CASE("cli verify: phase damping passes every check") {
  TempDir dir;
  const std::string model = dir.file("pd.json");
  write_text(model, phase_damping_json());
  const std::string log = dir.file("log.txt");
  CHECK(run_cli("verify --model " + model + " --t-end 3", log) == 0);
  const std::string text = read_text(log);
  CHECK(text.find("[FAIL]") == std::string::npos);
  CHECK(text.find("not CP for tau < 0") != std::string::npos);
}

TEST_CASE("cli simulate: orthonormal convention scales the coordinates") {
  TempDir dir;
  const std::string model = dir.file("pd_ortho.json");
  write_text(model, phase_damping_json("orthonormal"));
  const std::string out = dir.file("traj.csv");
  const double x0 = 1.0 / std::sqrt(2.0);
  std::ostringstream args;
  args << "simulate --model " << model << " --x0 " << std::setprecision(17)
       << x0 << ",0,0 --t-end 1 --out " << out;
  REQUIRE(run_cli(args.str(), dir.file("log.txt")) == 0);
  const TrajectoryTable table = read_trajectory_csv(out);
  double worst = 0.0;
  for (size_t i = 0; i < table.tau.size(); ++i)
    worst = std::max(worst, std::abs(table.x[i](0) -
                                     x0 * std::exp(-2.0 * table.tau[i])));
  CHECK(worst < 1e-8);
  const json sidecar = json::parse(read_text(out + ".json"));
  CHECK(sidecar.at("basis_convention") == "orthonormal");
}

TEST_CASE("cli exit codes: parse=2, invariant=3") {
  TempDir dir;
  CHECK(run_cli("simulate --model " + dir.file("missing.json") +
                    " --x0 1,0,0 --out " + dir.file("t.csv"),
                dir.file("log1.txt")) == 2);

  const std::string bad_json = dir.file("bad.json");
  write_text(bad_json, "{ not json");
  CHECK(run_cli("decompose --model " + bad_json, dir.file("log2.txt")) == 2);

  const std::string bad_model = dir.file("nonunitary.json");
  write_text(bad_model,
             R"({"n": 2, "semigroup": {"type": "poisson", "unitary": {"re": [[1,1],[0,1]]}}})");
  CHECK(run_cli("decompose --model " + bad_model, dir.file("log3.txt")) == 3);

  // lasalle without a family and without --force is an invariant error
  const std::string pd = dir.file("pd.json");
  write_text(pd, phase_damping_json());
  CHECK(run_cli("lasalle --model " + pd, dir.file("log4.txt")) == 3);
  CHECK(run_cli("lasalle --model " + pd + " --force --samples 50",
                dir.file("log5.txt")) == 0);

  // non-self-adjoint Hamiltonian violates the model invariants
  const std::string bad_h = dir.file("bad_h.json");
  write_text(bad_h,
             R"({"n": 2, "hamiltonian": {"re": [[0,1],[0,0]]},
                 "kraus": [{"re": [[1,0],[0,-1]]}]})");
  CHECK(run_cli("decompose --model " + bad_h, dir.file("log8.txt")) == 3);
}

TEST_CASE("cli exit codes: numerical failure = 4") {
  TempDir dir;
  const std::string model = dir.file("pd.json");
  write_text(model, phase_damping_json());
  // a step budget far below t_end / dt exhausts the integrator
  const int rc = run_cli("simulate --model " + model +
                             " --x0 1,0,0 --t-end 1e9 --dt 1e-9 --out " +
                             dir.file("t.csv"),
                         dir.file("log.txt"));
  CHECK(rc == 4);
}

TEST_CASE("cli bloch-plot: qutrit trajectories are rejected with exit 3") {
  TempDir dir;
  json doc;
  doc["n"] = 3;
  doc["semigroup"] = {{"type", "gaussian"},
                      {"v", {{"re", {{1.0, 0, 0}, {0, -1.0, 0}, {0, 0, 0}}}}}};
  const std::string model = dir.file("qutrit.json");
  write_text(model, doc.dump());
  const std::string csv = dir.file("traj.csv");
  REQUIRE(run_cli("simulate --model " + model +
                      " --x0 0.1,0,0,0,0,0,0,0 --t-end 0.5 --out " + csv,
                  dir.file("log.txt")) == 0);
  CHECK(run_cli("bloch-plot --traj " + csv + " --out " + dir.file("x.svg"),
                dir.file("log2.txt")) == 3);
}

TEST_CASE("cli bloch-plot: deterministic svg from a csv") {
  TempDir dir;
  const std::string model = dir.file("pd.json");
  write_text(model, phase_damping_json());
  const std::string csv = dir.file("traj.csv");
  REQUIRE(run_cli("simulate --model " + model + " --x0 0.9,0,0.3 --t-end 1 --out " + csv,
                  dir.file("log.txt")) == 0);
  const std::string svg1 = dir.file("a.svg");
  const std::string svg2 = dir.file("b.svg");
  REQUIRE(run_cli("bloch-plot --traj " + csv + " --out " + svg1 +
                      " --convention pauli",
                  dir.file("log6.txt")) == 0);
  REQUIRE(run_cli("bloch-plot --traj " + csv + " --out " + svg2 +
                      " --convention pauli",
                  dir.file("log7.txt")) == 0);
  CHECK(read_text(svg1) == read_text(svg2));
  CHECK(read_text(svg1).find("<polyline") != std::string::npos);
}

#endif  // GEOFLOW_CLI_PATH
