#include "geoflow/model_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace geoflow {

using nlohmann::json;

std::string to_string(BasisConvention c) {
  return c == BasisConvention::kOrthonormal ? "orthonormal" : "pauli";
}

namespace {

CMatrix parse_matrix(const json& node, int n, const std::string& what) {
  if (!node.is_object() || !node.contains("re"))
    throw ParseError(what + ": expected {\"re\": [[...]], \"im\": [[...]]}");
  const json& re = node.at("re");
  if (!re.is_array() || static_cast<int>(re.size()) != n)
    throw ParseError(what + ": \"re\" must be an " + std::to_string(n) + "x" +
                     std::to_string(n) + " array");
  CMatrix out = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = re.at(static_cast<size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ParseError(what + ": ragged \"re\" row");
    for (int j = 0; j < n; ++j)
      out(i, j) = row.at(static_cast<size_t>(j)).get<double>();
  }
  if (node.contains("im")) {
    const json& im = node.at("im");
    if (!im.is_array() || static_cast<int>(im.size()) != n)
      throw ParseError(what + ": \"im\" must be an " + std::to_string(n) + "x" +
                       std::to_string(n) + " array");
    for (int i = 0; i < n; ++i) {
      const json& row = im.at(static_cast<size_t>(i));
      if (!row.is_array() || static_cast<int>(row.size()) != n)
        throw ParseError(what + ": ragged \"im\" row");
      for (int j = 0; j < n; ++j)
        out(i, j) += Complex(0.0, row.at(static_cast<size_t>(j)).get<double>());
    }
  }
  return out;
}

json matrix_to_json(const CMatrix& a) {
  json re = json::array();
  json im = json::array();
  for (int i = 0; i < a.rows(); ++i) {
    json re_row = json::array();
    json im_row = json::array();
    for (int j = 0; j < a.cols(); ++j) {
      re_row.push_back(a(i, j).real());
      im_row.push_back(a(i, j).imag());
    }
    re.push_back(re_row);
    im.push_back(im_row);
  }
  return json{{"re", re}, {"im", im}};
}

std::vector<CMatrix> parse_matrix_list(const json& node, int n,
                                       const std::string& what) {
  if (!node.is_array() || node.empty())
    throw ParseError(what + ": expected a non-empty array of matrices");
  std::vector<CMatrix> out;
  for (size_t i = 0; i < node.size(); ++i)
    out.push_back(parse_matrix(node.at(i), n, what + "[" + std::to_string(i) + "]"));
  return out;
}

Complex parse_weight(const json& node) {
  if (node.is_number()) return Complex(node.get<double>(), 0.0);
  if (node.is_object() && node.contains("re"))
    return Complex(node.at("re").get<double>(),
                   node.value("im", 0.0));
  throw ParseError("weights: expected a number or {\"re\", \"im\"}");
}

std::vector<Complex> parse_weights(const json& node) {
  if (!node.is_array()) throw ParseError("weights: expected an array");
  std::vector<Complex> out;
  for (const json& w : node) out.push_back(parse_weight(w));
  return out;
}

std::vector<double> parse_reals(const json& node, const std::string& what) {
  if (!node.is_array()) throw ParseError(what + ": expected an array");
  std::vector<double> out;
  for (const json& v : node) out.push_back(v.get<double>());
  return out;
}

SemigroupFamily parse_semigroup(const json& node, int n) {
  if (!node.is_object() || !node.contains("type"))
    throw ParseError("semigroup: expected an object with a \"type\"");
  const std::string type = node.at("type").get<std::string>();
  CMatrix h;  // empty means H = 0
  if (node.contains("hamiltonian"))
    h = parse_matrix(node.at("hamiltonian"), n, "semigroup.hamiltonian");
  if (type == "poisson") {
    return PoissonFamily{parse_matrix(node.at("unitary"), n, "semigroup.unitary")};
  }
  if (type == "weighted_poisson") {
    WeightedPoissonFamily fam;
    fam.weights = parse_weights(node.at("weights"));
    fam.unitaries = parse_matrix_list(node.at("unitaries"), n, "semigroup.unitaries");
    fam.hamiltonian = h;
    return fam;
  }
  if (type == "gaussian") {
    return GaussianFamily{parse_matrix(node.at("v"), n, "semigroup.v")};
  }
  if (type == "weighted_gaussian") {
    WeightedGaussianFamily fam;
    fam.weights = parse_weights(node.at("weights"));
    fam.vs = parse_matrix_list(node.at("vs"), n, "semigroup.vs");
    fam.hamiltonian = h;
    return fam;
  }
  if (type == "random_unitary") {
    RandomUnitaryFamily fam;
    fam.alphas = node.contains("alphas")
                     ? parse_reals(node.at("alphas"), "semigroup.alphas")
                     : std::vector<double>{};
    if (node.contains("hermitians"))
      fam.hermitians =
          parse_matrix_list(node.at("hermitians"), n, "semigroup.hermitians");
    fam.beta = node.value("beta", 0.0);
    fam.probs = node.contains("probs")
                    ? parse_reals(node.at("probs"), "semigroup.probs")
                    : std::vector<double>{};
    if (node.contains("unitaries"))
      fam.unitaries =
          parse_matrix_list(node.at("unitaries"), n, "semigroup.unitaries");
    fam.hamiltonian = h;
    return fam;
  }
  throw ParseError("semigroup: unknown type \"" + type + "\"");
}

json semigroup_to_json(const SemigroupFamily& fam) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        json out;
        if constexpr (std::is_same_v<T, PoissonFamily>) {
          out["type"] = "poisson";
          out["unitary"] = matrix_to_json(f.unitary);
        } else if constexpr (std::is_same_v<T, WeightedPoissonFamily>) {
          out["type"] = "weighted_poisson";
          json ws = json::array();
          for (const Complex& w : f.weights)
            ws.push_back(json{{"re", w.real()}, {"im", w.imag()}});
          out["weights"] = ws;
          json us = json::array();
          for (const CMatrix& u : f.unitaries) us.push_back(matrix_to_json(u));
          out["unitaries"] = us;
          if (f.hamiltonian.size() > 0)
            out["hamiltonian"] = matrix_to_json(f.hamiltonian);
        } else if constexpr (std::is_same_v<T, GaussianFamily>) {
          out["type"] = "gaussian";
          out["v"] = matrix_to_json(f.v);
        } else if constexpr (std::is_same_v<T, WeightedGaussianFamily>) {
          out["type"] = "weighted_gaussian";
          json ws = json::array();
          for (const Complex& w : f.weights)
            ws.push_back(json{{"re", w.real()}, {"im", w.imag()}});
          out["weights"] = ws;
          json vs = json::array();
          for (const CMatrix& v : f.vs) vs.push_back(matrix_to_json(v));
          out["vs"] = vs;
          if (f.hamiltonian.size() > 0)
            out["hamiltonian"] = matrix_to_json(f.hamiltonian);
        } else {
          out["type"] = "random_unitary";
          out["alphas"] = f.alphas;
          json es = json::array();
          for (const CMatrix& e : f.hermitians) es.push_back(matrix_to_json(e));
          out["hermitians"] = es;
          out["beta"] = f.beta;
          out["probs"] = f.probs;
          json us = json::array();
          for (const CMatrix& u : f.unitaries) us.push_back(matrix_to_json(u));
          out["unitaries"] = us;
          if (f.hamiltonian.size() > 0)
            out["hamiltonian"] = matrix_to_json(f.hamiltonian);
        }
        return out;
      },
      fam);
}

}  // namespace

ModelFile ModelFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model file not found: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("model file is not valid JSON: " + std::string(e.what()));
  }
  return from_json(doc);
}

ModelFile ModelFile::from_json(const json& doc) {
  ModelFile mf;
  if (!doc.is_object() || !doc.contains("n"))
    throw ParseError("model: expected an object with \"n\"");
  mf.n = doc.at("n").get<int>();
  if (mf.n < 2) throw ParseError("model: n must be >= 2");

  const std::string conv = doc.value("basis_convention", "orthonormal");
  if (conv == "orthonormal")
    mf.convention = BasisConvention::kOrthonormal;
  else if (conv == "pauli")
    mf.convention = BasisConvention::kPauli;
  else
    throw ParseError("model: basis_convention must be orthonormal|pauli");
  if (mf.convention == BasisConvention::kPauli && mf.n != 2)
    throw ParseError("model: basis_convention pauli requires n = 2");

  if (doc.contains("hamiltonian"))
    mf.hamiltonian = parse_matrix(doc.at("hamiltonian"), mf.n, "hamiltonian");

  const bool has_kraus = doc.contains("kraus");
  const bool has_semigroup = doc.contains("semigroup");
  if (has_kraus == has_semigroup)
    throw ParseError("model: exactly one of \"kraus\" / \"semigroup\" required");
  if (has_kraus)
    mf.kraus = parse_matrix_list(doc.at("kraus"), mf.n, "kraus");
  else
    mf.semigroup = parse_semigroup(doc.at("semigroup"), mf.n);
  return mf;
}

json ModelFile::to_json() const {
  json out;
  out["n"] = n;
  out["basis_convention"] = to_string(convention);
  if (hamiltonian) out["hamiltonian"] = matrix_to_json(*hamiltonian);
  if (kraus) {
    json ks = json::array();
    for (const CMatrix& v : *kraus) ks.push_back(matrix_to_json(v));
    out["kraus"] = ks;
  }
  if (semigroup) out["semigroup"] = semigroup_to_json(*semigroup);
  return out;
}

GklsModel ModelFile::build_model() const {
  if (kraus) {
    CMatrix h = hamiltonian ? *hamiltonian : CMatrix::Zero(n, n);
    return GklsModel(h, KrausSet(*kraus));
  }
  GklsModel model = build_generator(*semigroup);
  if (hamiltonian) {
    // top-level Hamiltonian adds to the family's (usually zero) one
    return GklsModel(model.hamiltonian + *hamiltonian, model.kraus);
  }
  return model;
}

void RunConfig::validate() const {
  integrator.validate();
  if (horizon <= 0 || rank_tol <= 0 || state_tol <= 0 || lasalle_samples < 1 ||
      s_infinity_samples < 1)
    throw InvariantError("RunConfig: horizons, tolerances and sample counts must be positive");
}

void atomic_write_file(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot open for writing: " + tmp);
    out << text;
    if (!out) throw NumericalError("short write: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw NumericalError("rename failed for " + path + ": " + ec.message());
}

}  // namespace geoflow
