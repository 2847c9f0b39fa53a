#include "geoflow/fields.hpp"

#include <algorithm>
#include <cmath>

namespace geoflow {

PolyField::PolyField(int coord_count)
    : m_(coord_count),
      c0_(RVector::Zero(coord_count)),
      c1_(RMatrix::Zero(coord_count, coord_count)) {
  if (m_ < 1) throw InvariantError("PolyField: coord count must be >= 1");
}

PolyField PolyField::affine(RVector constant, RMatrix linear) {
  const int m = static_cast<int>(constant.size());
  if (linear.rows() != m || linear.cols() != m)
    throw InvariantError("PolyField::affine: inconsistent shapes");
  PolyField f(m);
  f.c0_ = std::move(constant);
  f.c1_ = std::move(linear);
  return f;
}

int PolyField::degree() const {
  if (max_abs_cubic() > 0.0) return 3;
  if (max_abs_quadratic() > 0.0) return 2;
  if (c1_.cwiseAbs().maxCoeff() > 0.0) return 1;
  return 0;
}

double PolyField::cubic(int k, int a, int b, int c) const {
  if (c3_.empty()) return 0.0;
  return c3_[c3_index(k, a, b, c)];
}

void PolyField::ensure_quadratic() {
  if (c2_.empty()) c2_.assign(static_cast<size_t>(m_), RMatrix::Zero(m_, m_));
}

void PolyField::ensure_cubic() {
  if (c3_.empty()) c3_.assign(static_cast<size_t>(m_) * m_ * m_ * m_, 0.0);
}

RMatrix& PolyField::mutable_quadratic(int k) {
  ensure_quadratic();
  return c2_[static_cast<size_t>(k)];
}

void PolyField::add_cubic_sym(int k, int a, int b, int c, double t) {
  if (t == 0.0) return;
  ensure_cubic();
  const double s = t / 6.0;
  c3_[c3_index(k, a, b, c)] += s;
  c3_[c3_index(k, a, c, b)] += s;
  c3_[c3_index(k, b, a, c)] += s;
  c3_[c3_index(k, b, c, a)] += s;
  c3_[c3_index(k, c, a, b)] += s;
  c3_[c3_index(k, c, b, a)] += s;
}

RVector PolyField::evaluate(const RVector& x) const {
  if (x.size() != m_)
    throw InvariantError("PolyField::evaluate: dimension mismatch");
  RVector out = c0_ + c1_ * x;
  if (!c2_.empty())
    for (int k = 0; k < m_; ++k) out(k) += x.dot(c2_[static_cast<size_t>(k)] * x);
  if (!c3_.empty()) {
    for (int k = 0; k < m_; ++k) {
      double acc = 0.0;
      for (int a = 0; a < m_; ++a) {
        if (x(a) == 0.0) continue;
        for (int b = 0; b < m_; ++b) {
          if (x(b) == 0.0) continue;
          double inner = 0.0;
          for (int c = 0; c < m_; ++c) inner += c3_[c3_index(k, a, b, c)] * x(c);
          acc += x(a) * x(b) * inner;
        }
      }
      out(k) += acc;
    }
  }
  return out;
}

RVector PolyField::evaluate(const CoherencePoint& p) const {
  return evaluate(p.x);
}

RMatrix PolyField::jacobian(const RVector& x) const {
  if (x.size() != m_)
    throw InvariantError("PolyField::jacobian: dimension mismatch");
  RMatrix j = c1_;
  if (!c2_.empty())
    for (int k = 0; k < m_; ++k)
      j.row(k) += 2.0 * (c2_[static_cast<size_t>(k)] * x).transpose();
  if (!c3_.empty()) {
    for (int k = 0; k < m_; ++k)
      for (int a = 0; a < m_; ++a) {
        double acc = 0.0;
        for (int b = 0; b < m_; ++b)
          for (int c = 0; c < m_; ++c)
            acc += c3_[c3_index(k, a, b, c)] * x(b) * x(c);
        j(k, a) += 3.0 * acc;
      }
  }
  return j;
}

double PolyField::max_abs_quadratic() const {
  double out = 0.0;
  for (const RMatrix& q : c2_) out = std::max(out, q.cwiseAbs().maxCoeff());
  return out;
}

double PolyField::max_abs_cubic() const {
  double out = 0.0;
  for (double t : c3_) out = std::max(out, std::abs(t));
  return out;
}

bool PolyField::is_affine(double tol) const {
  return max_abs_quadratic() < tol && max_abs_cubic() < tol;
}

void PolyField::validate(double sym_tol) const {
  for (const RMatrix& q : c2_)
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > sym_tol)
      throw InvariantError("PolyField: quadratic slab is not symmetric");
}

void PolyField::prune(double tol) {
  if (!c3_.empty() && max_abs_cubic() <= tol) c3_.clear();
  if (!c2_.empty() && max_abs_quadratic() <= tol) c2_.clear();
}

PolyField PolyField::operator+(const PolyField& other) const {
  if (m_ != other.m_) throw InvariantError("PolyField: coord count mismatch");
  PolyField out(m_);
  out.c0_ = c0_ + other.c0_;
  out.c1_ = c1_ + other.c1_;
  if (!c2_.empty() || !other.c2_.empty()) {
    out.ensure_quadratic();
    for (int k = 0; k < m_; ++k) {
      if (!c2_.empty()) out.c2_[static_cast<size_t>(k)] += c2_[static_cast<size_t>(k)];
      if (!other.c2_.empty())
        out.c2_[static_cast<size_t>(k)] += other.c2_[static_cast<size_t>(k)];
    }
  }
  if (!c3_.empty() || !other.c3_.empty()) {
    out.ensure_cubic();
    for (size_t i = 0; i < out.c3_.size(); ++i) {
      if (!c3_.empty()) out.c3_[i] += c3_[i];
      if (!other.c3_.empty()) out.c3_[i] += other.c3_[i];
    }
  }
  return out;
}

PolyField PolyField::operator-(const PolyField& other) const {
  return *this + other * (-1.0);
}

PolyField PolyField::operator*(double s) const {
  PolyField out = *this;
  out.c0_ *= s;
  out.c1_ *= s;
  for (RMatrix& q : out.c2_) q *= s;
  for (double& t : out.c3_) t *= s;
  return out;
}

double max_coeff_difference(const PolyField& f, const PolyField& g) {
  if (f.coord_count() != g.coord_count())
    throw InvariantError("max_coeff_difference: coord count mismatch");
  const int m = f.coord_count();
  double out = (f.constant() - g.constant()).cwiseAbs().maxCoeff();
  out = std::max(out, (f.linear() - g.linear()).cwiseAbs().maxCoeff());
  if (f.has_quadratic() || g.has_quadratic()) {
    const RMatrix zero = RMatrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      const RMatrix& fq = f.has_quadratic() ? f.quadratic(k) : zero;
      const RMatrix& gq = g.has_quadratic() ? g.quadratic(k) : zero;
      out = std::max(out, (fq - gq).cwiseAbs().maxCoeff());
    }
  }
  if (f.has_cubic() || g.has_cubic()) {
    for (int k = 0; k < m; ++k)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int c = 0; c < m; ++c)
            out = std::max(out,
                           std::abs(f.cubic(k, a, b, c) - g.cubic(k, a, b, c)));
  }
  return out;
}

AffinityReport affinity_report(const PolyField& f, double tol) {
  AffinityReport r;
  r.max_abs_quadratic = f.max_abs_quadratic();
  r.max_abs_cubic = f.max_abs_cubic();
  r.is_affine = f.is_affine(tol);
  return r;
}

namespace {

/// Accumulates sign * (f·∇)g into out, exactly on coefficients.
/// Requires deg(f) + deg(g) <= 4 (checked by the caller).
void accumulate_directional(const PolyField& f, const PolyField& g,
                            PolyField& out, double sign) {
  const int m = f.coord_count();
  const bool f2 = f.has_quadratic();
  const bool f3 = f.has_cubic();
  const bool g2 = g.has_quadratic();
  const bool g3 = g.has_cubic();

  // degree 0: F0_j G1_{kj}
  out.mutable_constant() += sign * (g.linear() * f.constant());

  // degree 1: F1_{ja} G1_{kj}  +  2 F0_j G2_k(j,a)
  out.mutable_linear() += sign * (g.linear() * f.linear());
  if (g2)
    for (int k = 0; k < m; ++k)
      out.mutable_linear().row(k) +=
          sign * 2.0 * (g.quadratic(k) * f.constant()).transpose();

  // degree 2 (symmetrized over a,b):
  //   F2_j(a,b) G1_{kj}  +  2 F1_{ja} G2_k(j,b)  +  3 F0_j G3_k(j,a,b)
  if (f2 || g2 || g3) {
    for (int k = 0; k < m; ++k) {
      RMatrix raw = RMatrix::Zero(m, m);
      if (f2)
        for (int j = 0; j < m; ++j)
          if (g.linear()(k, j) != 0.0) raw += g.linear()(k, j) * f.quadratic(j);
      if (g2) raw += 2.0 * (f.linear().transpose() * g.quadratic(k));
      if (g3)
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += g.cubic(k, j, a, b) * f.constant()(j);
            raw(a, b) += 3.0 * acc;
          }
      const RMatrix sym = 0.5 * (raw + raw.transpose());
      if (sym.cwiseAbs().maxCoeff() != 0.0) out.mutable_quadratic(k) += sign * sym;
    }
  }

  // degree 3 (symmetrized over a,b,c):
  //   F3_j(a,b,c) G1_{kj}  +  2 F2_j(a,b) G2_k(j,c)  +  3 F1_{ja} G3_k(j,b,c)
  if (f3)
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j) {
        const double gl = g.linear()(k, j);
        if (gl == 0.0) continue;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
              out.add_cubic_sym(k, a, b, c, sign * gl * f.cubic(j, a, b, c));
      }
  if (f2 && g2)
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int c = 0; c < m; ++c) {
          const double gq = g.quadratic(k)(j, c);
          if (gq == 0.0) continue;
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
              out.add_cubic_sym(k, a, b, c, sign * 2.0 * gq * f.quadratic(j)(a, b));
        }
  if (g3)
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int a = 0; a < m; ++a) {
          const double fl = f.linear()(j, a);
          if (fl == 0.0) continue;
          for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
              out.add_cubic_sym(k, a, b, c, sign * 3.0 * fl * g.cubic(k, j, b, c));
        }
}

}  // namespace

PolyField bracket(const PolyField& f, const PolyField& g) {
  if (f.coord_count() != g.coord_count())
    throw InvariantError("bracket: coord count mismatch");
  if (f.degree() + g.degree() > 4)
    throw InvariantError("bracket: result would exceed degree 3 (unsupported)");
  f.validate();
  g.validate();
  PolyField out(f.coord_count());
  accumulate_directional(f, g, out, +1.0);
  accumulate_directional(g, f, out, -1.0);
  out.prune(0.0);
  return out;
}

PolyField hamiltonian_field(const CMatrix& a, const HermitianBasis& basis,
                            const StructureConstants& sc) {
  const int m = basis.coord_count();
  const RVector aj = basis.traceless_components(a);
  PolyField f(m);
  for (int k = 1; k <= m; ++k)
    for (int l = 1; l <= m; ++l) {
      double acc = 0.0;
      for (int j = 1; j <= m; ++j) acc += sc.c(j, k, l) * aj(j - 1);
      f.mutable_linear()(k - 1, l - 1) = acc;
    }
  return f;
}

PolyField gradient_field(const CMatrix& b, const HermitianBasis& basis,
                         const StructureConstants& sc) {
  const int m = basis.coord_count();
  const int n = basis.dim();
  const RVector bj = basis.traceless_components(b);
  PolyField f(m);
  f.mutable_constant() = bj / double(n);
  for (int k = 1; k <= m; ++k)
    for (int l = 1; l <= m; ++l) {
      double acc = 0.0;
      for (int j = 1; j <= m; ++j) acc += sc.d(j, k, l) * bj(j - 1);
      f.mutable_linear()(k - 1, l - 1) = acc;
    }
  // -(b_j x^j) x^k, one symmetric slab per component
  for (int k = 0; k < m; ++k) {
    RMatrix& q = f.mutable_quadratic(k);
    for (int a = 0; a < m; ++a) {
      q(a, k) -= 0.5 * bj(a);
      q(k, a) -= 0.5 * bj(a);
    }
  }
  return f;
}

PolyField kraus_field(const KrausSet& map, const HermitianBasis& basis) {
  if (map.dim() != basis.dim())
    throw InvariantError("kraus_field: map/basis dimension mismatch");
  const int m = basis.coord_count();
  const int n = basis.dim();
  PolyField f(m);
  const CMatrix& v = map.v_sum();
  const RVector vj = basis.traceless_components(v);
  const double tr_v = v.trace().real();

  for (int mu = 0; mu <= m; ++mu) {
    const CMatrix image = map.apply(basis.element(mu));
    const RVector a_col = basis.traceless_components(image);  // A^k_mu
    if (mu == 0)
      f.mutable_constant() = a_col / std::sqrt(double(n));
    else
      f.mutable_linear().col(mu - 1) = a_col;
  }
  // -x^k f_V(xi), f_V = Tr(V)/n + V_j x^j with V = map#(I)
  f.mutable_linear().diagonal().array() -= tr_v / double(n);
  for (int k = 0; k < m; ++k) {
    RMatrix& q = f.mutable_quadratic(k);
    for (int a = 0; a < m; ++a) {
      q(a, k) -= 0.5 * vj(a);
      q(k, a) -= 0.5 * vj(a);
    }
  }
  return f;
}

GklsModel::GklsModel(CMatrix hamiltonian_, KrausSet kraus_)
    : n(kraus_.dim()),
      hamiltonian(std::move(hamiltonian_)),
      kraus(std::move(kraus_)) {
  if (hamiltonian.size() == 0) hamiltonian = CMatrix::Zero(n, n);
  if (hamiltonian.rows() != n || hamiltonian.cols() != n)
    throw InvariantError("GklsModel: Hamiltonian/Kraus dimension mismatch");
  if (hermiticity_residual(hamiltonian) > 1e-12)
    throw InvariantError("GklsModel: Hamiltonian not self-adjoint");
}

CMatrix GklsModel::apply_generator(const CMatrix& rho) const {
  const Complex i_unit(0.0, 1.0);
  const CMatrix& v = v_sum();
  CMatrix out = -i_unit * (hamiltonian * rho - rho * hamiltonian) -
                0.5 * (v * rho + rho * v);
  out += kraus.apply(rho);
  return out;
}

GklsDecomposition gkls_decomposition(const GklsModel& model,
                                     const HermitianBasis& basis,
                                     const StructureConstants& sc,
                                     double affine_tol) {
  // a = 2H, b = -V reproduce L(rho) = -i[H,rho] - (1/2){V,rho} + K(rho)
  // under c^{mu nu}_sigma = Tr([[e^mu, e^nu]] e^sigma).
  PolyField x = hamiltonian_field(2.0 * model.hamiltonian, basis, sc);
  PolyField y = gradient_field(-model.v_sum(), basis, sc);
  PolyField z = kraus_field(model.kraus, basis);
  PolyField total = x + y + z;
  const AffinityReport rep = affinity_report(total, affine_tol);
  if (!rep.is_affine)
    throw InvariantError(
        "gkls_field: quadratic parts of Y and Z failed to cancel "
        "(internal inconsistency)");
  total.prune(affine_tol);
  return GklsDecomposition{std::move(x), std::move(y), std::move(z),
                           std::move(total)};
}

PolyField gkls_field(const GklsModel& model, const HermitianBasis& basis,
                     const StructureConstants& sc, double affine_tol) {
  return gkls_decomposition(model, basis, sc, affine_tol).total;
}

CoherencePoint sl_action(const CMatrix& g, const CoherencePoint& p,
                         const HermitianBasis& basis, double denom_tol) {
  if (g.rows() != p.n || g.cols() != p.n)
    throw InvariantError("sl_action: group element dimension mismatch");
  const CMatrix rho = to_matrix(p, basis);
  const CMatrix moved = g * rho * g.adjoint();
  const double denom = moved.trace().real();
  if (std::abs(denom) < denom_tol * moved.norm())
    throw NumericalError("sl_action: trace denominator vanished (blow-up)");
  return from_matrix(moved / denom, basis, 1e-9);
}

RVector orthonormal_to_pauli(const RVector& x) { return std::sqrt(2.0) * x; }

RVector pauli_to_orthonormal(const RVector& x) { return x / std::sqrt(2.0); }

PolyField to_pauli_convention(const PolyField& f) {
  if (f.coord_count() != 3)
    throw InvariantError("to_pauli_convention: defined for n = 2 only");
  // x_p = sqrt(2) x_o, so v_p(x_p) = sqrt(2) v_o(x_p / sqrt(2)): degree-d
  // coefficients pick up a factor 2^{(1-d)/2}.
  const double s = std::sqrt(2.0);
  PolyField out(3);
  out.mutable_constant() = s * f.constant();
  out.mutable_linear() = f.linear();
  if (f.has_quadratic())
    for (int k = 0; k < 3; ++k) out.mutable_quadratic(k) = f.quadratic(k) / s;
  if (f.has_cubic())
    for (int k = 0; k < 3; ++k)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c)
            out.add_cubic_sym(k, a, b, c, 0.5 * f.cubic(k, a, b, c));
  return out;
}

}  // namespace geoflow
