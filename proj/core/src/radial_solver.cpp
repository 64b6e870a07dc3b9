// SPDX-License-Identifier: Apache-2.0
#include "galbrun/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "galbrun/calculus.hpp"

namespace galbrun {

namespace {

constexpr double kFourPi = 4.0 * kPi;

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

double vec_norm(const std::vector<Complex>& v) {
  NeumaierSum s;
  for (const auto& z : v) s.add(std::norm(z));
  return std::sqrt(s.value());
}

void require_radial_background(const BackgroundModel& model) {
  if (model.rotation().squaredNorm() != 0.0 || !model.flow_is_zero()) {
    throw DomainError("radial reduction requires Omega = 0 and b = 0");
  }
}

void require_domain(const BackgroundModel& model, double R) {
  if (model.min_radius() > 0.0 || model.max_radius() < R) {
    throw DomainError("model profiles are not defined on the whole radial mesh");
  }
}

void require_source(const RadialSource& source, double r2) {
  if (source.f && source.support_max > r2 * (1.0 + 1e-12)) {
    throw ConfigError("source f is supported outside the ball of radius r2");
  }
}

void regime_warnings(const BackgroundModel& model, const Mesh1D& mesh, SystemMetadata& meta) {
  if (model.omega() == 0.0) meta.warnings.push_back("omega = 0: singular parameter regime");
  double gmin = std::numeric_limits<double>::infinity();
  for (double r : mesh.nodes()) gmin = std::min(gmin, model.gamma()(r));
  if (!(gmin > 0.0)) meta.warnings.push_back("gamma = 0 on the mesh: singular parameter regime");
}

struct ElementQuadrature {
  std::vector<double> xi, w;
  explicit ElementQuadrature(int n) { gauss_legendre(n, xi, w); }
};

// Interior Cowling integrand for basis pair (a, b) on one element.
struct InteriorPoint {
  double r, jw;  // jw = 4 pi r^2 * weight
  double phi[2], dphi[2];
  RadialCoefficients c;
};

template <typename F>
void for_each_point(const BackgroundModel& model, const Mesh1D& mesh, std::size_t e,
                    const ElementQuadrature& q, F&& f) {
  const double ra = mesh.nodes()[e], rb = mesh.nodes()[e + 1];
  const double h = rb - ra;
  for (std::size_t k = 0; k < q.xi.size(); ++k) {
    InteriorPoint p;
    p.r = 0.5 * (ra + rb) + 0.5 * h * q.xi[k];
    p.jw = kFourPi * p.r * p.r * 0.5 * h * q.w[k];
    p.phi[0] = (rb - p.r) / h;
    p.phi[1] = (p.r - ra) / h;
    p.dphi[0] = -1.0 / h;
    p.dphi[1] = 1.0 / h;
    p.c = radial_coefficients(model, p.r);
    f(p);
  }
}

// rho cs^2 D(phi_b) D(phi_a) - rho M phi_b phi_a, D = d/dr + 2/r + q.
Complex interior_entry(const InteriorPoint& p, int a, int b) {
  const double s = 2.0 / p.r + p.c.q;
  const double Da = p.dphi[a] + s * p.phi[a];
  const double Db = p.dphi[b] + s * p.phi[b];
  return p.jw * (p.c.rho * p.c.cs * p.c.cs * Da * Db - p.c.rho * p.c.M * p.phi[a] * p.phi[b]);
}

void assemble_interior_block(const BackgroundModel& model, const Mesh1D& mesh,
                             const std::vector<long>& u_dof, const RadialSource& source,
                             const ElementQuadrature& q, BandedMatrix& A,
                             std::vector<Complex>& rhs) {
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const long dofs[2] = {u_dof[e], u_dof[e + 1]};
    for_each_point(model, mesh, e, q, [&](const InteriorPoint& p) {
      const Complex f = source.f ? source.f(p.r) : Complex(0.0);
      for (int a = 0; a < 2; ++a) {
        if (dofs[a] < 0) continue;
        const auto ia = static_cast<std::size_t>(dofs[a]);
        if (f != 0.0) rhs[ia] += p.jw * p.c.rho * f * p.phi[a];
        for (int b = 0; b < 2; ++b) {
          if (dofs[b] < 0) continue;
          A.add(ia, static_cast<std::size_t>(dofs[b]), interior_entry(p, a, b));
        }
      }
    });
  }
}

std::vector<double> cumulative_eta(const BackgroundModel& model, const Mesh1D& mesh) {
  std::vector<double> eta(mesh.n_nodes(), 0.0);
  for (std::size_t k = 1; k < mesh.n_nodes(); ++k) {
    eta[k] = eta[k - 1] + integrate_q(model, mesh.nodes()[k - 1], mesh.nodes()[k]);
  }
  return eta;
}

Complex exterior_stiffness(const RadialCoefficients& c, double eta) {
  if (std::abs(c.M) == 0.0) {
    throw SolverError("m2_rr + i omega gamma vanishes in the exterior; coefficient not invertible");
  }
  return std::exp(2.0 * eta) / (c.rho * c.M);
}

double exterior_mass(const RadialCoefficients& c, double eta) {
  return std::exp(2.0 * eta) / (c.cs * c.cs * c.rho);
}

Mesh1D two_region_mesh(double r2, double R, int n_int, int n_ext) {
  std::vector<double> nodes = Mesh1D::uniform(0.0, r2, n_int).nodes();
  const auto ext = Mesh1D::uniform(r2, R, n_ext).nodes();
  nodes.insert(nodes.end(), ext.begin() + 1, ext.end());
  return Mesh1D(std::move(nodes));
}

}  // namespace

// Mesh1D -------------------------------------------------------------------------

Mesh1D::Mesh1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw ConfigError("mesh needs at least one element");
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!std::isfinite(nodes_[k])) throw ConfigError("mesh node is not finite");
    if (k > 0 && !(nodes_[k] > nodes_[k - 1])) {
      throw ConfigError("mesh nodes must be strictly increasing");
    }
  }
}

Mesh1D Mesh1D::uniform(double a, double b, int n_elements) {
  if (n_elements < 1 || !(b > a)) throw ConfigError("uniform mesh needs a < b and n >= 1");
  std::vector<double> nodes(static_cast<std::size_t>(n_elements) + 1);
  for (int k = 0; k <= n_elements; ++k) {
    nodes[static_cast<std::size_t>(k)] = a + (b - a) * k / n_elements;
  }
  nodes.back() = b;
  return Mesh1D(std::move(nodes));
}

double Mesh1D::max_h() const {
  double m = 0.0;
  for (std::size_t e = 0; e < n_elements(); ++e) m = std::max(m, h(e));
  return m;
}

double Mesh1D::min_h() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < n_elements(); ++e) m = std::min(m, h(e));
  return m;
}

std::optional<std::size_t> Mesh1D::find_node(double r, double rel_tol) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), r);
  const double tol = rel_tol * std::max(1.0, std::abs(r));
  for (auto cand : {it, it == nodes_.begin() ? it : it - 1}) {
    if (cand != nodes_.end() && std::abs(*cand - r) <= tol) {
      return static_cast<std::size_t>(cand - nodes_.begin());
    }
  }
  return std::nullopt;
}

std::size_t Mesh1D::element_of(double r) const {
  if (r < nodes_.front() - 1e-12 * std::max(1.0, std::abs(nodes_.front())) ||
      r > nodes_.back() + 1e-12 * std::max(1.0, std::abs(nodes_.back()))) {
    throw DomainError("point outside the mesh");
  }
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  std::size_t k = static_cast<std::size_t>(it - nodes_.begin());
  k = std::clamp<std::size_t>(k, 1, n_elements());
  return k - 1;
}

// BandedMatrix -------------------------------------------------------------------

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), data_(n * (kl + ku + 1), Complex(0.0)) {}

bool BandedMatrix::in_band(std::size_t i, std::size_t j) const {
  return i < n_ && j < n_ && j + kl_ >= i && j <= i + ku_;
}

Complex BandedMatrix::at(std::size_t i, std::size_t j) const {
  if (!in_band(i, j)) return 0.0;
  return data_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

void BandedMatrix::add(std::size_t i, std::size_t j, Complex v) {
  if (!in_band(i, j)) throw SolverError("matrix entry outside the declared band");
  data_[i * (kl_ + ku_ + 1) + (j + kl_ - i)] += v;
}

std::vector<Complex> BandedMatrix::multiply(const std::vector<Complex>& x) const {
  if (x.size() != n_) throw SolverError("dimension mismatch in band matrix product");
  std::vector<Complex> y(n_, Complex(0.0));
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i > kl_ ? i - kl_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + ku_);
    ComplexSum s;
    for (std::size_t j = j0; j <= j1; ++j) s.add(at(i, j) * x[j]);
    y[i] = s.value();
  }
  return y;
}

double BandedMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

Eigen::MatrixXcd BandedMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (in_band(i, j)) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, j);
    }
  }
  return d;
}

// BandedLU -----------------------------------------------------------------------

nlohmann::json PivotDiagnostics::to_json() const {
  return {{"min_pivot", min_pivot},
          {"max_pivot", max_pivot},
          {"ratio", ratio},
          {"min_pivot_index", min_pivot_index},
          {"near_singular", near_singular}};
}

BandedLU::BandedLU(const BandedMatrix& a, double near_singular_ratio)
    : n_(a.size()), kl_(a.kl()), ku_(a.ku()), width_(2 * a.kl() + a.ku() + 1),
      lu_(a.size() * (2 * a.kl() + a.ku() + 1), Complex(0.0)), perm_(a.size()) {
  auto idx = [this](std::size_t i, std::size_t j) { return i * width_ + (j + kl_ - i); };
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i > kl_ ? i - kl_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + ku_);
    for (std::size_t j = j0; j <= j1; ++j) lu_[idx(i, j)] = a.at(i, j);
  }
  pivots_.min_pivot = std::numeric_limits<double>::infinity();
  pivots_.max_pivot = 0.0;
  const std::size_t upper = kl_ + ku_;
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t i_end = std::min(n_ - 1, k + kl_);
    std::size_t p = k;
    double best = std::abs(lu_[idx(k, k)]);
    for (std::size_t i = k + 1; i <= i_end; ++i) {
      const double v = std::abs(lu_[idx(i, k)]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    perm_[k] = p;
    if (best == 0.0) {
      std::ostringstream msg;
      msg << "matrix is singular: zero pivot at index " << k;
      throw SolverError(msg.str());
    }
    const std::size_t j_end = std::min(n_ - 1, k + upper);
    if (p != k) {
      for (std::size_t j = k; j <= j_end; ++j) std::swap(lu_[idx(k, j)], lu_[idx(p, j)]);
    }
    const Complex piv = lu_[idx(k, k)];
    if (best < pivots_.min_pivot) {
      pivots_.min_pivot = best;
      pivots_.min_pivot_index = k;
    }
    pivots_.max_pivot = std::max(pivots_.max_pivot, best);
    for (std::size_t i = k + 1; i <= i_end; ++i) {
      const Complex l = lu_[idx(i, k)] / piv;
      lu_[idx(i, k)] = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j <= j_end; ++j) lu_[idx(i, j)] -= l * lu_[idx(k, j)];
    }
  }
  pivots_.ratio = n_ > 0 ? pivots_.min_pivot / pivots_.max_pivot : 1.0;
  pivots_.near_singular = pivots_.ratio < near_singular_ratio;
}

std::vector<Complex> BandedLU::solve(std::vector<Complex> b) const {
  if (b.size() != n_) throw SolverError("dimension mismatch in LU solve");
  auto idx = [this](std::size_t i, std::size_t j) { return i * width_ + (j + kl_ - i); };
  for (std::size_t k = 0; k < n_; ++k) {
    if (perm_[k] != k) std::swap(b[k], b[perm_[k]]);
    const std::size_t i_end = std::min(n_ - 1, k + kl_);
    for (std::size_t i = k + 1; i <= i_end; ++i) b[i] -= lu_[idx(i, k)] * b[k];
  }
  const std::size_t upper = kl_ + ku_;
  for (std::size_t k = n_; k-- > 0;) {
    const std::size_t j_end = std::min(n_ - 1, k + upper);
    Complex s = b[k];
    for (std::size_t j = k + 1; j <= j_end; ++j) s -= lu_[idx(k, j)] * b[j];
    b[k] = s / lu_[idx(k, k)];
  }
  return b;
}

// Metadata -------------------------------------------------------------------------

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::kCoupled:
      return "coupled";
    case Formulation::kReference:
      return "reference";
    case Formulation::kFullGravity:
      return "full-gravity";
  }
  return "unknown";
}

nlohmann::json SystemMetadata::to_json() const {
  return {{"formulation", to_string(formulation)},
          {"mode_l", mode_l},
          {"constraints", constraints},
          {"warnings", warnings},
          {"n_displacement_dofs", n_displacement_dofs},
          {"n_exterior_scalar_dofs", n_exterior_scalar_dofs},
          {"n_gravity_dofs", n_gravity_dofs},
          {"n_exterior_nodes", n_exterior_nodes},
          {"exterior_vector_equivalent_dofs", exterior_vector_equivalent_dofs},
          {"r2", r2},
          {"R", R},
          {"exterior_coefficient_scale", exterior_coefficient_scale}};
}

RadialSource RadialSource::bump(Complex amplitude, double a, double b) {
  if (!(b > a) || a < 0.0) throw ConfigError("bump source needs 0 <= a < b");
  RadialSource s;
  s.support_max = b;
  s.f = [amplitude, a, b](double r) -> Complex {
    const double t = (2.0 * r - (a + b)) / (b - a);
    if (!(std::abs(t) < 1.0)) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
  };
  return s;
}

// Assembly -------------------------------------------------------------------------

AssembledSystem assemble_coupled(const BackgroundModel& model, const Mesh1D& mesh_int,
                                 const Mesh1D& mesh_ext, const RadialSource& source, double R_ext,
                                 const AssemblyOptions& options) {
  require_radial_background(model);
  const double r2 = model.radii().r2;
  if (!close(mesh_int.front(), 0.0) || !close(mesh_int.back(), r2) ||
      !close(mesh_ext.front(), r2)) {
    throw ConfigError("r2 is not a mesh node: interior mesh must span [0, r2], exterior [r2, R_ext]");
  }
  if (!close(mesh_ext.back(), R_ext)) throw ConfigError("exterior mesh must end at R_ext");
  require_source(source, r2);
  require_domain(model, R_ext);

  AssembledSystem sys;
  sys.model = model;
  sys.mesh_u = mesh_int;
  sys.mesh_v = mesh_ext;
  const std::size_t nu = mesh_int.n_nodes() - 1;  // nodes 1..N
  const std::size_t nv = mesh_ext.n_nodes() - 1;  // nodes 0..M-1
  const std::size_t n = nu + nv;
  sys.matrix = BandedMatrix(n, 1, 1);
  sys.rhs.assign(n, Complex(0.0));
  sys.u_dof.assign(mesh_int.n_nodes(), -1);
  sys.v_dof.assign(mesh_ext.n_nodes(), -1);
  for (std::size_t i = 1; i < mesh_int.n_nodes(); ++i) {
    sys.u_dof[i] = static_cast<long>(i - 1);
    sys.dofs.push_back({FieldKind::kDisplacement, i});
  }
  for (std::size_t i = 0; i + 1 < mesh_ext.n_nodes(); ++i) {
    sys.v_dof[i] = static_cast<long>(nu + i);
    sys.dofs.push_back({FieldKind::kExteriorScalar, i});
  }
  sys.exterior_block = std::make_pair(nu, n);

  const ElementQuadrature q(options.quadrature_points);
  assemble_interior_block(model, mesh_int, sys.u_dof, source, q, sys.matrix, sys.rhs);

  const std::vector<double> eta_nodes = cumulative_eta(model, mesh_ext);
  for (std::size_t e = 0; e < mesh_ext.n_elements(); ++e) {
    const long dofs[2] = {sys.v_dof[e], sys.v_dof[e + 1]};
    const double ra = mesh_ext.nodes()[e];
    for_each_point(model, mesh_ext, e, q, [&](const InteriorPoint& p) {
      const double eta = eta_nodes[e] + integrate_q(model, ra, p.r);
      const Complex K = options.exterior_coefficient_scale * exterior_stiffness(p.c, eta);
      const double W = exterior_mass(p.c, eta);
      const Complex g = source.g ? source.g(p.r) : Complex(0.0);
      for (int a = 0; a < 2; ++a) {
        if (dofs[a] < 0) continue;
        const auto ia = static_cast<std::size_t>(dofs[a]);
        if (g != 0.0) sys.rhs[ia] += p.jw * g * p.phi[a];
        for (int b = 0; b < 2; ++b) {
          if (dofs[b] < 0) continue;
          sys.matrix.add(ia, static_cast<std::size_t>(dofs[b]),
                         p.jw * (K * p.dphi[a] * p.dphi[b] - W * p.phi[a] * p.phi[b]));
        }
      }
    });
  }

  const double surface = kFourPi * r2 * r2;
  const auto iu = static_cast<std::size_t>(sys.u_dof.back());
  const auto iv = static_cast<std::size_t>(sys.v_dof.front());
  sys.matrix.add(iu, iv, surface);
  sys.matrix.add(iv, iu, surface);

  auto& meta = sys.meta;
  meta.formulation = Formulation::kCoupled;
  meta.constraints = {"u_r(0) = 0 eliminated", "v(R_ext) = 0 eliminated"};
  meta.n_displacement_dofs = nu;
  meta.n_exterior_scalar_dofs = nv;
  meta.n_exterior_nodes = mesh_ext.n_nodes();
  meta.exterior_vector_equivalent_dofs = 3 * mesh_ext.n_nodes();
  meta.r2 = r2;
  meta.R = R_ext;
  meta.exterior_coefficient_scale = options.exterior_coefficient_scale;
  regime_warnings(model, mesh_ext, meta);
  if (options.exterior_coefficient_scale != 1.0) {
    meta.warnings.push_back("exterior coefficient deliberately rescaled");
  }
  return sys;
}

AssembledSystem assemble_reference(const BackgroundModel& model, const Mesh1D& mesh,
                                   const RadialSource& source, double R,
                                   const AssemblyOptions& options) {
  require_radial_background(model);
  const double r2 = model.radii().r2;
  if (!close(mesh.front(), 0.0) || !close(mesh.back(), R)) {
    throw ConfigError("reference mesh must span [0, R]");
  }
  if (!(R > r2)) throw ConfigError("reference truncation radius must exceed r2");
  if (!mesh.find_node(r2)) throw ConfigError("r2 is not a mesh node");
  require_source(source, r2);
  require_domain(model, R);

  AssembledSystem sys;
  sys.model = model;
  sys.mesh_u = mesh;
  const std::size_t n = mesh.n_nodes() - 2;
  sys.matrix = BandedMatrix(n, 1, 1);
  sys.rhs.assign(n, Complex(0.0));
  sys.u_dof.assign(mesh.n_nodes(), -1);
  for (std::size_t i = 1; i + 1 < mesh.n_nodes(); ++i) {
    sys.u_dof[i] = static_cast<long>(i - 1);
    sys.dofs.push_back({FieldKind::kDisplacement, i});
  }
  const ElementQuadrature q(options.quadrature_points);
  assemble_interior_block(model, mesh, sys.u_dof, source, q, sys.matrix, sys.rhs);

  auto& meta = sys.meta;
  meta.formulation = Formulation::kReference;
  meta.constraints = {"u_r(0) = 0 eliminated", "u_r(R) = 0 eliminated"};
  meta.n_displacement_dofs = n;
  const std::size_t ext_nodes = mesh.n_nodes() - *mesh.find_node(r2);
  meta.n_exterior_nodes = ext_nodes;
  meta.exterior_vector_equivalent_dofs = 3 * ext_nodes;
  meta.r2 = r2;
  meta.R = R;
  regime_warnings(model, mesh, meta);
  return sys;
}

AssembledSystem assemble_full_gravity(const BackgroundModel& model, const Mesh1D& mesh,
                                      const RadialSource& source, double R,
                                      const AssemblyOptions& options) {
  require_radial_background(model);
  const double r1 = model.radii().r1;
  const double r2 = model.radii().r2;
  if (!close(mesh.front(), 0.0) || !close(mesh.back(), R)) {
    throw ConfigError("full-gravity mesh must span [0, R]");
  }
  if (!(R > r2)) throw ConfigError("truncation radius must exceed r2");
  if (!mesh.find_node(r2)) throw ConfigError("r2 is not a mesh node");
  require_source(source, r2);
  require_domain(model, R);

  AssembledSystem sys;
  sys.model = model;
  sys.mesh_u = mesh;
  const std::size_t nn = mesh.n_nodes();
  sys.u_dof.assign(nn, -1);
  sys.psi_dof.assign(nn, -1);
  sys.multiplier_dof = 0;
  sys.dofs.push_back({FieldKind::kMultiplier, 0});
  std::size_t next = 1;
  for (std::size_t i = 0; i < nn; ++i) {
    if (i > 0 && i + 1 < nn) {
      sys.u_dof[i] = static_cast<long>(next++);
      sys.dofs.push_back({FieldKind::kDisplacement, i});
    }
    sys.psi_dof[i] = static_cast<long>(next++);
    sys.dofs.push_back({FieldKind::kGravity, i});
  }
  const std::size_t n = next;

  // Gauge row couples every psi node whose hat function meets [0, r1].
  std::size_t last_gauge_node = 0;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    if (mesh.nodes()[e] < r1) last_gauge_node = e + 1;
  }
  const std::size_t band =
      std::max<std::size_t>(3, static_cast<std::size_t>(sys.psi_dof[last_gauge_node]));
  sys.matrix = BandedMatrix(n, band, band);
  sys.rhs.assign(n, Complex(0.0));

  const ElementQuadrature q(options.quadrature_points);
  const double inv4piG = 1.0 / (kFourPi * model.G());
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const long ud[2] = {sys.u_dof[e], sys.u_dof[e + 1]};
    const long pd[2] = {sys.psi_dof[e], sys.psi_dof[e + 1]};
    for_each_point(model, mesh, e, q, [&](const InteriorPoint& p) {
      const Complex f = source.f ? source.f(p.r) : Complex(0.0);
      for (int a = 0; a < 2; ++a) {
        const auto ipa = static_cast<std::size_t>(pd[a]);
        for (int b = 0; b < 2; ++b) {
          const auto ipb = static_cast<std::size_t>(pd[b]);
          sys.matrix.add(ipa, ipb, p.jw * inv4piG * p.dphi[a] * p.dphi[b]);
          if (ud[b] >= 0) {
            sys.matrix.add(ipa, static_cast<std::size_t>(ud[b]),
                           -p.jw * p.c.rho * p.phi[b] * p.dphi[a]);
          }
        }
        if (ud[a] < 0) continue;
        const auto iua = static_cast<std::size_t>(ud[a]);
        if (f != 0.0) sys.rhs[iua] += p.jw * p.c.rho * f * p.phi[a];
        for (int b = 0; b < 2; ++b) {
          sys.matrix.add(iua, static_cast<std::size_t>(pd[b]),
                         -p.jw * p.c.rho * p.dphi[b] * p.phi[a]);
          if (ud[b] >= 0) sys.matrix.add(iua, static_cast<std::size_t>(ud[b]), interior_entry(p, a, b));
        }
      }
    });
    // Gauge: 4 pi int_0^{r1} psi r^2 dr on the part of the element inside r1.
    const double ra = mesh.nodes()[e], rb = mesh.nodes()[e + 1];
    if (ra < r1) {
      const double top = std::min(rb, r1);
      for (std::size_t k = 0; k < q.xi.size(); ++k) {
        const double r = 0.5 * (ra + top) + 0.5 * (top - ra) * q.xi[k];
        const double jw = kFourPi * r * r * 0.5 * (top - ra) * q.w[k];
        const double phi[2] = {(rb - r) / (rb - ra), (r - ra) / (rb - ra)};
        for (int a = 0; a < 2; ++a) {
          const auto ip = static_cast<std::size_t>(pd[a]);
          sys.matrix.add(0, ip, jw * phi[a]);
          sys.matrix.add(ip, 0, jw * phi[a]);
        }
      }
    }
  }

  auto& meta = sys.meta;
  meta.formulation = Formulation::kFullGravity;
  meta.constraints = {"u_r(0) = 0 eliminated", "u_r(R) = 0 eliminated",
                      "gauge int_{B_r1} psi dx = 0 via Lagrange multiplier",
                      "psi natural (Neumann) condition at R"};
  meta.n_displacement_dofs = nn - 2;
  meta.n_gravity_dofs = nn;
  const std::size_t ext_nodes = nn - *mesh.find_node(r2);
  meta.n_exterior_nodes = ext_nodes;
  meta.exterior_vector_equivalent_dofs = 3 * ext_nodes;
  meta.r2 = r2;
  meta.R = R;
  regime_warnings(model, mesh, meta);
  return sys;
}

// Solve ------------------------------------------------------------------------------

Complex P1Function::operator()(double r) const {
  const std::size_t e = mesh->element_of(r);
  const double ra = mesh->nodes()[e], rb = mesh->nodes()[e + 1];
  const double t = (r - ra) / (rb - ra);
  return (1.0 - t) * (*values)[e] + t * (*values)[e + 1];
}

Complex P1Function::slope_on(std::size_t e) const {
  return ((*values)[e + 1] - (*values)[e]) / mesh->h(e);
}

Complex P1Function::slope(double r) const { return slope_on(mesh->element_of(r)); }

P1Function ModalSolution::v() const {
  if (!mesh_v) throw DomainError("solution carries no exterior scalar field");
  return {&*mesh_v, &v_nodes};
}

double ModalSolution::max_abs() const {
  double m = 0.0;
  for (const auto* vec : {&u_nodes, &v_nodes, &psi_nodes}) {
    for (const auto& z : *vec) m = std::max(m, std::abs(z));
  }
  return m;
}

ModalSolution solve(const AssembledSystem& system) {
  const BandedMatrix& A = system.matrix;
  const std::size_t n = A.size();
  if (system.rhs.size() != n) throw SolverError("right-hand side does not match the matrix");

  // Symmetric diagonal equilibration D A D with D_i = 1 / sqrt(max_j |A_ij|).
  std::vector<double> d(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    const std::size_t j0 = i > A.kl() ? i - A.kl() : 0;
    const std::size_t j1 = std::min(n - 1, i + A.ku());
    for (std::size_t j = j0; j <= j1; ++j) m = std::max(m, std::abs(A.at(i, j)));
    if (m == 0.0) throw SolverError("matrix has an empty row");
    d[i] = 1.0 / std::sqrt(m);
  }
  BandedMatrix S(n, A.kl(), A.ku());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i > A.kl() ? i - A.kl() : 0;
    const std::size_t j1 = std::min(n - 1, i + A.ku());
    for (std::size_t j = j0; j <= j1; ++j) S.add(i, j, d[i] * A.at(i, j) * d[j]);
  }
  const BandedLU lu(S);
  auto solve_scaled = [&](const std::vector<Complex>& rhs) {
    std::vector<Complex> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * rhs[i];
    y = lu.solve(std::move(y));
    for (std::size_t i = 0; i < n; ++i) y[i] *= d[i];
    return y;
  };
  std::vector<Complex> x = solve_scaled(system.rhs);
  // One step of iterative refinement.
  std::vector<Complex> ax = A.multiply(x);
  std::vector<Complex> res(n);
  for (std::size_t i = 0; i < n; ++i) res[i] = system.rhs[i] - ax[i];
  const std::vector<Complex> dx = solve_scaled(res);
  for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
  ax = A.multiply(x);
  for (std::size_t i = 0; i < n; ++i) res[i] = system.rhs[i] - ax[i];

  ModalSolution sol;
  sol.formulation = system.meta.formulation;
  sol.meta = system.meta;
  sol.model = system.model;
  sol.pivots = lu.pivots();
  sol.rhs_norm = vec_norm(system.rhs);
  sol.matrix_scale = A.max_abs();
  const double rn = vec_norm(res);
  sol.residual = sol.rhs_norm > 0.0 ? rn / sol.rhs_norm : rn;
  if (sol.pivots.near_singular) sol.meta.warnings.push_back("near-singular matrix (pivot ratio)");
  sol.coefficients = x;
  sol.mesh_u = system.mesh_u;
  sol.mesh_v = system.mesh_v;
  auto gather = [&x](const std::vector<long>& map) {
    std::vector<Complex> out(map.size(), Complex(0.0));
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (map[i] >= 0) out[i] = x[static_cast<std::size_t>(map[i])];
    }
    return out;
  };
  sol.u_nodes = gather(system.u_dof);
  if (system.mesh_v) sol.v_nodes = gather(system.v_dof);
  if (!system.psi_dof.empty()) sol.psi_nodes = gather(system.psi_dof);
  if (system.multiplier_dof >= 0) sol.multiplier = x[static_cast<std::size_t>(system.multiplier_dof)];
  return sol;
}

// Reconstruction and interface residuals ------------------------------------------

ReconstructedDisplacement::ReconstructedDisplacement(const BackgroundModel& model,
                                                     const Mesh1D& mesh,
                                                     std::vector<Complex> v_nodes)
    : model_(model), mesh_(mesh), v_(std::move(v_nodes)) {
  if (v_.size() != mesh_.n_nodes()) throw DomainError("nodal values do not match the mesh");
  if (!close(mesh_.front(), model_.radii().r2)) throw DomainError("exterior mesh must start at r2");
  eta_nodes_ = cumulative_eta(model_, mesh_);
}

Complex ReconstructedDisplacement::on_element(std::size_t e, double r) const {
  const double ra = mesh_.nodes()[e];
  const double eta = eta_nodes_[e] + integrate_q(model_, ra, r);
  const RadialCoefficients c = radial_coefficients(model_, r);
  if (std::abs(c.M) == 0.0) throw SolverError("m2_rr + i omega gamma vanishes at a sample point");
  const Complex slope = (v_[e + 1] - v_[e]) / mesh_.h(e);
  if (slope == 0.0) return 0.0;
  return std::exp(eta) / (c.rho * c.M) * slope;
}

Complex ReconstructedDisplacement::operator()(double r) const {
  return on_element(mesh_.element_of(r), r);
}

ReconstructedDisplacement reconstruct_u_from_v(const ModalSolution& solution) {
  if (!solution.mesh_v || !solution.model) throw DomainError("solution carries no exterior scalar field");
  return {*solution.model, *solution.mesh_v, solution.v_nodes};
}

nlohmann::json InterfaceResiduals::to_json() const {
  auto c = [](Complex z) { return nlohmann::json::array({z.real(), z.imag()}); };
  return {{"IntF1", intf1},
          {"IntF2", intf2},
          {"u_interior", c(u_interior)},
          {"u_exterior", c(u_exterior)},
          {"div_interior", c(div_interior)},
          {"div_exterior", c(div_exterior)}};
}

InterfaceResiduals interface_residuals(const ModalSolution& solution) {
  if (solution.formulation != Formulation::kCoupled) {
    throw DomainError("interface residuals need a coupled solution");
  }
  const ReconstructedDisplacement rec = reconstruct_u_from_v(solution);
  const Mesh1D& mi = solution.mesh_u;
  const Mesh1D& me = *solution.mesh_v;
  if (me.n_elements() < 2) throw DomainError("interface residuals need two exterior elements");
  const double r2 = solution.meta.r2;
  const P1Function u = solution.u_r();

  InterfaceResiduals out;
  out.u_interior = solution.u_nodes.back();
  out.u_exterior = rec.on_element(0, r2);

  // Derivative traces: element-midpoint values on one side, extrapolated linearly to r2.
  auto extrapolate = [r2](double x0, Complex y0, double x1, Complex y1) {
    return y0 + (r2 - x0) * (y1 - y0) / (x1 - x0);
  };
  const std::size_t ne = mi.n_elements();
  const double ma = 0.5 * (mi.nodes()[ne - 1] + mi.nodes()[ne]);
  Complex du_r2 = u.slope_on(ne - 1);
  if (ne >= 2) {
    const double mb = 0.5 * (mi.nodes()[ne - 2] + mi.nodes()[ne - 1]);
    du_r2 = extrapolate(ma, du_r2, mb, u.slope_on(ne - 2));
  }
  out.div_interior = du_r2 + 2.0 * out.u_interior / r2;

  const double m0 = 0.5 * (me.nodes()[0] + me.nodes()[1]);
  const double m1 = 0.5 * (me.nodes()[1] + me.nodes()[2]);
  const Complex w0 = rec.on_element(0, m0);
  const Complex w1 = rec.on_element(1, m1);
  Complex dw = (w1 - w0) / (m1 - m0);
  if (me.n_elements() >= 3) {
    const double m2 = 0.5 * (me.nodes()[2] + me.nodes()[3]);
    const Complex dw12 = (rec.on_element(2, m2) - w1) / (m2 - m1);
    dw = extrapolate(0.5 * (m0 + m1), dw, 0.5 * (m1 + m2), dw12);
  }
  const Complex w_r2 = extrapolate(m0, w0, m1, w1);
  out.div_exterior = dw + 2.0 * w_r2 / r2;

  double u_scale = 0.0;
  double div_scale = 0.0;
  for (const auto& z : solution.u_nodes) u_scale = std::max(u_scale, std::abs(z));
  for (std::size_t e = 0; e < mi.n_elements(); ++e) {
    const double mid = 0.5 * (mi.nodes()[e] + mi.nodes()[e + 1]);
    div_scale = std::max(div_scale, std::abs(u.slope_on(e) + 2.0 * u(mid) / mid));
  }
  out.intf1 = u_scale > 0.0 ? std::abs(out.u_exterior - out.u_interior) / u_scale : 0.0;
  out.intf2 = div_scale > 0.0 ? std::abs(out.div_exterior - out.div_interior) / div_scale : 0.0;
  return out;
}

// Manufactured solution -------------------------------------------------------------

namespace {
constexpr double kWaveU = 1.7;
constexpr double kImagU = 0.3;
}  // namespace

ManufacturedCoupled::ManufacturedCoupled(const BackgroundModel& model, double R_ext,
                                         Complex amplitude, Complex bubble)
    : model_(model), r2_(model.radii().r2), R_(R_ext), amp_(amplitude), bubble_(bubble) {
  require_radial_background(model_);
  if (!(R_ > r2_)) throw ConfigError("manufactured solution needs R_ext > r2");
  const double L = R_ - r2_;
  const RadialCoefficients c = radial_coefficients(model_, r2_);
  const auto uj = u_jet(r2_);
  const Complex D = uj[1] + (2.0 / r2_ + c.q) * uj[0];
  const Complex S = c.rho * c.cs * c.cs * D;
  const Complex K = 1.0 / (c.rho * c.M);  // eta(r2) = 0
  const double W = 1.0 / (c.cs * c.cs * c.rho);
  a_ = -S;
  const Complex dv = uj[0] / K;
  b_ = dv + a_ / L;
  // K' / K = 2 q - rho'/rho - M'/M; choose c so that g(r2) = 0.
  const Complex dK = K * (2.0 * c.q - c.drho / c.rho - c.dM / c.M);
  const Complex d2v_required = (-dK * dv - W * a_) / K - 2.0 * dv / r2_;
  c_ = (d2v_required + 2.0 * b_ / L) / (2.0 * L);
}

std::array<Complex, 3> ManufacturedCoupled::u_jet(double r) const {
  const double s = std::sin(kWaveU * r), c = std::cos(kWaveU * r);
  const Complex p(1.0, kImagU * r);
  const Complex dp(0.0, kImagU);
  return {amp_ * s * p, amp_ * (kWaveU * c * p + s * dp),
          amp_ * (-kWaveU * kWaveU * s * p + 2.0 * kWaveU * c * dp)};
}

std::array<Complex, 3> ManufacturedCoupled::v_jet(double r) const {
  const double L = R_ - r2_;
  const double x = r - r2_;
  const double y = R_ - r;
  // Linear part (R - r)(a + b x)/L.
  const Complex l0 = y * (a_ + b_ * x) / L;
  const Complex l1 = (-(a_ + b_ * x) + y * b_) / L;
  const Complex l2 = -2.0 * b_ / L;
  // P = x^2 y
  const double P0 = x * x * y, P1 = 2.0 * x * y - x * x, P2 = 2.0 * y - 4.0 * x;
  // E = x^3 y cos r
  const double e0 = x * x * x * y, e1 = 3.0 * x * x * y - x * x * x, e2 = 6.0 * x * y - 6.0 * x * x;
  const double cr = std::cos(r), sr = std::sin(r);
  const double E0 = e0 * cr, E1 = e1 * cr - e0 * sr, E2 = e2 * cr - 2.0 * e1 * sr - e0 * cr;
  return {l0 + c_ * P0 + bubble_ * E0, l1 + c_ * P1 + bubble_ * E1, l2 + c_ * P2 + bubble_ * E2};
}

Complex ManufacturedCoupled::u(double r) const { return u_jet(r)[0]; }
Complex ManufacturedCoupled::du(double r) const { return u_jet(r)[1]; }
Complex ManufacturedCoupled::v(double r) const { return v_jet(r)[0]; }
Complex ManufacturedCoupled::dv(double r) const { return v_jet(r)[1]; }

Complex ManufacturedCoupled::f(double r) const {
  if (r > r2_) return 0.0;
  const RadialCoefficients c = radial_coefficients(model_, r);
  const auto u = u_jet(r);
  const double cs2 = c.cs * c.cs;
  const Complex D = u[1] + (2.0 / r + c.q) * u[0];
  const Complex dD = u[2] + 2.0 * u[1] / r - 2.0 * u[0] / (r * r) + c.dq * u[0] + c.q * u[1];
  const double k = c.rho * cs2;
  const double dk = c.drho * cs2 + 2.0 * c.rho * c.cs * c.dcs;
  const Complex S = k * D;
  const Complex dS = dk * D + k * dD;
  return (-dS + c.q * S) / c.rho - c.M * u[0];
}

Complex ManufacturedCoupled::g(double r) const {
  if (r < r2_) return 0.0;
  const RadialCoefficients c = radial_coefficients(model_, r);
  const double e2 = std::exp(2.0 * eta(model_, r));
  const Complex K = e2 / (c.rho * c.M);
  const double W = e2 / (c.cs * c.cs * c.rho);
  const Complex dK = K * (2.0 * c.q - c.drho / c.rho - c.dM / c.M);
  const auto v = v_jet(r);
  return -dK * v[1] - K * (v[2] + 2.0 * v[1] / r) - W * v[0];
}

RadialSource ManufacturedCoupled::source() const {
  RadialSource s;
  s.support_max = r2_;
  const ManufacturedCoupled self = *this;
  s.f = [self](double r) { return self.f(r); };
  s.g = [self](double r) { return self.g(r); };
  return s;
}

// Studies ------------------------------------------------------------------------------

ModalSolution solve_scenario(const Scenario& s, int refinement) {
  const double r2 = s.model.radii().r2;
  const int ni = s.n_int * refinement;
  const int ne = s.n_ext * refinement;
  switch (s.formulation) {
    case Formulation::kCoupled:
      return solve(assemble_coupled(s.model, Mesh1D::uniform(0.0, r2, ni),
                                    Mesh1D::uniform(r2, s.R_ext, ne), s.source, s.R_ext, s.options));
    case Formulation::kReference:
      return solve(assemble_reference(s.model, two_region_mesh(r2, s.R_ext, ni, ne), s.source,
                                      s.R_ext, s.options));
    case Formulation::kFullGravity:
      return solve(assemble_full_gravity(s.model, two_region_mesh(r2, s.R_ext, ni, ne), s.source,
                                         s.R_ext, s.options));
  }
  throw ConfigError("unknown formulation");
}

namespace {

struct ErrorPair {
  double l2_sq = 0.0;
  double energy_sq = 0.0;
};

// Squared errors of u (rho-weighted) on mesh elements; ref(r) returns (u, u').
template <typename Ref>
ErrorPair u_errors(const BackgroundModel& model, const ModalSolution& sol, double r_hi, Ref&& ref) {
  const ElementQuadrature q(6);
  const Mesh1D& mesh = sol.mesh_u;
  const P1Function u = sol.u_r();
  NeumaierSum l2, en;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    if (mesh.nodes()[e] >= r_hi * (1.0 - 1e-14)) break;
    for_each_point(model, mesh, e, q, [&](const InteriorPoint& p) {
      const auto [ue, due] = ref(p.r, e);
      const Complex err = u(p.r) - ue;
      const Complex derr = u.slope_on(e) - due;
      const Complex Derr = derr + (2.0 / p.r + p.c.q) * err;
      l2.add(p.jw * p.c.rho * std::norm(err));
      en.add(p.jw * p.c.rho * p.c.cs * p.c.cs * std::norm(Derr));
    });
  }
  return {l2.value(), en.value()};
}

template <typename Ref>
ErrorPair v_errors(const BackgroundModel& model, const ModalSolution& sol, Ref&& ref) {
  const ElementQuadrature q(6);
  const Mesh1D& mesh = *sol.mesh_v;
  const P1Function v = sol.v();
  const std::vector<double> eta_nodes = cumulative_eta(model, mesh);
  NeumaierSum l2, en;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const double ra = mesh.nodes()[e];
    for_each_point(model, mesh, e, q, [&](const InteriorPoint& p) {
      const double eta = eta_nodes[e] + integrate_q(model, ra, p.r);
      const double wgt = std::exp(2.0 * eta) / p.c.rho;
      const auto [ve, dve] = ref(p.r, e);
      l2.add(p.jw * wgt * std::norm(v(p.r) - ve));
      en.add(p.jw * wgt * std::norm(v.slope_on(e) - dve));
    });
  }
  return {l2.value(), en.value()};
}

}  // namespace

nlohmann::json RateTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"h", r.h},
                         {"l2_error", r.l2_error},
                         {"energy_error", r.energy_error},
                         {"l2_rate", std::isfinite(r.l2_rate) ? nlohmann::json(r.l2_rate) : nlohmann::json()},
                         {"energy_rate", std::isfinite(r.energy_rate) ? nlohmann::json(r.energy_rate)
                                                                      : nlohmann::json()}});
  }
  return {{"method", method}, {"rows", rows_json}, {"monotone", monotone},
          {"machine_precision", machine_precision}, {"flags", flags}};
}

RateTable convergence_study(const Scenario& s, const std::vector<int>& refinements) {
  if (refinements.size() < 3) throw ConfigError("convergence study needs at least three meshes");
  for (std::size_t k = 1; k < refinements.size(); ++k) {
    if (refinements[k] <= refinements[k - 1]) throw ConfigError("refinements must increase");
  }
  const double r2 = s.model.radii().r2;
  RateTable table;
  std::vector<ModalSolution> sols;
  sols.reserve(refinements.size());
  for (int m : refinements) sols.push_back(solve_scenario(s, m));
  double solution_scale = 0.0;
  for (const auto& sol : sols) solution_scale = std::max(solution_scale, sol.max_abs());

  if (s.exact && s.formulation == Formulation::kCoupled) {
    table.method = "exact";
    const ManufacturedCoupled& ex = *s.exact;
    for (std::size_t k = 0; k < sols.size(); ++k) {
      const auto eu = u_errors(s.model, sols[k], r2, [&](double r, std::size_t) {
        return std::pair<Complex, Complex>{ex.u(r), ex.du(r)};
      });
      const auto ev = v_errors(s.model, sols[k], [&](double r, std::size_t) {
        return std::pair<Complex, Complex>{ex.v(r), ex.dv(r)};
      });
      RateRow row;
      row.h = std::max(sols[k].mesh_u.max_h(), sols[k].mesh_v->max_h());
      row.l2_error = std::sqrt(eu.l2_sq + ev.l2_sq);
      row.energy_error = std::sqrt(eu.energy_sq + ev.energy_sq);
      table.rows.push_back(row);
    }
  } else {
    table.method = "richardson";
    for (std::size_t k = 0; k + 1 < sols.size(); ++k) {
      const ModalSolution& fine = sols[k + 1];
      const ModalSolution& coarse = sols[k];
      const double r_hi = s.formulation == Formulation::kCoupled ? r2 : s.R_ext;
      const auto eu = u_errors(s.model, fine, r_hi, [&](double r, std::size_t) {
        const P1Function uc = coarse.u_r();
        return std::pair<Complex, Complex>{uc(r), uc.slope(r)};
      });
      ErrorPair ev;
      if (fine.mesh_v) {
        ev = v_errors(s.model, fine, [&](double r, std::size_t) {
          const P1Function vc = coarse.v();
          return std::pair<Complex, Complex>{vc(r), vc.slope(r)};
        });
      }
      RateRow row;
      row.h = coarse.mesh_u.max_h();
      if (coarse.mesh_v) row.h = std::max(row.h, coarse.mesh_v->max_h());
      row.l2_error = std::sqrt(eu.l2_sq + ev.l2_sq);
      row.energy_error = std::sqrt(eu.energy_sq + ev.energy_sq);
      table.rows.push_back(row);
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool tiny = true;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    auto& row = table.rows[k];
    if (row.l2_error > 1e-12 * std::max(1.0, solution_scale)) tiny = false;
    if (k == 0) {
      row.l2_rate = nan;
      row.energy_rate = nan;
      continue;
    }
    const auto& prev = table.rows[k - 1];
    const double lh = std::log(prev.h / row.h);
    row.l2_rate = std::log(prev.l2_error / row.l2_error) / lh;
    row.energy_rate = std::log(prev.energy_error / row.energy_error) / lh;
    if (!(row.l2_error < prev.l2_error) || !(row.energy_error < prev.energy_error)) {
      table.monotone = false;
    }
  }
  if (!table.monotone) table.flags.push_back("non-monotone errors");
  if (tiny) {
    table.machine_precision = true;
    table.flags.push_back("errors at machine precision; rates meaningless");
  }
  return table;
}

double interior_l2_norm(const ModalSolution& a, double r2) {
  const auto e = u_errors(*a.model, a, r2, [](double, std::size_t) {
    return std::pair<Complex, Complex>{0.0, 0.0};
  });
  return std::sqrt(e.l2_sq);
}

double interior_relative_difference(const ModalSolution& a, const ModalSolution& b, double r2) {
  const P1Function ub = b.u_r();
  const auto e = u_errors(*a.model, a, r2, [&](double r, std::size_t) {
    return std::pair<Complex, Complex>{ub(r), ub.slope(r)};
  });
  const double nb = interior_l2_norm(b, r2);
  const double d = std::sqrt(e.l2_sq);
  return nb > 0.0 ? d / nb : d;
}

}  // namespace galbrun
