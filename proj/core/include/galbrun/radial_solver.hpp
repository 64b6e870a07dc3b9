// SPDX-License-Identifier: Apache-2.0
/// @file radial_solver.hpp
/// @brief Radial (l = 0) P1 finite elements for the coupled, reference and full-gravity problems.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "galbrun/background.hpp"
#include "galbrun/types.hpp"

namespace galbrun {

class Mesh1D {
 public:
  /// Throws ConfigError unless nodes are strictly increasing with at least one element.
  explicit Mesh1D(std::vector<double> nodes);
  static Mesh1D uniform(double a, double b, int n_elements);

  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t n_nodes() const { return nodes_.size(); }
  std::size_t n_elements() const { return nodes_.size() - 1; }
  double front() const { return nodes_.front(); }
  double back() const { return nodes_.back(); }
  double h(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }
  double max_h() const;
  double min_h() const;
  /// Index of a node within relative tolerance, if any.
  std::optional<std::size_t> find_node(double r, double rel_tol = 1e-12) const;
  /// Element holding r; a node belongs to the element on its right except the last node.
  std::size_t element_of(double r) const;

 private:
  std::vector<double> nodes_;
};

/// Complex band matrix with kl sub- and ku super-diagonals.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

  std::size_t size() const { return n_; }
  std::size_t kl() const { return kl_; }
  std::size_t ku() const { return ku_; }
  bool in_band(std::size_t i, std::size_t j) const;
  Complex at(std::size_t i, std::size_t j) const;
  /// Throws SolverError outside the band.
  void add(std::size_t i, std::size_t j, Complex v);
  std::vector<Complex> multiply(const std::vector<Complex>& x) const;
  double max_abs() const;
  Eigen::MatrixXcd to_dense() const;

 private:
  std::size_t n_ = 0, kl_ = 0, ku_ = 0;
  std::vector<Complex> data_;  // row-major, width kl + ku + 1
};

struct PivotDiagnostics {
  double min_pivot = 0.0;
  double max_pivot = 0.0;
  double ratio = 0.0;
  std::size_t min_pivot_index = 0;
  bool near_singular = false;
  nlohmann::json to_json() const;
};

/// LU factorization with partial pivoting that keeps the band structure (fill up to kl + ku).
class BandedLU {
 public:
  /// Throws SolverError on an exactly zero pivot.
  explicit BandedLU(const BandedMatrix& a, double near_singular_ratio = 1e-12);
  std::vector<Complex> solve(std::vector<Complex> b) const;
  const PivotDiagnostics& pivots() const { return pivots_; }

 private:
  std::size_t n_, kl_, ku_, width_;
  std::vector<Complex> lu_;
  std::vector<std::size_t> perm_;
  PivotDiagnostics pivots_;
};

enum class Formulation { kCoupled, kReference, kFullGravity };
std::string to_string(Formulation f);

enum class FieldKind { kDisplacement, kExteriorScalar, kGravity, kMultiplier };

struct DofInfo {
  FieldKind field;
  std::size_t node;
};

struct SystemMetadata {
  Formulation formulation = Formulation::kCoupled;
  int mode_l = 0;
  std::vector<std::string> constraints;
  std::vector<std::string> warnings;
  std::size_t n_displacement_dofs = 0;
  std::size_t n_exterior_scalar_dofs = 0;
  std::size_t n_gravity_dofs = 0;
  std::size_t n_exterior_nodes = 0;
  /// Unknowns a 3D vector field would need on the same exterior nodes.
  std::size_t exterior_vector_equivalent_dofs = 0;
  double r2 = 0.0;
  double R = 0.0;
  double exterior_coefficient_scale = 1.0;
  nlohmann::json to_json() const;
};

/// Radial source f_r (rho-weighted load) and, for manufactured problems, an exterior load g.
struct RadialSource {
  std::function<Complex(double)> f;  // empty means zero
  double support_max = 0.0;          // f vanishes for r > support_max
  std::function<Complex(double)> g;  // exterior load (unweighted), empty means zero

  static RadialSource zero() { return {}; }
  /// amplitude * bump on (a, b) with the standard C-infinity profile.
  static RadialSource bump(Complex amplitude, double a, double b);
};

struct AssemblyOptions {
  /// Multiplies the exterior stiffness coefficient; 1 is the correct operator.
  double exterior_coefficient_scale = 1.0;
  int quadrature_points = 6;
};

struct AssembledSystem {
  BandedMatrix matrix;
  std::vector<Complex> rhs;
  std::vector<DofInfo> dofs;
  Mesh1D mesh_u{std::vector<double>{0.0, 1.0}};
  std::optional<Mesh1D> mesh_v;
  std::vector<long> u_dof;    // per mesh_u node, -1 where eliminated
  std::vector<long> v_dof;    // per mesh_v node
  std::vector<long> psi_dof;  // per mesh_u node (full gravity)
  long multiplier_dof = -1;
  std::optional<std::pair<std::size_t, std::size_t>> exterior_block;  // [begin, end) dof range
  SystemMetadata meta;
  std::optional<BackgroundModel> model;
};

AssembledSystem assemble_coupled(const BackgroundModel& model, const Mesh1D& mesh_int,
                                 const Mesh1D& mesh_ext, const RadialSource& source, double R_ext,
                                 const AssemblyOptions& options = {});
AssembledSystem assemble_reference(const BackgroundModel& model, const Mesh1D& mesh,
                                   const RadialSource& source, double R,
                                   const AssemblyOptions& options = {});
AssembledSystem assemble_full_gravity(const BackgroundModel& model, const Mesh1D& mesh,
                                      const RadialSource& source, double R,
                                      const AssemblyOptions& options = {});

/// Nodal P1 function on a mesh.
struct P1Function {
  const Mesh1D* mesh = nullptr;
  const std::vector<Complex>* values = nullptr;
  Complex operator()(double r) const;
  /// Derivative on the element of r (see Mesh1D::element_of).
  Complex slope(double r) const;
  Complex slope_on(std::size_t element) const;
};

struct ModalSolution {
  Formulation formulation = Formulation::kCoupled;
  std::vector<Complex> coefficients;
  Mesh1D mesh_u{std::vector<double>{0.0, 1.0}};
  std::optional<Mesh1D> mesh_v;
  std::vector<Complex> u_nodes;
  std::vector<Complex> v_nodes;
  std::vector<Complex> psi_nodes;
  Complex multiplier = 0.0;
  double residual = 0.0;
  double rhs_norm = 0.0;
  double matrix_scale = 0.0;
  PivotDiagnostics pivots;
  SystemMetadata meta;
  std::optional<BackgroundModel> model;

  P1Function u_r() const { return {&mesh_u, &u_nodes}; }
  P1Function v() const;
  P1Function psi() const { return {&mesh_u, &psi_nodes}; }
  double max_abs() const;
};

ModalSolution solve(const AssembledSystem& system);

/// u_r(r) = e^{eta} rho^-1 (m2_rr + i w gamma)^-1 v'(r) on [r2, R_ext].
class ReconstructedDisplacement {
 public:
  ReconstructedDisplacement(const BackgroundModel& model, const Mesh1D& mesh,
                            std::vector<Complex> v_nodes);
  Complex operator()(double r) const;
  Complex on_element(std::size_t e, double r) const;
  const Mesh1D& mesh() const { return mesh_; }

 private:
  BackgroundModel model_;
  Mesh1D mesh_;
  std::vector<Complex> v_;
  std::vector<double> eta_nodes_;
};

ReconstructedDisplacement reconstruct_u_from_v(const ModalSolution& solution);

struct InterfaceResiduals {
  double intf1 = 0.0;
  double intf2 = 0.0;
  Complex u_interior = 0.0;
  Complex u_exterior = 0.0;
  Complex div_interior = 0.0;
  Complex div_exterior = 0.0;
  nlohmann::json to_json() const;
};
/// IntF1 compares u_r traces; IntF2 compares div traces, each side extrapolating its one-sided
/// element-midpoint derivatives linearly to r2. IntF1 is normalized by max |u_r|, IntF2 by the
/// largest interior element divergence.
InterfaceResiduals interface_residuals(const ModalSolution& solution);

/// Closed-form coupled solution satisfying both interface conditions; provides f and g.
/// u(r) = A sin(k r)(1 + 0.3 i r); v = linear part + c (r-r2)^2 (R-r) + e (r-r2)^3 (R-r) cos r,
/// where the linear part fixes v(r2), v'(r2) and c forces g(r2) = 0.
class ManufacturedCoupled {
 public:
  ManufacturedCoupled(const BackgroundModel& model, double R_ext, Complex amplitude = 1.0,
                      Complex bubble = Complex(0.05, 0.02));
  Complex u(double r) const;
  Complex du(double r) const;
  Complex v(double r) const;
  Complex dv(double r) const;
  Complex f(double r) const;
  Complex g(double r) const;
  RadialSource source() const;

 private:
  std::array<Complex, 3> u_jet(double r) const;
  std::array<Complex, 3> v_jet(double r) const;
  BackgroundModel model_;
  double r2_, R_;
  Complex amp_, bubble_, a_, b_, c_;
};

// Studies ----------------------------------------------------------------------

struct Scenario {
  BackgroundModel model;
  Formulation formulation = Formulation::kCoupled;
  double R_ext = 0.0;
  RadialSource source;
  int n_int = 16;
  int n_ext = 16;
  std::optional<ManufacturedCoupled> exact;
  AssemblyOptions options;
};

ModalSolution solve_scenario(const Scenario& s, int refinement);

struct RateRow {
  double h = 0.0;
  double l2_error = 0.0;
  double energy_error = 0.0;
  double l2_rate = 0.0;      // NaN on the first row
  double energy_rate = 0.0;  // NaN on the first row
};

struct RateTable {
  std::string method;  // "exact" or "richardson"
  std::vector<RateRow> rows;
  bool monotone = true;
  bool machine_precision = false;
  std::vector<std::string> flags;
  nlohmann::json to_json() const;
};

/// refinements: multipliers applied to (n_int, n_ext), e.g. {1, 2, 4, 8}.
RateTable convergence_study(const Scenario& s, const std::vector<int>& refinements);

/// rho-weighted L2 norm of u_r on [0, r2] (4 pi r^2 measure).
double interior_l2_norm(const ModalSolution& a, double r2);
/// ||u_a - u_b||_{L2_rho(0, r2)} / ||u_b||_{L2_rho(0, r2)} using the mesh of a.
double interior_relative_difference(const ModalSolution& a, const ModalSolution& b, double r2);

}  // namespace galbrun
