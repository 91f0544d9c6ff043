#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "bingham/linalg.hpp"
#include "bingham/mesh.hpp"
#include "bingham/quadrature.hpp"

namespace bingham {

using Vec2 = std::array<double, 2>;
using VectorFunction = std::function<Vec2(Point)>;
using ScalarFunction = std::function<double(Point)>;

inline constexpr int kNumQuad = static_cast<int>(kTriangleRule.size());

/// Velocity gradient (row = component, column = derivative direction).
struct Grad2 {
  double xx = 0.0;  // d u_x / dx
  double xy = 0.0;  // d u_x / dy
  double yx = 0.0;  // d u_y / dx
  double yy = 0.0;  // d u_y / dy
};

/// Geometry and P2 basis data of one cell at the quadrature points.
///
/// Local node order: the three vertices, then the three edge midpoints with
/// edge k opposite vertex k.
struct ElementData {
  int cell = -1;
  double area = 0.0;
  std::array<Point, 3> grad_lambda{};
  std::array<int, 6> nodes{};
  std::array<int, 3> vertices{};
  std::array<Point, kNumQuad> x{};
  std::array<double, kNumQuad> jw{};                        // physical weights
  std::array<std::array<double, 3>, kNumQuad> lambda{};     // P1 basis values
  std::array<std::array<double, 6>, kNumQuad> phi{};        // P2 basis values
  std::array<std::array<Point, 6>, kNumQuad> dphi{};        // P2 basis gradients
};

/// P2 basis values and gradients at barycentric point `l` of a cell with
/// barycentric gradients `gl`.
void p2_basis(const std::array<double, 3>& l, const std::array<Point, 3>& gl,
              std::array<double, 6>& phi, std::array<Point, 6>& dphi);

/// Taylor-Hood pair: continuous P2 velocity, continuous P1 pressure.
///
/// Scalar P2 nodes are numbered vertices first (0..V-1) then edges (V..V+E-1).
/// Velocity dofs are blocked by component: dof = component * num_nodes + node.
/// Pressure dofs are the vertices.  Dirichlet data is imposed on the whole
/// boundary by nodal interpolation, then shifted on the dofs with nonzero data
/// (least-squares) so the discrete trace carries zero net flux.  Without this
/// an interpolated inflow/outflow pair on unevenly refined sides leaves a
/// constant-pressure residual no discrete velocity can remove.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(std::shared_ptr<const Triangulation> mesh,
                           const VectorFunction& dirichlet = {});

  [[nodiscard]] const Triangulation& mesh() const { return *mesh_; }
  [[nodiscard]] std::shared_ptr<const Triangulation> mesh_ptr() const { return mesh_; }

  [[nodiscard]] int num_nodes() const { return num_nodes_; }
  [[nodiscard]] int num_velocity_dofs() const { return 2 * num_nodes_; }
  [[nodiscard]] int num_pressure_dofs() const { return static_cast<int>(mesh_->num_vertices()); }
  [[nodiscard]] int velocity_dof(int node, int component) const {
    return component * num_nodes_ + node;
  }

  [[nodiscard]] std::array<int, 6> cell_nodes(std::size_t cell) const;
  [[nodiscard]] Point node_point(int node) const;
  [[nodiscard]] bool is_boundary_node(int node) const { return boundary_node_[node]; }

  /// Net outflow of the imposed trace; zero up to roundoff after the correction.
  [[nodiscard]] double boundary_flux() const;
  /// Flux defect of the plain interpolant before the correction.
  [[nodiscard]] double interpolation_flux() const { return interpolation_flux_; }

  /// Sorted constrained velocity dofs and their prescribed values.
  [[nodiscard]] const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }
  [[nodiscard]] const std::vector<double>& dirichlet_values() const { return dirichlet_values_; }
  [[nodiscard]] const std::vector<int>& free_dofs() const { return free_dofs_; }
  [[nodiscard]] bool is_dirichlet(int dof) const { return dirichlet_mask_[dof]; }
  /// Scalar P2 nodes not on the boundary.
  [[nodiscard]] const std::vector<int>& free_nodes() const { return free_nodes_; }

  /// Overwrite the constrained entries of U with the boundary data.
  void apply_dirichlet(Vector& u) const;
  /// Zero the constrained entries.
  void zero_dirichlet(Vector& u) const;

  [[nodiscard]] ElementData element(std::size_t cell) const;

 private:
  std::shared_ptr<const Triangulation> mesh_;
  int num_nodes_ = 0;
  std::vector<bool> boundary_node_;
  std::vector<int> dirichlet_dofs_;
  std::vector<double> dirichlet_values_;
  std::vector<int> free_dofs_;
  std::vector<int> free_nodes_;
  std::vector<bool> dirichlet_mask_;
  std::vector<double> flux_weights_;  // d(flux)/d(value), parallel to dirichlet_dofs_
  double interpolation_flux_ = 0.0;
};

struct FieldPair {
  Vector u;  // velocity coefficients
  Vector p;  // pressure coefficients, zero-mean after a saddle solve
};

/// Velocity with zero interior dofs and the boundary data on constrained dofs.
FieldPair boundary_lift(const TaylorHoodSpace& space);

Vector interpolate_velocity(const TaylorHoodSpace& space, const VectorFunction& f);
Vector interpolate_pressure(const TaylorHoodSpace& space, const ScalarFunction& f);

Vec2 evaluate_velocity(const TaylorHoodSpace& space, const Vector& u, std::size_t cell,
                       const std::array<double, 3>& bary);
double evaluate_pressure(const TaylorHoodSpace& space, const Vector& p, std::size_t cell,
                         const std::array<double, 3>& bary);

/// Velocity gradient at quadrature point q of an element.
Grad2 velocity_gradient(const ElementData& e, const Vector& u, int num_nodes, int q);
Vec2 velocity_value(const ElementData& e, const Vector& u, int num_nodes, int q);

struct RieszMatrices {
  SparseMatrix gradient;   // G: int grad u : grad v
  SparseMatrix symmetric;  // D: int Du : Dv
  SparseMatrix mass;       // M: int p q on the pressure space
};

/// Full matrices on all velocity dofs; restrict to free dofs for the norms.
RieszMatrices assemble_riesz_matrices(const TaylorHoodSpace& space);

/// P2 scalar Laplacian on all nodes (one block of G).
SparseMatrix assemble_scalar_stiffness(const TaylorHoodSpace& space);
SparseMatrix assemble_pressure_mass(const TaylorHoodSpace& space);

/// Weights w_k = int psi_k of the pressure basis; pairs with P for the mean.
Vector pressure_integrals(const TaylorHoodSpace& space);
void remove_pressure_mean(const TaylorHoodSpace& space, Vector& p);

enum class NormKind { H1Velocity, L2Pressure, L2Divergence };

/// ||grad U||_2, ||P||_2 or ||div U||_2 by quadrature.
double field_norm(const TaylorHoodSpace& space, const Vector& field, NormKind which);

/// Carry a field pair to a space built on a refinement of `from`'s mesh.
/// Exact for nested spaces; the Dirichlet dofs of the target take its data.
FieldPair prolongate(const TaylorHoodSpace& from, const TaylorHoodSpace& to, const FieldPair& f);

/// VTK legacy ASCII with velocity vectors and pressure at the mesh vertices.
void write_vtk_fields(std::ostream& os, const TaylorHoodSpace& space, const FieldPair& f,
                      std::span<const double> cell_scalars = {});

/// One coefficient per line, "index,value".
void write_coefficients_csv(std::ostream& os, const Vector& v);

}  // namespace bingham
