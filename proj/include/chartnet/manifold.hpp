#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace chartnet {

enum class ManifoldKind { Circle, Sphere2, Torus, FlatCube };

// Benchmark manifolds with known reach, embedded isometrically into R^D by an
// orthonormal-column matrix plus offset. Native parameters are kept alongside
// ambient points so tangent bases and chart inverses stay closed-form.
struct Manifold {
  ManifoldKind kind = ManifoldKind::Circle;
  int intrinsic_dim = 1;
  int ambient_dim = 2;
  double radius = 1.0;        // circle / sphere2
  double major_radius = 2.0;  // torus
  double minor_radius = 0.5;  // torus
  int cube_dim = 1;           // flat_cube
  Eigen::MatrixXd embedding;  // D x native_dim, orthonormal columns
  Eigen::VectorXd offset;     // D

  double reach() const;         // +inf sentinel for flat_cube
  double coord_bound() const;   // B of Assumption-style |x_j| <= B
  double surface_area() const;  // d-dimensional measure
  int native_dim() const;       // 2 (circle), 3 (sphere/torus), cube_dim
};

Manifold make_circle(double radius, int ambient_dim);
Manifold make_sphere2(double radius, int ambient_dim);
Manifold make_torus(double major_radius, double minor_radius, int ambient_dim);
Manifold make_flat_cube(int cube_dim, int ambient_dim);

std::string kind_name(ManifoldKind kind);
ManifoldKind kind_from_name(const std::string& name);

// Native parameter vectors: circle -> (t); sphere2 -> (z, phi) with z the
// polar height; torus -> (theta, phi); flat_cube -> the cube point itself.
Eigen::VectorXd embed_native(const Manifold& m, const Eigen::VectorXd& native);
Eigen::VectorXd sample_native(const Manifold& m, std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index);

// n i.i.d. points uniform w.r.t. the surface measure, one per column.
// Point i depends only on (seed, i), so prefixes of longer runs coincide.
Eigen::MatrixXd sample_points(const Manifold& m, int n, std::uint64_t seed,
                              std::uint64_t stream = 0);

// Orthonormal tangent basis (D x d) at the point with the given native
// parameters, and the native parameters' ambient position.
Eigen::MatrixXd tangent_basis(const Manifold& m, const Eigen::VectorXd& native);
Eigen::VectorXd surface_normal(const Manifold& m, const Eigen::VectorXd& native);

// Manifold spec file (JSON): kind, geometry parameters, ambient_dim, plus
// atlas controls (chart_radius, atlas_seed, cover_fraction, margin).
struct ManifoldSpec {
  Manifold manifold;
  double chart_radius = 0.0;
  std::uint64_t atlas_seed = 1;
  double cover_fraction = 0.5;
  double margin = 0.05;
};

ManifoldSpec load_manifold_spec(const std::string& path);
std::string manifold_spec_to_json(const ManifoldSpec& spec);

}  // namespace chartnet
