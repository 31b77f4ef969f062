#include "chartnet/manifold.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "chartnet/errors.hpp"
#include "chartnet/numfmt.hpp"
#include "chartnet/rng.hpp"

namespace chartnet {

namespace {

Eigen::MatrixXd canonical_embedding(int ambient_dim, int native_dim) {
  if (ambient_dim < native_dim)
    throw PreconditionError("ambient dimension too small for this manifold");
  return Eigen::MatrixXd::Identity(ambient_dim, native_dim);
}

}  // namespace

int Manifold::native_dim() const {
  switch (kind) {
    case ManifoldKind::Circle: return 2;
    case ManifoldKind::Sphere2: return 3;
    case ManifoldKind::Torus: return 3;
    case ManifoldKind::FlatCube: return cube_dim;
  }
  return 0;
}

double Manifold::reach() const {
  switch (kind) {
    case ManifoldKind::Circle: return radius;
    case ManifoldKind::Sphere2: return radius;
    case ManifoldKind::Torus:
      return std::min(minor_radius, major_radius - minor_radius);
    case ManifoldKind::FlatCube: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double Manifold::coord_bound() const {
  double native = 0.0;
  switch (kind) {
    case ManifoldKind::Circle: native = radius; break;
    case ManifoldKind::Sphere2: native = radius; break;
    case ManifoldKind::Torus: native = major_radius + minor_radius; break;
    case ManifoldKind::FlatCube: native = 1.0; break;
  }
  // Orthonormal columns have row norms at most 1, so coordinates of the
  // embedded point are bounded by the native norm bound plus the offset.
  return native + (offset.size() ? offset.cwiseAbs().maxCoeff() : 0.0);
}

double Manifold::surface_area() const {
  switch (kind) {
    case ManifoldKind::Circle: return 2.0 * M_PI * radius;
    case ManifoldKind::Sphere2: return 4.0 * M_PI * radius * radius;
    case ManifoldKind::Torus: return 4.0 * M_PI * M_PI * major_radius * minor_radius;
    case ManifoldKind::FlatCube: return 1.0;
  }
  return 0.0;
}

Manifold make_circle(double radius, int ambient_dim) {
  if (!(radius > 0.0)) throw PreconditionError("circle radius must be positive");
  Manifold m;
  m.kind = ManifoldKind::Circle;
  m.intrinsic_dim = 1;
  m.ambient_dim = ambient_dim;
  m.radius = radius;
  m.embedding = canonical_embedding(ambient_dim, 2);
  m.offset = Eigen::VectorXd::Zero(ambient_dim);
  return m;
}

Manifold make_sphere2(double radius, int ambient_dim) {
  if (!(radius > 0.0)) throw PreconditionError("sphere radius must be positive");
  Manifold m;
  m.kind = ManifoldKind::Sphere2;
  m.intrinsic_dim = 2;
  m.ambient_dim = ambient_dim;
  m.radius = radius;
  m.embedding = canonical_embedding(ambient_dim, 3);
  m.offset = Eigen::VectorXd::Zero(ambient_dim);
  return m;
}

Manifold make_torus(double major_radius, double minor_radius, int ambient_dim) {
  if (!(minor_radius > 0.0) || !(major_radius > 2.0 * minor_radius))
    throw PreconditionError("torus needs 0 < r_min and R_maj > 2 r_min");
  Manifold m;
  m.kind = ManifoldKind::Torus;
  m.intrinsic_dim = 2;
  m.ambient_dim = ambient_dim;
  m.major_radius = major_radius;
  m.minor_radius = minor_radius;
  m.embedding = canonical_embedding(ambient_dim, 3);
  m.offset = Eigen::VectorXd::Zero(ambient_dim);
  return m;
}

Manifold make_flat_cube(int cube_dim, int ambient_dim) {
  if (cube_dim < 1) throw PreconditionError("flat cube needs dimension >= 1");
  Manifold m;
  m.kind = ManifoldKind::FlatCube;
  m.intrinsic_dim = cube_dim;
  m.cube_dim = cube_dim;
  m.ambient_dim = ambient_dim;
  m.embedding = canonical_embedding(ambient_dim, cube_dim);
  m.offset = Eigen::VectorXd::Zero(ambient_dim);
  return m;
}

std::string kind_name(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Sphere2: return "sphere2";
    case ManifoldKind::Torus: return "torus";
    case ManifoldKind::FlatCube: return "flat_cube";
  }
  return "?";
}

ManifoldKind kind_from_name(const std::string& name) {
  if (name == "circle") return ManifoldKind::Circle;
  if (name == "sphere2") return ManifoldKind::Sphere2;
  if (name == "torus") return ManifoldKind::Torus;
  if (name == "flat_cube") return ManifoldKind::FlatCube;
  throw PreconditionError("unknown manifold kind '" + name + "'");
}

Eigen::VectorXd embed_native(const Manifold& m, const Eigen::VectorXd& native) {
  Eigen::VectorXd p;
  switch (m.kind) {
    case ManifoldKind::Circle: {
      const double t = native[0];
      p = Eigen::Vector2d(m.radius * std::cos(t), m.radius * std::sin(t));
      break;
    }
    case ManifoldKind::Sphere2: {
      const double z = native[0];
      const double phi = native[1];
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      p = Eigen::Vector3d(m.radius * rho * std::cos(phi), m.radius * rho * std::sin(phi),
                          m.radius * z);
      break;
    }
    case ManifoldKind::Torus: {
      const double theta = native[0];
      const double phi = native[1];
      const double ring = m.major_radius + m.minor_radius * std::cos(phi);
      p = Eigen::Vector3d(ring * std::cos(theta), ring * std::sin(theta),
                          m.minor_radius * std::sin(phi));
      break;
    }
    case ManifoldKind::FlatCube: {
      p = native;
      break;
    }
  }
  return m.embedding * p + m.offset;
}

Eigen::VectorXd sample_native(const Manifold& m, std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) {
  // Each point consumes a fixed block of 64 counter slots.
  const std::uint64_t base = index * 64;
  auto u = [&](std::uint64_t k) { return rng::uniform(seed, stream, base + k); };
  switch (m.kind) {
    case ManifoldKind::Circle:
      return Eigen::VectorXd::Constant(1, 2.0 * M_PI * u(0));
    case ManifoldKind::Sphere2: {
      Eigen::VectorXd nat(2);
      nat[0] = 2.0 * u(0) - 1.0;
      nat[1] = 2.0 * M_PI * u(1);
      return nat;
    }
    case ManifoldKind::Torus: {
      Eigen::VectorXd nat(2);
      nat[0] = 2.0 * M_PI * u(0);
      // Rejection sampling for the ring-density factor. Acceptance per try is
      // at least (R - r) / (R + r), so 31 tries fail with probability below
      // 1e-12; the deterministic fallback keeps the block bounded.
      double phi = 2.0 * M_PI * u(1);
      for (std::uint64_t t = 0; t < 31; ++t) {
        phi = 2.0 * M_PI * u(1 + 2 * t);
        const double accept = (m.major_radius + m.minor_radius * std::cos(phi)) /
                              (m.major_radius + m.minor_radius);
        if (u(2 + 2 * t) <= accept) break;
      }
      nat[1] = phi;
      return nat;
    }
    case ManifoldKind::FlatCube: {
      if (m.cube_dim > 64) throw PreconditionError("flat cube dimension limited to 64");
      Eigen::VectorXd nat(m.cube_dim);
      for (int k = 0; k < m.cube_dim; ++k) nat[k] = u(static_cast<std::uint64_t>(k));
      return nat;
    }
  }
  throw PreconditionError("unknown manifold kind");
}

Eigen::MatrixXd sample_points(const Manifold& m, int n, std::uint64_t seed,
                              std::uint64_t stream) {
  if (n < 1) throw PreconditionError("sample_points needs n >= 1");
  Eigen::MatrixXd pts(m.ambient_dim, n);
  for (int i = 0; i < n; ++i)
    pts.col(i) = embed_native(m, sample_native(m, seed, stream, static_cast<std::uint64_t>(i)));
  return pts;
}

Eigen::MatrixXd tangent_basis(const Manifold& m, const Eigen::VectorXd& native) {
  Eigen::MatrixXd basis;
  switch (m.kind) {
    case ManifoldKind::Circle: {
      const double t = native[0];
      basis = Eigen::Vector2d(-std::sin(t), std::cos(t));
      break;
    }
    case ManifoldKind::Sphere2: {
      const double z = native[0];
      const double phi = native[1];
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const Eigen::Vector3d unit(rho * std::cos(phi), rho * std::sin(phi), z);
      Eigen::Vector3d helper = std::abs(unit.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                                        : Eigen::Vector3d::UnitY();
      Eigen::Vector3d v1 = (helper - helper.dot(unit) * unit).normalized();
      Eigen::Vector3d v2 = unit.cross(v1);
      basis.resize(3, 2);
      basis.col(0) = v1;
      basis.col(1) = v2;
      break;
    }
    case ManifoldKind::Torus: {
      const double theta = native[0];
      const double phi = native[1];
      basis.resize(3, 2);
      basis.col(0) = Eigen::Vector3d(-std::sin(theta), std::cos(theta), 0.0);
      basis.col(1) = Eigen::Vector3d(-std::sin(phi) * std::cos(theta),
                                     -std::sin(phi) * std::sin(theta), std::cos(phi));
      break;
    }
    case ManifoldKind::FlatCube: {
      basis = Eigen::MatrixXd::Identity(m.cube_dim, m.cube_dim);
      break;
    }
  }
  return m.embedding * basis;
}

Eigen::VectorXd surface_normal(const Manifold& m, const Eigen::VectorXd& native) {
  Eigen::VectorXd n;
  switch (m.kind) {
    case ManifoldKind::Circle: {
      const double t = native[0];
      n = Eigen::Vector2d(std::cos(t), std::sin(t));
      break;
    }
    case ManifoldKind::Sphere2: {
      const double z = native[0];
      const double phi = native[1];
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      n = Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z);
      break;
    }
    case ManifoldKind::Torus: {
      const double theta = native[0];
      const double phi = native[1];
      n = Eigen::Vector3d(std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta),
                          std::sin(phi));
      break;
    }
    case ManifoldKind::FlatCube:
      throw PreconditionError("flat cube has no distinguished normal");
  }
  return m.embedding * n;
}

ManifoldSpec load_manifold_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifold spec '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("manifold spec is not valid JSON: ") + e.what());
  }
  try {
    const ManifoldKind kind = kind_from_name(doc.at("kind").get<std::string>());
    const int ambient = doc.value("ambient_dim", 0);
    ManifoldSpec spec;
    switch (kind) {
      case ManifoldKind::Circle:
        spec.manifold = make_circle(doc.value("radius", 1.0), ambient ? ambient : 2);
        break;
      case ManifoldKind::Sphere2:
        spec.manifold = make_sphere2(doc.value("radius", 1.0), ambient ? ambient : 3);
        break;
      case ManifoldKind::Torus:
        spec.manifold = make_torus(doc.value("major_radius", 2.0), doc.value("minor_radius", 0.5),
                                   ambient ? ambient : 3);
        break;
      case ManifoldKind::FlatCube: {
        const int d = doc.value("cube_dim", 1);
        spec.manifold = make_flat_cube(d, ambient ? ambient : d);
        break;
      }
    }
    spec.chart_radius = doc.value("chart_radius", 0.0);
    if (!(spec.chart_radius > 0.0)) {
      const double tau = spec.manifold.reach();
      spec.chart_radius = std::isfinite(tau) ? 0.4 * tau : 1.0;
    }
    spec.atlas_seed = doc.value("atlas_seed", static_cast<std::uint64_t>(1));
    spec.cover_fraction = doc.value("cover_fraction", 0.5);
    spec.margin = doc.value("margin", 0.05);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed manifold spec: ") + e.what());
  }
}

std::string manifold_spec_to_json(const ManifoldSpec& spec) {
  std::ostringstream out;
  const Manifold& m = spec.manifold;
  out << "{\"kind\":\"" << kind_name(m.kind) << "\"";
  switch (m.kind) {
    case ManifoldKind::Circle:
    case ManifoldKind::Sphere2:
      out << ",\"radius\":" << fmt_double(m.radius);
      break;
    case ManifoldKind::Torus:
      out << ",\"major_radius\":" << fmt_double(m.major_radius)
          << ",\"minor_radius\":" << fmt_double(m.minor_radius);
      break;
    case ManifoldKind::FlatCube:
      out << ",\"cube_dim\":" << m.cube_dim;
      break;
  }
  out << ",\"ambient_dim\":" << m.ambient_dim << ",\"chart_radius\":"
      << fmt_double(spec.chart_radius) << ",\"atlas_seed\":" << spec.atlas_seed
      << ",\"cover_fraction\":" << fmt_double(spec.cover_fraction)
      << ",\"margin\":" << fmt_double(spec.margin) << "}";
  return out.str();
}

}  // namespace chartnet
