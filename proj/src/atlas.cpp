#include "chartnet/atlas.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "chartnet/errors.hpp"
#include "chartnet/numfmt.hpp"

namespace chartnet {

namespace {

int design_sample_count(const Manifold& m) {
  switch (m.intrinsic_dim) {
    case 1: return 50'000;
    case 2: return 200'000;
    default: return 400'000;
  }
}

}  // namespace

Atlas build_atlas(const Manifold& m, double r, std::uint64_t seed, double cover_fraction,
                  double margin) {
  if (!(r > 0.0)) throw PreconditionError("chart radius must be positive");
  const double tau = m.reach();
  if (std::isfinite(tau) && !(r < tau / 2.0))
    throw PreconditionError("chart radius must satisfy r < tau/2");
  if (!(cover_fraction > 0.0 && cover_fraction < 1.0) || !(margin > 0.0 && margin < 1.0))
    throw PreconditionError("cover_fraction and margin must lie in (0,1)");

  if (m.kind == ManifoldKind::FlatCube) {
    // One canonical chart at the cube center; its coordinate map is the
    // identity up to the uniform scale, so the chart image contains the cube
    // exactly when r >= 1/2.
    if (r < 0.5)
      throw CoverageError("flat cube needs r >= 1/2 for the single chart to cover it");
    Atlas atlas;
    atlas.manifold = m;
    atlas.radius = r;
    atlas.margin = margin;
    atlas.cover_fraction = cover_fraction;
    atlas.seed = seed;
    Chart chart;
    chart.center_native = Eigen::VectorXd::Constant(m.cube_dim, 0.5);
    chart.center = embed_native(m, chart.center_native);
    chart.basis = tangent_basis(m, chart.center_native);
    chart.scale = 1.0 / (2.0 * r);
    chart.shift = Eigen::VectorXd::Constant(m.intrinsic_dim, r);
    chart.radius = r;
    atlas.charts.push_back(std::move(chart));
    return atlas;
  }

  const int n = design_sample_count(m);
  int param_dim = 2;
  if (m.kind == ManifoldKind::Circle) param_dim = 1;
  if (m.kind == ManifoldKind::FlatCube) param_dim = m.cube_dim;
  Eigen::MatrixXd natives(param_dim, n);
  Eigen::MatrixXd points(m.ambient_dim, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd nat = sample_native(m, seed, /*stream=*/17, i);
    natives.col(i) = nat;
    points.col(i) = embed_native(m, nat);
  }

  const double cover_radius = cover_fraction * r;
  const int max_charts = std::min(n, 100'000);

  // Greedy farthest-point cover: repeatedly promote the sample farthest from
  // every chosen center until all samples sit within cover_radius.
  std::vector<int> centers;
  Eigen::VectorXd min_dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::max());
  int next = 0;  // deterministic start
  for (;;) {
    centers.push_back(next);
    const Eigen::VectorXd c = points.col(next);
    int farthest = 0;
    double far_d2 = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d2 = (points.col(i) - c).squaredNorm();
      if (d2 < min_dist2[i]) min_dist2[i] = d2;
      if (min_dist2[i] > far_d2) {
        far_d2 = min_dist2[i];
        farthest = i;
      }
    }
    if (far_d2 <= cover_radius * cover_radius) break;
    if (static_cast<int>(centers.size()) >= max_charts)
      throw CoverageError("farthest-point cover did not close within the chart budget");
    next = farthest;
  }

  Atlas atlas;
  atlas.manifold = m;
  atlas.radius = r;
  atlas.margin = margin;
  atlas.cover_fraction = cover_fraction;
  atlas.seed = seed;
  atlas.charts.reserve(centers.size());
  for (int idx : centers) {
    Chart chart;
    chart.center_native = natives.col(idx);
    chart.center = points.col(idx);
    chart.basis = tangent_basis(m, chart.center_native);
    chart.scale = 1.0 / (2.0 * r);
    chart.shift = Eigen::VectorXd::Constant(m.intrinsic_dim, r);
    chart.radius = r;
    atlas.charts.push_back(std::move(chart));
  }
  return atlas;
}

Eigen::VectorXd project_chart(const Chart& chart, const Eigen::VectorXd& x) {
  return chart.scale * (chart.basis.transpose() * (x - chart.center) + chart.shift);
}

Eigen::VectorXd chart_inverse(const Manifold& m, const Chart& chart, const Eigen::VectorXd& z,
                              bool* ok) {
  if (ok) *ok = true;
  const Eigen::VectorXd w = z / chart.scale - chart.shift;  // tangent coordinates
  switch (m.kind) {
    case ManifoldKind::Circle: {
      const double R = m.radius;
      if (std::abs(w[0]) > R) {
        if (ok) *ok = false;
        return chart.center;
      }
      const double t = chart.center_native[0] + std::asin(w[0] / R);
      return embed_native(m, Eigen::VectorXd::Constant(1, t));
    }
    case ManifoldKind::Sphere2: {
      const double R = m.radius;
      const double n2 = w.squaredNorm();
      if (n2 > R * R) {
        if (ok) *ok = false;
        return chart.center;
      }
      // Orthographic lift onto the hemisphere around the chart center.
      return chart.center * std::sqrt(1.0 - n2 / (R * R)) + chart.basis * w;
    }
    case ManifoldKind::Torus: {
      // Newton iteration on the native angles for V^T (x(theta,phi) - c) = w.
      double theta = chart.center_native[0];
      double phi = chart.center_native[1];
      const Eigen::MatrixXd Vt = chart.basis.transpose();
      for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd nat(2);
        nat << theta, phi;
        const Eigen::VectorXd x = embed_native(m, nat);
        const Eigen::Vector2d res = Vt * (x - chart.center) - w;
        if (res.norm() < 1e-13) return x;
        const double ring = m.major_radius + m.minor_radius * std::cos(phi);
        Eigen::MatrixXd jac(3, 2);
        jac.col(0) = Eigen::Vector3d(-ring * std::sin(theta), ring * std::cos(theta), 0.0);
        jac.col(1) = Eigen::Vector3d(-m.minor_radius * std::sin(phi) * std::cos(theta),
                                     -m.minor_radius * std::sin(phi) * std::sin(theta),
                                     m.minor_radius * std::cos(phi));
        const Eigen::Matrix2d sys = Vt * (m.embedding * jac);
        const Eigen::Vector2d step = sys.fullPivLu().solve(res);
        if (!step.allFinite()) break;
        theta -= step[0];
        phi -= step[1];
      }
      if (ok) *ok = false;
      return chart.center;
    }
    case ManifoldKind::FlatCube:
      return chart.center + chart.basis * w;
  }
  throw PreconditionError("unknown manifold kind");
}

double bump(double t) {
  if (t >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t));
}

Eigen::VectorXd partition_weights(const Atlas& atlas, const Eigen::VectorXd& x) {
  const int cm = atlas.chart_count();
  // A single chart carries the constant partition (the flat-cube case).
  if (cm == 1) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd weights(cm);
  double total = 0.0;
  const double r2 = atlas.radius * atlas.radius;
  for (int i = 0; i < cm; ++i) {
    const double t = (x - atlas.charts[i].center).squaredNorm() / r2;
    weights[i] = bump(t);
    total += weights[i];
  }
  if (!(total > 0.0)) throw CoverageError("point not covered by any chart");
  return weights / total;
}

double chart_count_bound(const Atlas& atlas) {
  const int d = atlas.manifold.intrinsic_dim;
  const double dd = static_cast<double>(d);
  double thickness = 5.0 * dd;
  if (d >= 2) thickness += dd * std::log(dd);
  if (d >= 3) thickness += dd * std::log(std::log(dd));
  const double sa = atlas.manifold.surface_area();
  return std::ceil(sa / std::pow(atlas.radius, d) * thickness);
}

std::string atlas_to_json(const Atlas& atlas) {
  std::ostringstream out;
  out << "{\"kind\":\"" << kind_name(atlas.manifold.kind) << "\",\"r\":"
      << fmt_double(atlas.radius) << ",\"charts\":[";
  for (int i = 0; i < atlas.chart_count(); ++i) {
    const Chart& c = atlas.charts[i];
    if (i) out << ",";
    out << "{\"center\":[";
    for (int j = 0; j < c.center.size(); ++j)
      out << (j ? "," : "") << fmt_double(c.center[j]);
    out << "],\"basis\":[";
    for (int j = 0; j < c.basis.size(); ++j)
      out << (j ? "," : "") << fmt_double(c.basis.data()[j]);
    out << "],\"scale\":" << fmt_double(c.scale) << ",\"shift\":[";
    for (int j = 0; j < c.shift.size(); ++j)
      out << (j ? "," : "") << fmt_double(c.shift[j]);
    out << "]}";
  }
  out << "]}";
  return out.str();
}

std::uint64_t atlas_hash(const Atlas& atlas) {
  const std::string text = atlas_to_json(atlas);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace chartnet
