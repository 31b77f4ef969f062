#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "chartnet/manifold.hpp"

namespace chartnet {

// One chart: center c on the manifold, column-orthonormal tangent basis V,
// and the affine coordinate map phi(x) = scale (V^T (x - c) + shift) into
// [0, 1]^d. We use scale = 1/(2r) and shift = r 1 so the chart center lands
// at the cube center.
struct Chart {
  Eigen::VectorXd center;
  Eigen::VectorXd center_native;
  Eigen::MatrixXd basis;
  double scale = 0.0;
  Eigen::VectorXd shift;
  double radius = 0.0;
};

struct Atlas {
  Manifold manifold;
  std::vector<Chart> charts;
  double radius = 0.0;          // chart radius r < tau/2
  double margin = 0.05;         // coverage slack fraction
  double cover_fraction = 0.5;  // greedy cover runs at this fraction of r
  std::uint64_t seed = 0;

  int chart_count() const { return static_cast<int>(charts.size()); }
};

// Greedy farthest-point cover of a dense deterministic sample, with tangent
// bases from the manifold's closed-form geometry. Throws on r >= tau/2 and
// when the cover fails to close.
Atlas build_atlas(const Manifold& m, double r, std::uint64_t seed, double cover_fraction = 0.5,
                  double margin = 0.05);

// phi(x); lands in [0,1]^d whenever ||x - c|| <= r.
Eigen::VectorXd project_chart(const Chart& chart, const Eigen::VectorXd& x);

// Closed-form right inverse of project_chart on the chart's neighborhood:
// returns the manifold point with tangent coordinates phi^{-1}(z). ok is set
// false when z has no preimage near the chart (outside the parameterization's
// domain).
Eigen::VectorXd chart_inverse(const Manifold& m, const Chart& chart, const Eigen::VectorXd& z,
                              bool* ok = nullptr);

// Smooth partition of unity subordinate to the charts:
// rho_i(x) = b(||x-c_i||^2 / r^2) / sum_j b(...), b(t) = exp(1 - 1/(1-t)) on
// t < 1 and 0 beyond. Throws CoverageError when no chart covers x.
Eigen::VectorXd partition_weights(const Atlas& atlas, const Eigen::VectorXd& x);

// The raw bump b(t); exposed for oracles and derivative probes.
double bump(double t);

// Chart-count bound ceil(SA / r^d * T_d) with the covering-thickness
// surrogate T_d = d ln d + d ln ln d + 5 d (middle term clamped for d < 3).
double chart_count_bound(const Atlas& atlas);

// Canonical JSON of the atlas (charts at full float precision) and a stable
// 64-bit content hash of it, recorded in build manifests.
std::string atlas_to_json(const Atlas& atlas);
std::uint64_t atlas_hash(const Atlas& atlas);

}  // namespace chartnet
