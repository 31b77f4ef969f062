#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chartnet/atlas.hpp"
#include "chartnet/network.hpp"
#include "chartnet/taylor.hpp"

namespace chartnet {

// Derived tolerances for a requested total error eps:
//   eta = delta = eps / (3 C_M)
//   Delta = r (1 - r/tau) eps / (3 c (pi+1) C_M)   (tau = inf drops the factor)
//   nu = Delta / (16 B^2 D)
struct ErrorBudget {
  double eps = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  double Delta = 0.0;
  double nu = 0.0;
  double c_shell = 0.0;
  int chart_count = 0;
};

ErrorBudget error_budget(double eps, const Atlas& atlas, double c_shell);

struct AssembleOptions {
  long long resource_cap = 40'000'000;  // triplet budget for the whole network
  double c_shell = 0.0;                 // 0 probes the shell constant
  double holder_scale = 0.0;            // 0 uses target's value or a pilot
  int probe_samples = 400;              // per-chart model-vs-pullback probe
  int max_refine_rounds = 3;            // holder_scale doublings on probe miss
};

// Assembled network plus the per-chart pieces kept for error audits.
struct Assembly {
  ReluNetwork net;
  ErrorBudget budget;
  double holder_scale = 0.0;
  double pair_bound = 0.0;  // C of the pairing multiplications
  int grid_n = 0;
  std::vector<TaylorModel> models;
  std::vector<ReluNetwork> taylor_branches;  // clip(taylor(phi(x))) per chart
  std::vector<ReluNetwork> chart_branches;   // indicator(sq_dist(x)) per chart
};

// Chart determination + local Taylor + pairing + final sum, per the standard
// three sub-network layout. Guarantees sup_M |net - f| <= eps when the
// supplied Holder scale and shell constant genuinely bound the target.
Assembly assemble(const TargetFunction& f, const Atlas& atlas, double eps, bool clip,
                  const AssembleOptions& options = {});

// Probed shell constant: samples the band r^2 - Delta_probe <= d_i^2 <= r^2
// and returns twice the largest observed ratio
// |f_i| r (1 - r/tau) / ((pi+1) Delta_probe).
double probe_shell_constant(const TargetFunction& f, const Atlas& atlas);

struct SizeBounds {
  double depth_bound = 0.0;
  double width_bound = 0.0;
  double nonzeros_bound = 0.0;
  double kappa_bound = 0.0;
};

struct SizeConstants {
  double c1 = 1.0;  // depth
  double c2 = 1.0;  // width
  double c3 = 1.0;  // nonzeros
  double c4 = 1.0;  // weight range
};

// L = c1 (ln 1/eps + ln D), p = c2 (eps^{-d/(s+alpha)} + D),
// K = c3 (eps^{-d/(s+alpha)} ln 1/eps + D ln 1/eps + D ln D),
// kappa = c4 max{1, B, tau^2, sqrt(d)}.
SizeBounds theoretical_size(double eps, int d, int s, double alpha, int D, double B, double tau,
                            const SizeConstants& consts);

struct SizeReport {
  NetworkMeta measured;
  SizeBounds bounds;
  bool depth_ok = false, width_ok = false, nonzeros_ok = false, kappa_ok = false;
  double depth_ratio = 0.0, width_ratio = 0.0, nonzeros_ratio = 0.0, kappa_ratio = 0.0;
};

SizeReport verify_size(const ReluNetwork& net, const SizeBounds& bounds);

// Fits the four constants so every measured quantity in the sweep is covered:
// c_i = max over nets of measured / (bound at c_i = 1).
SizeConstants calibrate_constants(const std::vector<NetworkMeta>& metas,
                                  const std::vector<double>& eps_values, int d, int s,
                                  double alpha, int D, double B, double tau);

// Build manifest: JSON with manifold spec, atlas hash, target, eps, budget,
// measured meta; written next to saved networks for reproducibility.
std::string build_manifest(const ManifoldSpec& spec, const Atlas& atlas,
                           const std::string& target_id, const Assembly& assembly);

}  // namespace chartnet
