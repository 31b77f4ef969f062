#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "chartnet/atlas.hpp"
#include "chartnet/network.hpp"

namespace chartnet {

// Black-box target on the manifold with declared smoothness. The evaluator
// accepts ambient points (benchmark targets are globally defined formulas, so
// finite-difference probes slightly off the chart stay well posed).
struct TargetFunction {
  std::string id;
  std::function<double(const Eigen::VectorXd&)> evaluator;
  int smoothness_s = 1;
  double alpha = 1.0;
  double sup_norm = 1.0;     // R
  double holder_scale = 0.0;  // 0 requests a pilot estimate
};

// Per-chart grid of local Taylor coefficients of the chart pullback
// g = (f rho_i) o phi_i^{-1} on [0, 1]^d. Grid points outside the pullback's
// support carry exact zeros.
struct TaylorModel {
  int chart_index = 0;
  int grid_n = 0;  // N
  int dim = 0;     // d
  int order = 0;   // s_max
  std::vector<std::vector<int>> multi_indices;  // all |s| <= order, graded lex
  Eigen::MatrixXd coeffs;                       // n_multi x (N+1)^d

  int grid_points() const { return static_cast<int>(coeffs.cols()); }
  double coeff(int flat_grid_index, int multi_index) const {
    return coeffs(multi_index, flat_grid_index);
  }
};

std::vector<std::vector<int>> multi_indices_up_to(int dim, int order);

// Grid resolution for a Taylor error of delta/2:
// N = ceil((holder_scale (2r)^{1-alpha} 2^{d+s+2} d^{s+alpha/2} / (delta s!))
//          ^{1/(s+alpha)}), at least 1.
// Throws ResourceError (reporting the required N) when (N+1)^d exceeds
// grid_cap.
int grid_resolution(double delta, int s, double alpha, int d, double holder_scale, double r,
                    long long grid_cap = 100'000'000);

// Pilot estimate of the lambda*mu scale: twice the largest central-difference
// derivative magnitude of the chart pullbacks up to order s over a pilot
// grid, times sqrt(d), floored at 1.
double estimate_holder_scale(const TargetFunction& f, const Atlas& atlas);

// Value of the chart pullback g (zero-extended outside the chart support).
double pullback_value(const TargetFunction& f, const Atlas& atlas, int chart_index,
                      const Eigen::VectorXd& z);

// Central finite-difference Taylor coefficients a_{m,s} = D^s g(m/N) / s!.
TaylorModel taylor_coefficients(const TargetFunction& f, const Atlas& atlas, int chart_index,
                                int grid_n);

// Reference sum  sum_m zeta_m(z) P_m(z)  with the exact trapezoid partition;
// this is the oracle the compiled network is tested against.
double eval_taylor_model(const TaylorModel& model, const Eigen::VectorXd& z);

// Scalar trapezoid psi and the partition factor zeta_m(z).
double trapezoid(double x);
double zeta_weight(const TaylorModel& model, const Eigen::VectorXd& z,
                   const std::vector<int>& grid_point);

struct TaylorNetOptions {
  double holder_scale = 0.0;      // lambda*mu*sqrt(d) surrogate for the gadget
                                  // error formula; 0 uses the coefficient bound
  long long resource_cap = 40'000'000;
};

// Network implementing the model through chains of approximate
// multiplications: per product, error eps chosen as the smaller of the
// chain-telescope formula delta / (lm 2^{d+s+2} d^s (d+s)) and the certified
// bound delta / (2 * 2^d * n_multi * max|a| * (d+s)), so that
// sup |net - eval_taylor_model| <= delta / 2 on [0, 1]^d.
ReluNetwork build_taylor_net(const TaylorModel& model, double delta,
                             const TaylorNetOptions& options = {});

// Size estimate used for resource gating before any chain is emitted.
long long estimate_taylor_net_size(int grid_n, int dim, int order, double gadget_eps);

// The per-gadget error the builder will use (exposed for audits).
double taylor_gadget_eps(const TaylorModel& model, double delta, double holder_scale);

}  // namespace chartnet
