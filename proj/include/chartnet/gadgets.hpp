#pragma once

#include <Eigen/Core>

#include "chartnet/network.hpp"

namespace chartnet {

// Closed-form primitive networks: squaring, multiplication, absolute value,
// trapezoid, ramped step indicator, approximate squared distance, clipping.

struct SquareGadgetSpec {
  int sawtooth_terms = 1;  // N; guaranteed sup error 2^-(2N+2) on [0, 1]
};

struct IndicatorSpec {
  double r = 0.0;      // chart radius
  double Delta = 0.0;  // ramp width
  double B = 0.0;      // coordinate bound
  int D = 0;           // ambient dimension
  double nu = 0.0;     // per-coordinate squared-distance error
};

// Smallest N with 2^-(2N+2) <= err (at least 1).
int square_grid_count(double err);

// Exact sup error of the N-term squaring network on [0, 1].
double square_sup_error(int sawtooth_terms);

// Number of step-function compositions used by build_step_indicator. Chosen
// as the smallest k for which the plateau covers the required "exact one"
// region with a small guard band; see build_step_indicator.
int indicator_composition_count(const IndicatorSpec& spec);

// On [0, 1] computes the piecewise-linear interpolant of x^2 on the uniform
// 2^N grid: x - sum_k 4^-k g_k(x) with g the unit tent map. Depth N+1,
// width 3, sup error exactly 2^-(2N+2) attained at grid midpoints.
ReluNetwork build_square(int sawtooth_terms);

// 2 -> 1 network with |net(x, y) - x y| <= eps for |x|, |y| <= C, built as
// C^2 (sq(|x+y|/2C) - sq(|x-y|/2C)) with per-square error eps / (2 C^2).
// net(x, y) is exactly 0 whenever one input is exactly 0, and
// net(x, y) == net(y, x) bitwise.
ReluNetwork build_mult(double C, double eps);

// Exact |x| = ReLU(x) + ReLU(-x).
ReluNetwork build_abs();

// Exact trapezoid psi(x) = ReLU(x+2) - ReLU(x+1) - ReLU(x-1) + ReLU(x-2):
// 1 on |x| < 1, 0 on |x| > 2, linear in between.
ReluNetwork build_trapezoid();

// Ramped indicator of [0, r^2]: exactly 1 for a <= r^2 - Delta + 4 B^2 D nu,
// exactly 0 for a > r^2 - 4 B^2 D nu, linear on the ramp in between. Realized
// as 1 - g_k(a) / (r^2 - 4 B^2 D nu) with the step function
// g(t) = 2 ReLU(t - theta/2) - 2 ReLU(t - theta) composed k times, evaluated
// on the scale a / theta so that both plateaus are exact in 64-bit floats.
ReluNetwork build_step_indicator(const IndicatorSpec& spec);

// D -> 1 network approximating ||x - center||^2 as
// 4 B^2 sum_j sq(|x_j - c_j| / 2B); error at most 4 B^2 D nu on the box
// |x_j| <= B.
ReluNetwork build_sq_dist(const Eigen::VectorXd& center, double B, double nu);

// Exact clamp max(-R, min(a, R)) = ReLU(a + R) - ReLU(a - R) - R.
ReluNetwork build_clip(double R);

// Lockstep building blocks shared by the larger constructions. Each advances
// one network layer per call so several chains can occupy the same layers.
namespace parts {

struct Combo {
  std::vector<LayerAssembler::Term> terms;
  double bias = 0.0;
};

// Sawtooth squaring chain; lanes (u1, u2, acc). start() contributes the
// first block, step(k) block k for k = 2..N, value(N) the 3-lane readout.
class SquareChain {
 public:
  void start(LayerAssembler& la, const Combo& input);
  void step(LayerAssembler& la, int block);
  Combo value(int total_blocks) const;

 private:
  int u1_ = -1, u2_ = -1, acc_ = -1;
};

// Multiplication gadget advanced layer by layer: entry() emits the four
// ReLU lanes of (x+y)/2C and (x-y)/2C, step(k) advances both internal
// squaring chains (k = 1 starts them), value(N, C) reads the product.
// The two chains' lanes are interleaved so the readout cancels them pairwise;
// with one input exactly zero the lanes agree bitwise and the product is an
// exact 0.
class MultChain {
 public:
  void entry(LayerAssembler& la, const Combo& x, const Combo& y, double C);
  void step(LayerAssembler& la, int block);
  Combo value(int total_blocks, double C) const;

 private:
  int pp_ = -1, pm_ = -1, mp_ = -1, mm_ = -1;
  int u1a_ = -1, u1b_ = -1, u2a_ = -1, u2b_ = -1, acca_ = -1, accb_ = -1;
};

// Carries a known-nonnegative lane through ReLU layers unchanged.
class CarryNonneg {
 public:
  void start(LayerAssembler& la, const Combo& value);
  void step(LayerAssembler& la);
  Combo value() const;

 private:
  int lane_ = -1;
};

// Carries a signed value as the lane pair (ReLU(v), ReLU(-v)).
class CarryPair {
 public:
  void start(LayerAssembler& la, const Combo& value);
  void step(LayerAssembler& la);
  Combo value() const;

 private:
  int p_ = -1, q_ = -1;
};

}  // namespace parts

}  // namespace chartnet
