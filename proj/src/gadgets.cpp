#include "chartnet/gadgets.hpp"

#include <cmath>

#include "chartnet/errors.hpp"

namespace chartnet {

int square_grid_count(double err) {
  if (!(err > 0.0)) throw PreconditionError("square gadget error target must be positive");
  int n = 1;
  while (std::ldexp(1.0, -2 * n - 2) > err) {
    ++n;
    if (n > 48) break;  // 2^-98 is far below 64-bit resolution
  }
  return n;
}

double square_sup_error(int sawtooth_terms) {
  if (sawtooth_terms < 1) throw PreconditionError("squaring gadget needs N >= 1");
  return std::ldexp(1.0, -2 * sawtooth_terms - 2);
}

namespace parts {

void SquareChain::start(LayerAssembler& la, const Combo& input) {
  u1_ = la.row(input.terms, input.bias);
  u2_ = la.row(input.terms, input.bias - 0.5);
  acc_ = la.row(input.terms, input.bias);
}

void SquareChain::step(LayerAssembler& la, int block) {
  const double c = std::ldexp(1.0, -2 * (block - 1));
  const int u1 = la.row({{u1_, 2.0}, {u2_, -4.0}});
  const int u2 = la.row({{u1_, 2.0}, {u2_, -4.0}}, -0.5);
  const int acc = la.row({{acc_, 1.0}, {u1_, -2.0 * c}, {u2_, 4.0 * c}});
  u1_ = u1;
  u2_ = u2;
  acc_ = acc;
}

Combo SquareChain::value(int total_blocks) const {
  const double c = std::ldexp(1.0, -2 * total_blocks);
  return {{{acc_, 1.0}, {u1_, -2.0 * c}, {u2_, 4.0 * c}}, 0.0};
}

void MultChain::entry(LayerAssembler& la, const Combo& x, const Combo& y, double C) {
  const double s = 1.0 / (2.0 * C);
  auto scaled = [&](const Combo& a, const Combo& b, double sa, double sb) {
    std::vector<LayerAssembler::Term> terms;
    for (const auto& t : a.terms) terms.push_back({t.lane, sa * t.weight});
    for (const auto& t : b.terms) terms.push_back({t.lane, sb * t.weight});
    return std::make_pair(terms, sa * a.bias + sb * b.bias);
  };
  auto [tpp, bpp] = scaled(x, y, s, s);
  pp_ = la.row(tpp, bpp);
  auto [tpm, bpm] = scaled(x, y, -s, -s);
  pm_ = la.row(tpm, bpm);
  auto [tmp, bmp] = scaled(x, y, s, -s);
  mp_ = la.row(tmp, bmp);
  auto [tmm, bmm] = scaled(x, y, -s, s);
  mm_ = la.row(tmm, bmm);
}

void MultChain::step(LayerAssembler& la, int block) {
  if (block == 1) {
    u1a_ = la.row({{pp_, 1.0}, {pm_, 1.0}});
    u1b_ = la.row({{mp_, 1.0}, {mm_, 1.0}});
    u2a_ = la.row({{pp_, 1.0}, {pm_, 1.0}}, -0.5);
    u2b_ = la.row({{mp_, 1.0}, {mm_, 1.0}}, -0.5);
    acca_ = la.row({{pp_, 1.0}, {pm_, 1.0}});
    accb_ = la.row({{mp_, 1.0}, {mm_, 1.0}});
  } else {
    const double c = std::ldexp(1.0, -2 * (block - 1));
    const int n1a = la.row({{u1a_, 2.0}, {u2a_, -4.0}});
    const int n1b = la.row({{u1b_, 2.0}, {u2b_, -4.0}});
    const int n2a = la.row({{u1a_, 2.0}, {u2a_, -4.0}}, -0.5);
    const int n2b = la.row({{u1b_, 2.0}, {u2b_, -4.0}}, -0.5);
    const int naa = la.row({{acca_, 1.0}, {u1a_, -2.0 * c}, {u2a_, 4.0 * c}});
    const int nab = la.row({{accb_, 1.0}, {u1b_, -2.0 * c}, {u2b_, 4.0 * c}});
    u1a_ = n1a;
    u1b_ = n1b;
    u2a_ = n2a;
    u2b_ = n2b;
    acca_ = naa;
    accb_ = nab;
  }
}

Combo MultChain::value(int total_blocks, double C) const {
  const double c2 = C * C;
  const double c = std::ldexp(1.0, -2 * total_blocks);
  // Adjacent +/- lane pairs cancel exactly when the chains carry equal values.
  return {{{u1a_, -2.0 * c * c2},
           {u1b_, 2.0 * c * c2},
           {u2a_, 4.0 * c * c2},
           {u2b_, -4.0 * c * c2},
           {acca_, c2},
           {accb_, -c2}},
          0.0};
}

void CarryNonneg::start(LayerAssembler& la, const Combo& value) {
  lane_ = la.row(value.terms, value.bias);
}

void CarryNonneg::step(LayerAssembler& la) { lane_ = la.row({{lane_, 1.0}}); }

Combo CarryNonneg::value() const { return {{{lane_, 1.0}}, 0.0}; }

void CarryPair::start(LayerAssembler& la, const Combo& value) {
  std::vector<LayerAssembler::Term> neg;
  for (const auto& t : value.terms) neg.push_back({t.lane, -t.weight});
  p_ = la.row(value.terms, value.bias);
  q_ = la.row(neg, -value.bias);
}

void CarryPair::step(LayerAssembler& la) {
  const int p = la.row({{p_, 1.0}, {q_, -1.0}});
  const int q = la.row({{p_, -1.0}, {q_, 1.0}});
  p_ = p;
  q_ = q;
}

Combo CarryPair::value() const { return {{{p_, 1.0}, {q_, -1.0}}, 0.0}; }

}  // namespace parts

ReluNetwork build_square(int sawtooth_terms) {
  if (sawtooth_terms < 1) throw PreconditionError("squaring gadget needs N >= 1");
  LayerAssembler la(1);
  parts::SquareChain chain;
  chain.start(la, {{{0, 1.0}}, 0.0});
  la.seal(Activation::Relu);
  for (int k = 2; k <= sawtooth_terms; ++k) {
    chain.step(la, k);
    la.seal(Activation::Relu);
  }
  parts::Combo out = chain.value(sawtooth_terms);
  la.row(out.terms, out.bias);
  la.seal(Activation::Identity);
  return la.finish();
}

ReluNetwork build_mult(double C, double eps) {
  if (!(C > 0.0)) throw PreconditionError("multiplication gadget needs C > 0");
  if (!(eps > 0.0 && eps < C * C))
    throw PreconditionError("multiplication gadget needs 0 < eps < C^2");
  const int n = square_grid_count(eps / (2.0 * C * C));
  LayerAssembler la(2);
  parts::MultChain chain;
  chain.entry(la, {{{0, 1.0}}, 0.0}, {{{1, 1.0}}, 0.0}, C);
  la.seal(Activation::Relu);
  for (int k = 1; k <= n; ++k) {
    chain.step(la, k);
    la.seal(Activation::Relu);
  }
  parts::Combo out = chain.value(n, C);
  la.row(out.terms, out.bias);
  la.seal(Activation::Identity);
  return la.finish();
}

ReluNetwork build_abs() {
  LayerAssembler la(1);
  const int p = la.row({{0, 1.0}});
  const int q = la.row({{0, -1.0}});
  la.seal(Activation::Relu);
  la.row({{p, 1.0}, {q, 1.0}});
  la.seal(Activation::Identity);
  return la.finish();
}

ReluNetwork build_trapezoid() {
  LayerAssembler la(1);
  const int a = la.row({{0, 1.0}}, 2.0);
  const int b = la.row({{0, 1.0}}, 1.0);
  const int c = la.row({{0, 1.0}}, -1.0);
  const int d = la.row({{0, 1.0}}, -2.0);
  la.seal(Activation::Relu);
  la.row({{a, 1.0}, {b, -1.0}, {c, -1.0}, {d, 1.0}});
  la.seal(Activation::Identity);
  return la.finish();
}

namespace {

void validate_indicator(const IndicatorSpec& spec) {
  if (!(spec.r > 0.0)) throw PreconditionError("indicator needs r > 0");
  if (!(spec.nu > 0.0) || spec.D <= 0 || !(spec.B > 0.0))
    throw PreconditionError("indicator needs positive B, D, nu");
  const double slack = 8.0 * spec.B * spec.B * spec.D * spec.nu;
  if (!(spec.Delta > slack))
    throw PreconditionError("budget infeasible: Delta must exceed 8 B^2 D nu");
}

}  // namespace

int indicator_composition_count(const IndicatorSpec& spec) {
  validate_indicator(spec);
  const double corr = 4.0 * spec.B * spec.B * spec.D * spec.nu;
  const double theta = spec.r * spec.r - corr;
  if (!(theta > 0.0)) throw PreconditionError("budget infeasible: r^2 <= 4 B^2 D nu");
  const double one_bound = spec.r * spec.r - spec.Delta + corr;
  int k = 1;
  // Smallest k whose plateau (1 - 2^-k) theta covers the exact-one region,
  // with a relative guard band absorbing the 2^k growth of rounding noise
  // through the composed step functions.
  while ((1.0 - std::ldexp(1.0, -k)) * theta < one_bound + 1e-6 * theta) {
    ++k;
    if (k > 64) throw PreconditionError("indicator ramp too narrow to realize");
  }
  return k;
}

ReluNetwork build_step_indicator(const IndicatorSpec& spec) {
  const int k = indicator_composition_count(spec);
  const double theta = spec.r * spec.r - 4.0 * spec.B * spec.B * spec.D * spec.nu;
  LayerAssembler la(1);
  // Work on the scale t = a / theta; the step function becomes
  // g(t) = 2 ReLU(t - 1/2) - 2 ReLU(t - 1), whose saturation values 0 and 1
  // are reproduced exactly by 64-bit arithmetic.
  const double w = 1.0 / theta;
  int u1 = la.row({{0, w}}, -0.5);
  int u2 = la.row({{0, w}}, -1.0);
  la.seal(Activation::Relu);
  for (int j = 2; j <= k; ++j) {
    const int n1 = la.row({{u1, 2.0}, {u2, -2.0}}, -0.5);
    const int n2 = la.row({{u1, 2.0}, {u2, -2.0}}, -1.0);
    la.seal(Activation::Relu);
    u1 = n1;
    u2 = n2;
  }
  la.row({{u1, -2.0}, {u2, 2.0}}, 1.0);
  la.seal(Activation::Identity);
  return la.finish();
}

ReluNetwork build_sq_dist(const Eigen::VectorXd& center, double B, double nu) {
  const int D = static_cast<int>(center.size());
  if (D == 0) throw DimensionError("squared-distance gadget needs a nonempty center");
  if (!(B > 0.0) || center.cwiseAbs().maxCoeff() > B)
    throw PreconditionError("center must satisfy ||center||_inf <= B");
  if (!(nu > 0.0 && nu < 1.0)) throw PreconditionError("squared-distance gadget needs 0 < nu < 1");
  const int n = square_grid_count(nu);
  LayerAssembler la(D);
  std::vector<int> p(D), q(D);
  for (int j = 0; j < D; ++j) {
    p[j] = la.row({{j, 1.0}}, -center[j]);
    q[j] = la.row({{j, -1.0}}, center[j]);
  }
  la.seal(Activation::Relu);
  const double s = 1.0 / (2.0 * B);
  std::vector<parts::SquareChain> chains(D);
  for (int j = 0; j < D; ++j) chains[j].start(la, {{{p[j], s}, {q[j], s}}, 0.0});
  la.seal(Activation::Relu);
  for (int k = 2; k <= n; ++k) {
    for (int j = 0; j < D; ++j) chains[j].step(la, k);
    la.seal(Activation::Relu);
  }
  const double scale = 4.0 * B * B;
  std::vector<LayerAssembler::Term> out;
  for (int j = 0; j < D; ++j)
    for (const auto& t : chains[j].value(n).terms) out.push_back({t.lane, scale * t.weight});
  la.row(out);
  la.seal(Activation::Identity);
  return la.finish();
}

ReluNetwork build_clip(double R) {
  if (!(R > 0.0)) throw PreconditionError("clip gadget needs R > 0");
  LayerAssembler la(1);
  const int hi = la.row({{0, 1.0}}, R);
  const int lo = la.row({{0, 1.0}}, -R);
  la.seal(Activation::Relu);
  la.row({{hi, 1.0}, {lo, -1.0}}, -R);
  la.seal(Activation::Identity);
  return la.finish();
}

}  // namespace chartnet
