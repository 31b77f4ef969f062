#include "chartnet/taylor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "chartnet/errors.hpp"
#include "chartnet/gadgets.hpp"

namespace chartnet {

std::vector<std::vector<int>> multi_indices_up_to(int dim, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(dim, 0);
  // Graded lexicographic: all indices of total order 0, then 1, ...
  for (int total = 0; total <= order; ++total) {
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == dim - 1) {
        current[pos] = left;
        out.push_back(current);
        return;
      }
      for (int v = left; v >= 0; --v) {
        current[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, total);
  }
  return out;
}

int grid_resolution(double delta, int s, double alpha, int d, double holder_scale, double r,
                    long long grid_cap) {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("taylor delta must lie in (0,1)");
  if (s < 1 || !(alpha > 0.0 && alpha <= 1.0) || d < 1)
    throw PreconditionError("smoothness must satisfy s >= 1, alpha in (0,1], d >= 1");
  double fact = 1.0;
  for (int k = 2; k <= s; ++k) fact *= k;
  const double scale = std::max(holder_scale, 1e-12);
  const double base = scale * std::pow(2.0 * r, 1.0 - alpha) * std::ldexp(1.0, d + s + 2) *
                      std::pow(static_cast<double>(d), s + alpha / 2.0) / (delta * fact);
  const int n = std::max(1, static_cast<int>(std::ceil(std::pow(base, 1.0 / (s + alpha)))));
  const double cells = std::pow(static_cast<double>(n) + 1.0, d);
  if (cells > static_cast<double>(grid_cap))
    throw ResourceError("taylor grid needs N = " + std::to_string(n) + " giving " +
                        std::to_string(static_cast<long long>(cells)) +
                        " cells, beyond the grid cap of " + std::to_string(grid_cap));
  return n;
}

double pullback_value(const TargetFunction& f, const Atlas& atlas, int chart_index,
                      const Eigen::VectorXd& z) {
  const Chart& chart = atlas.charts[chart_index];
  bool ok = true;
  const Eigen::VectorXd x = chart_inverse(atlas.manifold, chart, z, &ok);
  if (!ok) return 0.0;
  // A single chart carries the constant partition and the target formula's
  // own smooth extension (the flat-cube case).
  if (atlas.chart_count() == 1) return f.evaluator(x);
  const double r2 = atlas.radius * atlas.radius;
  const double t_own = (x - chart.center).squaredNorm() / r2;
  if (t_own >= 1.0) return 0.0;  // outside supp(rho_i): extended by zero
  double total = 0.0;
  for (const Chart& other : atlas.charts)
    total += bump((x - other.center).squaredNorm() / r2);
  if (!(total > 0.0)) return 0.0;
  const double rho = bump(t_own) / total;
  return f.evaluator(x) * rho;
}

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

const Stencil& central_stencil(int order) {
  static const std::vector<Stencil> table = {
      {{0}, {1.0}},
      {{-1, 1}, {-0.5, 0.5}},
      {{-1, 0, 1}, {1.0, -2.0, 1.0}},
      {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
      {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
  };
  if (order < 0 || order >= static_cast<int>(table.size()))
    throw PreconditionError("finite differences support derivative orders up to 4");
  return table[order];
}

// Tensor-product central difference of g at z for the given multi-index.
double fd_derivative(const std::function<double(const Eigen::VectorXd&)>& g,
                     const Eigen::VectorXd& z, const std::vector<int>& multi) {
  const int d = static_cast<int>(multi.size());
  int total = 0;
  for (int v : multi) total += v;
  if (total == 0) return g(z);
  const double h = std::pow(1e-16, 1.0 / (total + 2));
  std::vector<int> cursor(d, 0);
  double sum = 0.0;
  for (;;) {
    double w = 1.0;
    Eigen::VectorXd p = z;
    for (int k = 0; k < d; ++k) {
      const Stencil& st = central_stencil(multi[k]);
      w *= st.weights[cursor[k]];
      p[k] += h * st.offsets[cursor[k]];
    }
    if (w != 0.0) sum += w * g(p);
    int k = 0;
    for (; k < d; ++k) {
      const Stencil& st = central_stencil(multi[k]);
      if (++cursor[k] < static_cast<int>(st.offsets.size())) break;
      cursor[k] = 0;
    }
    if (k == d) break;
  }
  return sum / std::pow(h, total);
}

}  // namespace

double estimate_holder_scale(const TargetFunction& f, const Atlas& atlas) {
  const int d = atlas.manifold.intrinsic_dim;
  const int per_dim = d == 1 ? 129 : 33;
  const auto multis = multi_indices_up_to(d, f.smoothness_s);
  double max_mag = 0.0;
  for (int chart = 0; chart < atlas.chart_count(); ++chart) {
    auto g = [&](const Eigen::VectorXd& z) { return pullback_value(f, atlas, chart, z); };
    std::vector<int> cursor(d, 0);
    Eigen::VectorXd z(d);
    for (;;) {
      for (int k = 0; k < d; ++k) z[k] = static_cast<double>(cursor[k]) / (per_dim - 1);
      for (const auto& multi : multis) {
        const double v = std::abs(fd_derivative(g, z, multi));
        if (std::isfinite(v)) max_mag = std::max(max_mag, v);
      }
      int k = 0;
      for (; k < d; ++k) {
        if (++cursor[k] < per_dim) break;
        cursor[k] = 0;
      }
      if (k == d) break;
    }
  }
  return 2.0 * std::sqrt(static_cast<double>(d)) * std::max(1.0, max_mag);
}

TaylorModel taylor_coefficients(const TargetFunction& f, const Atlas& atlas, int chart_index,
                                int grid_n) {
  if (grid_n < 1) throw PreconditionError("taylor grid needs N >= 1");
  if (chart_index < 0 || chart_index >= atlas.chart_count())
    throw PreconditionError("chart index out of range");
  const int d = atlas.manifold.intrinsic_dim;
  TaylorModel model;
  model.chart_index = chart_index;
  model.grid_n = grid_n;
  model.dim = d;
  model.order = f.smoothness_s;
  model.multi_indices = multi_indices_up_to(d, f.smoothness_s);
  const long long cells = static_cast<long long>(std::pow(grid_n + 1.0, d));
  model.coeffs.setZero(static_cast<Eigen::Index>(model.multi_indices.size()),
                       static_cast<Eigen::Index>(cells));

  std::vector<double> factorials = {1.0, 1.0, 2.0, 6.0, 24.0};
  auto g = [&](const Eigen::VectorXd& z) { return pullback_value(f, atlas, chart_index, z); };
  const Chart& chart = atlas.charts[chart_index];
  const double support_gate = atlas.radius * (1.0 + 1e-3);
  const bool single_chart = atlas.chart_count() == 1;

  std::vector<int> m(d, 0);
  Eigen::VectorXd z(d);
  for (long long flat = 0; flat < cells; ++flat) {
    for (int k = 0; k < d; ++k) z[k] = static_cast<double>(m[k]) / grid_n;
    bool ok = true;
    const Eigen::VectorXd x = chart_inverse(atlas.manifold, chart, z, &ok);
    // Exact zeros for grid points whose pullback leaves the chart support.
    if (ok && (single_chart || (x - chart.center).norm() < support_gate)) {
      for (std::size_t mi = 0; mi < model.multi_indices.size(); ++mi) {
        const auto& multi = model.multi_indices[mi];
        int total = 0;
        double fact = 1.0;
        for (int v : multi) {
          total += v;
          fact *= factorials[v];
        }
        const double deriv = fd_derivative(g, z, multi);
        if (!std::isfinite(deriv))
          throw NumericError("non-finite difference quotient at grid point " +
                             std::to_string(flat));
        model.coeffs(static_cast<Eigen::Index>(mi), static_cast<Eigen::Index>(flat)) =
            deriv / fact;
      }
    }
    int k = 0;
    for (; k < d; ++k) {
      if (++m[k] <= grid_n) break;
      m[k] = 0;
    }
  }
  return model;
}

double trapezoid(double x) {
  const double a = std::abs(x);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  return 2.0 - a;
}

double zeta_weight(const TaylorModel& model, const Eigen::VectorXd& z,
                   const std::vector<int>& grid_point) {
  double w = 1.0;
  for (int k = 0; k < model.dim; ++k) {
    const double node = static_cast<double>(grid_point[k]) / model.grid_n;
    w *= trapezoid(3.0 * model.grid_n * (z[k] - node));
  }
  return w;
}

double eval_taylor_model(const TaylorModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.dim) throw DimensionError("taylor model dimension mismatch");
  for (int k = 0; k < model.dim; ++k)
    if (z[k] < -1e-12 || z[k] > 1.0 + 1e-12)
      throw PreconditionError("taylor model evaluated outside [0,1]^d");
  const int n = model.grid_n;
  // Active nodes per axis: |z_k - m_k/N| < 2/(3N), at most two of them.
  std::vector<std::vector<int>> active(model.dim);
  for (int k = 0; k < model.dim; ++k) {
    const int lo = std::max(0, static_cast<int>(std::ceil(z[k] * n - 2.0 / 3.0)));
    const int hi = std::min(n, static_cast<int>(std::floor(z[k] * n + 2.0 / 3.0)));
    for (int m = lo; m <= hi; ++m) active[k].push_back(m);
    if (active[k].empty()) return 0.0;
  }
  std::vector<int> cursor(model.dim, 0);
  std::vector<int> m(model.dim);
  double sum = 0.0;
  for (;;) {
    // Flat grid index with m[0] varying fastest.
    long long flat = 0;
    for (int k = model.dim - 1; k >= 0; --k) {
      m[k] = active[k][cursor[k]];
      flat = flat * (n + 1) + m[k];
    }
    const double zeta = zeta_weight(model, z, m);
    if (zeta != 0.0) {
      double poly = 0.0;
      for (std::size_t mi = 0; mi < model.multi_indices.size(); ++mi) {
        const double a = model.coeffs(static_cast<Eigen::Index>(mi),
                                      static_cast<Eigen::Index>(flat));
        if (a == 0.0) continue;
        double mono = 1.0;
        for (int k = 0; k < model.dim; ++k) {
          const double diff = z[k] - static_cast<double>(m[k]) / n;
          for (int p = 0; p < model.multi_indices[mi][k]; ++p) mono *= diff;
        }
        poly += a * mono;
      }
      sum += zeta * poly;
    }
    int k = 0;
    for (; k < model.dim; ++k) {
      if (++cursor[k] < static_cast<int>(active[k].size())) break;
      cursor[k] = 0;
    }
    if (k == model.dim) break;
  }
  return sum;
}

double taylor_gadget_eps(const TaylorModel& model, double delta, double holder_scale) {
  const int d = model.dim;
  const int s = model.order;
  const double lm = std::max(1.0, holder_scale / std::sqrt(static_cast<double>(d)));
  const double paper = delta / (lm * std::ldexp(1.0, d + s + 2) *
                                std::pow(static_cast<double>(d), s) * (d + s));
  const double max_a = std::max(1.0, model.coeffs.size()
                                         ? model.coeffs.cwiseAbs().maxCoeff()
                                         : 0.0);
  const double certified =
      delta / (2.0 * std::ldexp(1.0, d) * static_cast<double>(model.multi_indices.size()) *
               max_a * (d + s));
  return std::min(paper, certified);
}

long long estimate_taylor_net_size(int grid_n, int dim, int order, double gadget_eps) {
  const int n_sq = square_grid_count(gadget_eps / 2.0);
  const double chains = std::pow(grid_n + 1.0, dim) *
                        static_cast<double>(multi_indices_up_to(dim, order).size());
  const int t_max = dim + order;
  const int stages = t_max - 1;
  const double per_chain = 12.0 * t_max + std::max(0, stages) * (44.0 + 16.0 * n_sq) +
                           2.0 * t_max * (n_sq + 2.0);
  const double total = chains * per_chain;
  const double cap = 4e18;
  return static_cast<long long>(std::min(total, cap));
}

namespace {

// One (m, s) chain of the Taylor network, advanced one layer at a time.
// Factors are [psi_1..psi_d, monomial copies]; the chain realizes the
// left-to-right nest x1 X (x2 X (... X x_T)) computed innermost first, with
// the running product clipped to [-1, 1] between gadgets.
class ChainState {
 public:
  ChainState(std::vector<int> m, std::vector<int> s, double a, int grid_n, int n_sq)
      : m_(std::move(m)), s_(std::move(s)), a_(a), grid_n_(grid_n), n_sq_(n_sq) {
    dim_ = static_cast<int>(m_.size());
    for (int k = 0; k < dim_; ++k) t_total_ += s_[k];
    t_total_ += dim_;
    stages_ = t_total_ - 1;
  }

  double coefficient() const { return a_; }
  int stages() const { return stages_; }

  // Layer 1: raw factor rows.
  void layer_raw(LayerAssembler& la) {
    psi_raw_.resize(dim_);
    for (int k = 0; k < dim_; ++k) {
      const double w = 3.0 * grid_n_;
      const double b = -3.0 * m_[k];
      psi_raw_[k] = {la.row({{k, w}}, b + 2.0), la.row({{k, w}}, b + 1.0),
                     la.row({{k, w}}, b - 1.0), la.row({{k, w}}, b - 2.0)};
    }
    for (int k = 0; k < dim_; ++k) {
      const double node = static_cast<double>(m_[k]) / grid_n_;
      for (int rep = 0; rep < s_[k]; ++rep) {
        parts::CarryPair pair;
        pair.start(la, {{{k, 1.0}}, -node});
        mon_.push_back(pair);
      }
    }
  }

  // Layer 2: psi value lanes; monomial pairs carried.
  void layer_values(LayerAssembler& la) {
    psi_.resize(dim_);
    for (int k = 0; k < dim_; ++k) {
      parts::Combo c{{{psi_raw_[k][0], 1.0},
                      {psi_raw_[k][1], -1.0},
                      {psi_raw_[k][2], -1.0},
                      {psi_raw_[k][3], 1.0}},
                     0.0};
      psi_[k].start(la, c);
    }
    for (auto& pair : mon_) pair.step(la);
    consumed_.assign(t_total_, false);
  }

  // Layers 3..: multiplication schedule at 1-based position pos.
  void layer_multiply(LayerAssembler& la, int pos) {
    if (t_total_ == 1) {
      psi_[0].step(la);
      return;
    }
    const int span = n_sq_ + 2;
    if (pos > stages_ * span) {
      tail_.step(la);
      return;
    }
    const int stage = (pos - 1) / span + 1;  // 1-based
    const int local = (pos - 1) % span;      // 0 = entry, 1..n_sq = blocks, n_sq+1 = seam
    if (local == 0) {
      const int xi = t_total_ - 1 - stage;
      parts::Combo x = factor_combo(xi);
      parts::Combo y = stage == 1 ? factor_combo(t_total_ - 1) : clip_combo();
      consumed_[xi] = true;
      if (stage == 1) consumed_[t_total_ - 1] = true;
      mult_ = parts::MultChain();
      mult_.entry(la, x, y, 1.0);
    } else if (local <= n_sq_) {
      mult_.step(la, local);
    } else {
      parts::Combo v = mult_.value(n_sq_, 1.0);
      if (stage < stages_) {
        clip_plus_ = la.row(v.terms, v.bias + 1.0);
        clip_minus_ = la.row(v.terms, v.bias - 1.0);
      } else {
        tail_.start(la, v);
      }
    }
    carry_pending_factors(la);
  }

  parts::Combo output() const {
    if (t_total_ == 1) return psi_[0].value();
    return tail_.value();
  }

 private:
  parts::Combo factor_combo(int index) const {
    if (index < dim_) return psi_[index].value();
    return mon_[index - dim_].value();
  }

  parts::Combo clip_combo() const {
    return {{{clip_plus_, 1.0}, {clip_minus_, -1.0}}, -1.0};
  }

  void carry_pending_factors(LayerAssembler& la) {
    for (int i = 0; i < t_total_; ++i) {
      if (consumed_[i]) continue;
      if (i < dim_)
        psi_[i].step(la);
      else
        mon_[i - dim_].step(la);
    }
  }

  std::vector<int> m_;
  std::vector<int> s_;
  double a_ = 0.0;
  int grid_n_ = 0;
  int n_sq_ = 0;
  int dim_ = 0;
  int t_total_ = 0;
  int stages_ = 0;
  std::vector<std::array<int, 4>> psi_raw_;
  std::vector<parts::CarryNonneg> psi_;
  std::vector<parts::CarryPair> mon_;
  std::vector<bool> consumed_;
  parts::MultChain mult_;
  int clip_plus_ = -1, clip_minus_ = -1;
  parts::CarryPair tail_;
};

}  // namespace

ReluNetwork build_taylor_net(const TaylorModel& model, double delta,
                             const TaylorNetOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("taylor delta must lie in (0,1)");
  const int d = model.dim;
  const double eps = taylor_gadget_eps(model, delta, options.holder_scale);
  const int n_sq = square_grid_count(eps / 2.0);

  const long long estimate = estimate_taylor_net_size(model.grid_n, d, model.order, eps);
  if (estimate > options.resource_cap)
    throw ResourceError("taylor network estimate of " + std::to_string(estimate) +
                        " nonzeros exceeds the cap of " + std::to_string(options.resource_cap));

  // Collect chains with nonzero coefficients.
  std::vector<ChainState> chains;
  std::vector<int> m(d, 0);
  for (long long flat = 0; flat < model.grid_points(); ++flat) {
    for (std::size_t mi = 0; mi < model.multi_indices.size(); ++mi) {
      const double a = model.coeffs(static_cast<Eigen::Index>(mi),
                                    static_cast<Eigen::Index>(flat));
      if (a != 0.0)
        chains.emplace_back(m, model.multi_indices[mi], a, model.grid_n, n_sq);
    }
    int k = 0;
    for (; k < d; ++k) {
      if (++m[k] <= model.grid_n) break;
      m[k] = 0;
    }
  }

  if (chains.empty()) {
    // Identically zero model compiles to the zero affine map.
    return from_affine(Eigen::MatrixXd::Zero(1, d), Eigen::VectorXd::Zero(1));
  }

  int max_stages = 0;
  for (const ChainState& c : chains) max_stages = std::max(max_stages, c.stages());
  const int hidden = 2 + max_stages * (n_sq + 2);

  LayerAssembler la(d);
  for (auto& c : chains) c.layer_raw(la);
  la.seal(Activation::Relu);
  for (auto& c : chains) c.layer_values(la);
  la.seal(Activation::Relu);
  for (int layer = 3; layer <= hidden; ++layer) {
    const int pos = layer - 2;
    for (auto& c : chains) c.layer_multiply(la, pos);
    la.seal(Activation::Relu);
  }
  std::vector<LayerAssembler::Term> out;
  for (const ChainState& c : chains)
    for (const auto& t : c.output().terms) out.push_back({t.lane, c.coefficient() * t.weight});
  la.row(out);
  la.seal(Activation::Identity);
  return la.finish();
}

}  // namespace chartnet
