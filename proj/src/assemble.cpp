#include "chartnet/assemble.hpp"

#include <cmath>
#include <sstream>

#include "chartnet/errors.hpp"
#include "chartnet/gadgets.hpp"
#include "chartnet/numfmt.hpp"
#include "chartnet/rng.hpp"

namespace chartnet {

ErrorBudget error_budget(double eps, const Atlas& atlas, double c_shell) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0,1)");
  if (!(c_shell > 0.0)) throw PreconditionError("shell constant must be positive");
  ErrorBudget b;
  b.eps = eps;
  b.chart_count = atlas.chart_count();
  b.eta = eps / (3.0 * b.chart_count);
  b.delta = b.eta;
  const double r = atlas.radius;
  const double tau = atlas.manifold.reach();
  const double curvature = std::isfinite(tau) ? (1.0 - r / tau) : 1.0;
  // A very small shell constant (a near-zero target) would push Delta past
  // r^2 and destroy the indicator's ramp; floor the effective constant so
  // Delta stays at most r^2 / 2. A larger shell constant is always a valid
  // upper bound, so the budget formulas remain exact.
  const double c_floor = 2.0 * r * curvature * eps /
                         (3.0 * (M_PI + 1.0) * b.chart_count * r * r);
  b.c_shell = std::max(c_shell, c_floor);
  b.Delta = r * curvature * eps / (3.0 * b.c_shell * (M_PI + 1.0) * b.chart_count);
  const double B = atlas.manifold.coord_bound();
  b.nu = b.Delta / (16.0 * B * B * atlas.manifold.ambient_dim);
  return b;
}

double probe_shell_constant(const TargetFunction& f, const Atlas& atlas) {
  const double r = atlas.radius;
  const double r2 = r * r;
  const double tau = atlas.manifold.reach();
  const double curvature = std::isfinite(tau) ? (1.0 - r / tau) : 1.0;
  const double delta_probe = 0.2 * r2;
  const int n = 60'000;
  const Eigen::MatrixXd pts = sample_points(atlas.manifold, n, atlas.seed ^ 0x5eed5eedULL, 3);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = pts.col(i);
    Eigen::VectorXd rho;
    try {
      rho = partition_weights(atlas, x);
    } catch (const CoverageError&) {
      continue;
    }
    const double fx = f.evaluator(x);
    for (int c = 0; c < atlas.chart_count(); ++c) {
      const double d2 = (x - atlas.charts[c].center).squaredNorm();
      if (d2 >= r2 - delta_probe && d2 <= r2)
        worst = std::max(worst, std::abs(fx * rho[c]));
    }
  }
  const double ratio = worst * r * curvature / ((M_PI + 1.0) * delta_probe);
  return 2.0 * std::max(ratio, 1e-3);
}

namespace {

// Penultimate taylor-side piece: clip(taylor_net(phi(x))).
ReluNetwork make_taylor_branch(const Atlas& atlas, int chart_index, const TaylorModel& model,
                               double delta, double clip_at, const TaylorNetOptions& opts) {
  const Chart& chart = atlas.charts[chart_index];
  const Eigen::MatrixXd w = chart.scale * chart.basis.transpose();
  const Eigen::VectorXd b =
      chart.scale * (chart.shift - chart.basis.transpose() * chart.center);
  const ReluNetwork phi = from_affine(w, b);
  const ReluNetwork taylor = build_taylor_net(model, delta, opts);
  return compose_serial(compose_serial(phi, taylor), build_clip(clip_at));
}

ReluNetwork make_chart_branch(const Atlas& atlas, int chart_index, const ErrorBudget& budget) {
  const Manifold& m = atlas.manifold;
  const ReluNetwork dist = build_sq_dist(atlas.charts[chart_index].center, m.coord_bound(),
                                         budget.nu);
  IndicatorSpec spec;
  spec.r = atlas.radius;
  spec.Delta = budget.Delta;
  spec.B = m.coord_bound();
  spec.D = m.ambient_dim;
  spec.nu = budget.nu;
  return compose_serial(dist, build_step_indicator(spec));
}

}  // namespace

Assembly assemble(const TargetFunction& f, const Atlas& atlas, double eps, bool clip,
                  const AssembleOptions& options) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0,1)");
  if (atlas.chart_count() == 0) throw PreconditionError("atlas has no charts");
  const Manifold& m = atlas.manifold;
  const int d = m.intrinsic_dim;

  double holder_scale = options.holder_scale > 0.0
                            ? options.holder_scale
                            : (f.holder_scale > 0.0 ? f.holder_scale
                                                    : estimate_holder_scale(f, atlas));
  const double c_shell =
      options.c_shell > 0.0 ? options.c_shell : probe_shell_constant(f, atlas);
  const ErrorBudget budget = error_budget(eps, atlas, c_shell);

  // The Taylor grid and per-chart models, with an adaptive guard: if the
  // model misses the pullback by more than its delta/2 share on a probe
  // grid, the Holder scale was underestimated; double it and retry.
  int grid_n = 0;
  std::vector<TaylorModel> models;
  for (int round = 0;; ++round) {
    grid_n = grid_resolution(budget.delta, f.smoothness_s, f.alpha, d, holder_scale,
                             atlas.radius);
    const double eps_gadget_guess =
        budget.delta / (std::max(1.0, holder_scale) *
                        std::ldexp(1.0, d + f.smoothness_s + 2) * (d + f.smoothness_s));
    const long long estimate =
        atlas.chart_count() *
        estimate_taylor_net_size(grid_n, d, f.smoothness_s, eps_gadget_guess);
    if (estimate > options.resource_cap)
      throw ResourceError(
          "assembly estimate of " + std::to_string(estimate) + " nonzeros (grid N = " +
          std::to_string(grid_n) + ", " + std::to_string(atlas.chart_count()) +
          " charts) exceeds the cap of " + std::to_string(options.resource_cap));

    models.clear();
    for (int c = 0; c < atlas.chart_count(); ++c)
      models.push_back(taylor_coefficients(f, atlas, c, grid_n));

    // Probe model vs pullback.
    double worst = 0.0;
    for (int c = 0; c < atlas.chart_count(); ++c) {
      for (int i = 0; i < options.probe_samples; ++i) {
        Eigen::VectorXd z(d);
        for (int k = 0; k < d; ++k)
          z[k] = rng::uniform(atlas.seed ^ 0xab1eULL, 64 + c,
                              static_cast<std::uint64_t>(i) * d + k);
        worst = std::max(worst, std::abs(eval_taylor_model(models[c], z) -
                                         pullback_value(f, atlas, c, z)));
      }
    }
    if (worst <= 0.45 * budget.delta || round >= options.max_refine_rounds) {
      if (worst > 0.5 * budget.delta)
        throw PreconditionError(
            "taylor model misses the pullback by " + fmt_double(worst) +
            " (> delta/2); the declared smoothness appears optimistic for this target");
      break;
    }
    holder_scale *= 2.0;
  }

  const double pair_bound = std::max(f.sup_norm + budget.delta, 1.0);

  TaylorNetOptions taylor_opts;
  taylor_opts.holder_scale = holder_scale;
  taylor_opts.resource_cap = options.resource_cap;

  std::vector<ReluNetwork> taylor_branches, chart_branches, pipelines;
  long long emitted = 0;
  for (int c = 0; c < atlas.chart_count(); ++c) {
    ReluNetwork taylor_branch = make_taylor_branch(atlas, c, models[c], budget.delta,
                                                   f.sup_norm + budget.delta, taylor_opts);
    ReluNetwork chart_branch = make_chart_branch(atlas, c, budget);
    ReluNetwork paired = compose_serial(stack_parallel({taylor_branch, chart_branch}),
                                        build_mult(pair_bound, budget.eta));
    emitted += measure_meta(paired).nonzeros_K;
    if (emitted > options.resource_cap)
      throw ResourceError("assembly exceeded the resource cap while emitting chart " +
                          std::to_string(c));
    taylor_branches.push_back(std::move(taylor_branch));
    chart_branches.push_back(std::move(chart_branch));
    pipelines.push_back(std::move(paired));
  }

  ReluNetwork stacked = stack_parallel(pipelines);
  ReluNetwork summed = compose_serial(
      stacked, from_affine(Eigen::MatrixXd::Ones(1, atlas.chart_count()),
                           Eigen::VectorXd::Zero(1)));
  ReluNetwork net = clip ? compose_serial(summed, build_clip(f.sup_norm)) : summed;
  return Assembly{std::move(net),          budget,
                  holder_scale,            pair_bound,
                  grid_n,                  std::move(models),
                  std::move(taylor_branches), std::move(chart_branches)};
}

SizeBounds theoretical_size(double eps, int d, int s, double alpha, int D, double B, double tau,
                            const SizeConstants& consts) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0,1)");
  SizeBounds bounds;
  const double log_eps = std::log(1.0 / eps);
  const double log_d = std::log(static_cast<double>(D));
  const double poly = std::pow(eps, -static_cast<double>(d) / (s + alpha));
  bounds.depth_bound = consts.c1 * (log_eps + log_d);
  bounds.width_bound = consts.c2 * (poly + D);
  bounds.nonzeros_bound = consts.c3 * (poly * log_eps + D * log_eps + D * log_d);
  const double tau2 = std::isfinite(tau) ? tau * tau : 1.0;
  bounds.kappa_bound =
      consts.c4 * std::max({1.0, B, tau2, std::sqrt(static_cast<double>(d))});
  return bounds;
}

SizeReport verify_size(const ReluNetwork& net, const SizeBounds& bounds) {
  SizeReport report;
  report.measured = measure_meta(net);
  report.bounds = bounds;
  report.depth_ratio = report.measured.depth_L / bounds.depth_bound;
  report.width_ratio = report.measured.width_p / bounds.width_bound;
  report.nonzeros_ratio = static_cast<double>(report.measured.nonzeros_K) / bounds.nonzeros_bound;
  report.kappa_ratio = report.measured.weight_bound_kappa / bounds.kappa_bound;
  report.depth_ok = report.depth_ratio <= 1.0;
  report.width_ok = report.width_ratio <= 1.0;
  report.nonzeros_ok = report.nonzeros_ratio <= 1.0;
  report.kappa_ok = report.kappa_ratio <= 1.0;
  return report;
}

SizeConstants calibrate_constants(const std::vector<NetworkMeta>& metas,
                                  const std::vector<double>& eps_values, int d, int s,
                                  double alpha, int D, double B, double tau) {
  if (metas.size() != eps_values.size() || metas.empty())
    throw PreconditionError("calibration needs one meta per eps");
  SizeConstants unit;
  SizeConstants out;
  out.c1 = out.c2 = out.c3 = out.c4 = 0.0;
  for (std::size_t i = 0; i < metas.size(); ++i) {
    const SizeBounds base = theoretical_size(eps_values[i], d, s, alpha, D, B, tau, unit);
    out.c1 = std::max(out.c1, metas[i].depth_L / base.depth_bound);
    out.c2 = std::max(out.c2, metas[i].width_p / base.width_bound);
    out.c3 = std::max(out.c3, metas[i].nonzeros_K / base.nonzeros_bound);
    out.c4 = std::max(out.c4, metas[i].weight_bound_kappa / base.kappa_bound);
  }
  return out;
}

std::string build_manifest(const ManifoldSpec& spec, const Atlas& atlas,
                           const std::string& target_id, const Assembly& assembly) {
  const NetworkMeta meta = measure_meta(assembly.net);
  std::ostringstream out;
  out << "{\"manifold\":" << manifold_spec_to_json(spec) << ",\"atlas_hash\":\"";
  out << std::hex << atlas_hash(atlas) << std::dec;
  out << "\",\"target\":\"" << target_id << "\",\"eps\":" << fmt_double(assembly.budget.eps)
      << ",\"budget\":{\"eta\":" << fmt_double(assembly.budget.eta)
      << ",\"delta\":" << fmt_double(assembly.budget.delta)
      << ",\"Delta\":" << fmt_double(assembly.budget.Delta)
      << ",\"nu\":" << fmt_double(assembly.budget.nu)
      << ",\"c_shell\":" << fmt_double(assembly.budget.c_shell)
      << ",\"chart_count\":" << assembly.budget.chart_count << "}"
      << ",\"holder_scale\":" << fmt_double(assembly.holder_scale)
      << ",\"pair_bound\":" << fmt_double(assembly.pair_bound)
      << ",\"grid_n\":" << assembly.grid_n << ",\"meta\":{\"L\":" << meta.depth_L
      << ",\"p\":" << meta.width_p << ",\"K\":" << meta.nonzeros_K
      << ",\"kappa\":" << fmt_double(meta.weight_bound_kappa) << "}}";
  return out.str();
}

}  // namespace chartnet
