#include "chartnet/harness.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <thread>

#include "chartnet/analysis.hpp"
#include "chartnet/errors.hpp"
#include "chartnet/rng.hpp"

namespace chartnet {

namespace {

int pick_workers(int requested, std::size_t tasks) {
  int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  return std::min<int>(w, static_cast<int>(tasks));
}

// Runs tasks over a small pool; results are written by index so output order
// never depends on scheduling.
void run_tasks(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  const int w = pick_workers(workers, count);
  if (w == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < w; ++t)
    threads.emplace_back([&]() {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= count) return;
        task(i);
      }
    });
  for (auto& th : threads) th.join();
}

Eigen::VectorXd target_values(const TargetFunction& f, const Eigen::MatrixXd& pts) {
  Eigen::VectorXd y(pts.cols());
  for (Eigen::Index i = 0; i < pts.cols(); ++i) y[i] = f.evaluator(pts.col(i));
  return y;
}

}  // namespace

ErrorReport sup_error(const ReluNetwork& net, const TargetFunction& f, const Manifold& m, int n,
                      std::uint64_t seed, double eps_requested) {
  if (n < 100) throw PreconditionError("sup_error needs at least 100 samples");
  if (net.input_dim() != m.ambient_dim)
    throw DimensionError("network input dimension does not match the manifold");
  const Eigen::MatrixXd pts = sample_points(m, n, seed, /*stream=*/0);
  const Eigen::MatrixXd out = eval_batch(net, pts);
  const Eigen::VectorXd truth = target_values(f, pts);
  ErrorReport report;
  report.n_samples = n;
  report.eps_requested = eps_requested;
  report.seed = seed;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double err = std::abs(out(0, i) - truth[i]);
    report.sup_error = std::max(report.sup_error, err);
    sum_sq += err * err;
  }
  report.l2_error = std::sqrt(sum_sq / n);
  return report;
}

ScalingResult scaling_study(const TargetFunction& f, const Atlas& atlas,
                            const std::vector<double>& eps_list, std::uint64_t seed,
                            const AssembleOptions& options, int error_samples, int workers) {
  if (eps_list.size() < 3) throw PreconditionError("scaling study needs at least 3 eps values");
  ScalingResult result;
  result.rows.resize(eps_list.size());
  run_tasks(eps_list.size(), workers, [&](std::size_t i) {
    ScalingRow& row = result.rows[i];
    row.eps = eps_list[i];
    try {
      const Assembly assembly = assemble(f, atlas, row.eps, /*clip=*/false, options);
      row.meta = measure_meta(assembly.net);
      row.sup_err = sup_error(assembly.net, f, atlas.manifold, error_samples, seed, row.eps)
                        .sup_error;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  std::vector<double> inv_eps, ks, log_inv_eps, depths;
  for (const ScalingRow& row : result.rows) {
    if (row.failed) continue;
    inv_eps.push_back(1.0 / row.eps);
    ks.push_back(static_cast<double>(row.meta.nonzeros_K));
    log_inv_eps.push_back(std::log(1.0 / row.eps));
    depths.push_back(static_cast<double>(row.meta.depth_L));
  }
  if (inv_eps.size() >= 3) {
    result.k_fit = fit_loglog(inv_eps, ks);
    result.depth_fit = fit_linear(log_inv_eps, depths);
  }
  return result;
}

std::vector<RegressRow> regression_experiment(const TargetFunction& f, const Atlas& atlas,
                                              const std::vector<long long>& n_list, double sigma,
                                              int seed_count, std::uint64_t seed,
                                              const AssembleOptions& options, int test_samples,
                                              int workers) {
  if (!(sigma >= 0.0)) throw PreconditionError("noise level must be nonnegative");
  if (seed_count < 1) throw PreconditionError("regression needs at least one seed");
  for (long long n : n_list)
    if (n < 50) throw PreconditionError("regression needs n >= 50 per row");

  struct Task {
    long long n;
    int seed_index;
  };
  std::vector<Task> tasks;
  for (long long n : n_list)
    for (int s = 0; s < seed_count; ++s) tasks.push_back({n, s});
  std::vector<RegressRow> rows(tasks.size());

  run_tasks(tasks.size(), workers, [&](std::size_t i) {
    RegressRow& row = rows[i];
    row.n = tasks[i].n;
    row.seed = seed + tasks[i].seed_index;
    row.sigma = sigma;
    try {
      const RateReport rate =
          rate_balance(row.n, f.smoothness_s, f.alpha, atlas.manifold.intrinsic_dim);
      row.eps_star = rate.eps_star;
      if (!(row.eps_star > 0.0 && row.eps_star < 1.0))
        throw PreconditionError("eps* outside (0,1) for this n");
      const Assembly assembly = assemble(f, atlas, row.eps_star, /*clip=*/false, options);
      const ReluNetwork& net = assembly.net;
      const int cm = atlas.chart_count();

      // Training samples with Gaussian noise; test samples noiseless.
      const std::uint64_t row_stream = 1000 + 7919 * tasks[i].seed_index;
      const Eigen::MatrixXd train =
          sample_points(atlas.manifold, static_cast<int>(row.n), row.seed, row_stream);
      const Eigen::MatrixXd test = sample_points(atlas.manifold, test_samples, row.seed ^ 0xfe57,
                                                 row_stream + 1);
      Eigen::VectorXd y = target_values(f, train);
      if (sigma > 0.0)
        for (Eigen::Index k = 0; k < y.size(); ++k)
          y[k] += sigma * rng::normal(row.seed, row_stream + 2, static_cast<std::uint64_t>(k));

      // The final layer sums the per-chart products, which arrive as lane
      // pairs (p, q) with value p - q; one prefix pass serves both the
      // constructed output (unit weights) and the refit.
      auto features = [&](const Eigen::MatrixXd& pts) {
        const Eigen::MatrixXd lanes = eval_prefix(net, pts, net.depth() - 1);
        return Eigen::MatrixXd(lanes.topRows(cm) - lanes.bottomRows(cm));
      };
      const Eigen::MatrixXd train_feat = features(train);
      const Eigen::MatrixXd test_feat = features(test);
      const Eigen::VectorXd test_truth = target_values(f, test);

      const Eigen::VectorXd constructed = test_feat.colwise().sum();
      row.mse_constructed = (constructed - test_truth).squaredNorm() / test_samples;

      Eigen::MatrixXd design(row.n, cm + 1);
      design.leftCols(cm) = train_feat.transpose();
      design.col(cm).setOnes();
      Eigen::VectorXd coeffs;
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
      if (qr.rank() < cm + 1) {
        row.ridge_warning = true;
        const Eigen::MatrixXd gram = design.transpose() * design +
                                     1e-8 * Eigen::MatrixXd::Identity(cm + 1, cm + 1);
        coeffs = gram.ldlt().solve(design.transpose() * y);
      } else {
        coeffs = qr.solve(y);
      }
      const Eigen::VectorXd refit =
          test_feat.transpose() * coeffs.head(cm) + Eigen::VectorXd::Constant(test_samples, coeffs[cm]);
      row.mse_refit = (refit - test_truth).squaredNorm() / test_samples;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  return rows;
}

Table error_report_table(const ErrorReport& report) {
  Table table({"sup_error", "l2_error", "n_samples", "eps_requested", "seed"});
  table.new_row()
      .add(report.sup_error)
      .add(report.l2_error)
      .add(report.n_samples)
      .add(report.eps_requested)
      .add(static_cast<long long>(report.seed));
  return table;
}

Table scaling_table(const ScalingResult& result) {
  Table table({"eps", "inv_eps", "L", "p", "K", "kappa", "sup_error", "status"});
  for (const ScalingRow& row : result.rows) {
    auto r = table.new_row();
    r.add(row.eps).add(1.0 / row.eps);
    if (row.failed) {
      r.add(0).add(0).add(0LL).add(0.0).add(0.0).add("failed: " + row.error);
    } else {
      r.add(row.meta.depth_L)
          .add(row.meta.width_p)
          .add(row.meta.nonzeros_K)
          .add(row.meta.weight_bound_kappa)
          .add(row.sup_err)
          .add(std::string("ok"));
    }
  }
  return table;
}

Table regress_table(const std::vector<RegressRow>& rows) {
  Table table({"n", "seed", "sigma", "eps_star", "mse_constructed", "mse_refit", "ridge_warning",
               "status"});
  for (const RegressRow& row : rows) {
    auto r = table.new_row();
    r.add(row.n).add(static_cast<long long>(row.seed)).add(row.sigma).add(row.eps_star);
    if (row.failed) {
      r.add(0.0).add(0.0).add(0).add("failed: " + row.error);
    } else {
      r.add(row.mse_constructed)
          .add(row.mse_refit)
          .add(row.ridge_warning ? 1 : 0)
          .add(std::string("ok"));
    }
  }
  return table;
}

}  // namespace chartnet
