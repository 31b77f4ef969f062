#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chartnet/analysis.hpp"
#include "chartnet/assemble.hpp"
#include "chartnet/atlas.hpp"
#include "chartnet/csv.hpp"
#include "chartnet/network.hpp"
#include "chartnet/taylor.hpp"

namespace chartnet {

struct ErrorReport {
  double sup_error = 0.0;
  double l2_error = 0.0;  // empirical root mean square
  int n_samples = 0;
  double eps_requested = 0.0;
  std::uint64_t seed = 0;
};

// Max and RMS deviation |net(x) - f(x)| over n fresh samples; point i depends
// only on (seed, i), so longer runs extend shorter ones.
ErrorReport sup_error(const ReluNetwork& net, const TargetFunction& f, const Manifold& m, int n,
                      std::uint64_t seed, double eps_requested = 0.0);

struct ScalingRow {
  double eps = 0.0;
  bool failed = false;
  std::string error;
  NetworkMeta meta;
  double sup_err = 0.0;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  FitResult k_fit;      // ln K vs ln(1/eps)
  FitResult depth_fit;  // L vs ln(1/eps), plain least squares
};

// Assembles one network per eps, measures size and error, and fits the size
// scaling laws. Failed rows are recorded and skipped by the fits.
ScalingResult scaling_study(const TargetFunction& f, const Atlas& atlas,
                            const std::vector<double>& eps_list, std::uint64_t seed,
                            const AssembleOptions& options = {}, int error_samples = 10'000,
                            int workers = 0);

struct RegressRow {
  long long n = 0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double eps_star = 0.0;
  double mse_constructed = 0.0;
  double mse_refit = 0.0;
  bool ridge_warning = false;
  bool failed = false;
  std::string error;
};

// Nonparametric regression surrogate: per (n, seed) draw n noisy samples,
// build the eps*(n) approximator (bias certificate), then refit only the
// final affine layer by least squares and report both test MSEs on fresh
// noiseless points.
std::vector<RegressRow> regression_experiment(const TargetFunction& f, const Atlas& atlas,
                                              const std::vector<long long>& n_list, double sigma,
                                              int seed_count, std::uint64_t seed,
                                              const AssembleOptions& options = {},
                                              int test_samples = 10'000, int workers = 0);

Table error_report_table(const ErrorReport& report);
Table scaling_table(const ScalingResult& result);
Table regress_table(const std::vector<RegressRow>& rows);

}  // namespace chartnet
