#include "chartnet/analysis.hpp"

#include <cmath>

#include "chartnet/errors.hpp"

namespace chartnet {

double covering_log_bound(double delta, const ArchSpec& arch, double B) {
  if (!(delta > 0.0)) throw PreconditionError("covering bound needs delta > 0");
  if (arch.K < 0 || arch.L < 1 || arch.p < 1 || !(arch.kappa >= 0.0))
    throw PreconditionError("covering bound needs a valid architecture");
  if (arch.K == 0) return 0.0;  // a single function covers the empty class
  const double L = static_cast<double>(arch.L);
  const double p = static_cast<double>(arch.p);
  const double log_inner = std::log(2.0) + 2.0 * std::log(L) + std::log(p * B + 2.0) +
                           L * std::log(arch.kappa) + (L + 1.0) * std::log(p) -
                           std::log(delta);
  return static_cast<double>(arch.K) * log_inner;
}

ArchSpec theorem_arch(long long n, int s, double alpha, int d, double R,
                      const ArchConstants& consts, double B, double tau) {
  if (n < 2) throw PreconditionError("architecture sizing needs n >= 2");
  if (s < 1 || !(alpha > 0.0 && alpha <= 1.0) || d < 1)
    throw PreconditionError("smoothness must satisfy s >= 1, alpha in (0,1], d >= 1");
  const double sa = s + alpha;
  const double exponent = static_cast<double>(d) / (2.0 * sa + d);
  const double log_n = std::log(static_cast<double>(n));
  const double rate_factor = sa / (2.0 * sa + d);
  ArchSpec arch;
  arch.L = static_cast<long long>(std::ceil(consts.c_L * rate_factor * log_n));
  arch.p = static_cast<long long>(std::ceil(consts.c_p * std::pow(n, exponent)));
  arch.K = static_cast<long long>(
      std::ceil(consts.c_K * rate_factor * std::pow(n, exponent) * log_n));
  arch.R = R;
  const double tau2 = std::isfinite(tau) ? tau * tau : 1.0;
  arch.kappa =
      consts.c_kappa * std::max({1.0, B, std::sqrt(static_cast<double>(d)), tau2});
  return arch;
}

RateReport rate_balance(long long n, int s, double alpha, int d) {
  if (n < 2) throw PreconditionError("rate balancing needs n >= 2");
  if (s < 1 || !(alpha > 0.0 && alpha <= 1.0) || d < 1)
    throw PreconditionError("smoothness must satisfy s >= 1, alpha in (0,1], d >= 1");
  const double sa = s + alpha;
  RateReport report;
  report.n = n;
  report.eps_star = std::pow(static_cast<double>(n), -sa / (2.0 * sa + d));
  const double log_n = std::log(static_cast<double>(n));
  report.mse_bound_shape =
      std::pow(static_cast<double>(n), -2.0 * sa / (2.0 * sa + d)) * log_n * log_n * log_n;
  return report;
}

namespace {

FitResult least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("fit needs distinct x values");
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace

FitResult fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw PreconditionError("log-log fit needs at least 3 points");
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw PreconditionError("log-log fit needs positive inputs");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  return least_squares(lx, ly);
}

FitResult fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw PreconditionError("linear fit needs at least 2 points");
  return least_squares(xs, ys);
}

}  // namespace chartnet
