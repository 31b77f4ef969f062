#pragma once

#include <vector>

namespace chartnet {

struct ArchSpec {
  long long L = 0;
  long long p = 0;
  long long K = 0;
  double R = 0.0;
  double kappa = 0.0;
};

struct RateReport {
  long long n = 0;
  double eps_star = 0.0;         // n^{-(s+alpha)/(2(s+alpha)+d)}
  double mse_bound_shape = 0.0;  // n^{-2(s+alpha)/(2(s+alpha)+d)} ln^3 n
};

struct ArchConstants {
  double c_L = 1.0;
  double c_p = 1.0;
  double c_K = 1.0;
  double c_kappa = 1.0;
};

// K ln(2 L^2 (pB + 2) kappa^L p^{L+1} / delta), evaluated in log space.
double covering_log_bound(double delta, const ArchSpec& arch, double B);

// L = ceil(c_L (s+a)/(2(s+a)+d) ln n), p = ceil(c_p n^{d/(2(s+a)+d)}),
// K = ceil(c_K (s+a)/(2(s+a)+d) n^{d/(2(s+a)+d)} ln n),
// kappa = c_kappa max{1, B, sqrt(d), tau^2}.
ArchSpec theorem_arch(long long n, int s, double alpha, int d, double R,
                      const ArchConstants& consts = {}, double B = 1.0, double tau = 1.0);

// eps* solving eps^2 = eps^{-d/(s+alpha)} / n, plus the rate shape.
RateReport rate_balance(long long n, int s, double alpha, int d);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares on (ln x, ln y); needs >= 3 positive points.
FitResult fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys);

// Plain least squares on (x, y) (used for depth-vs-log(1/eps) checks).
FitResult fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace chartnet
