#pragma once

#include <cstdint>
#include <vector>

namespace spinbus {

/// S(x) = a + b / (1 + exp(-(x - x0)/w)).
struct SigmoidParams {
  double a = 0.0;
  double b = 0.0;
  double x0 = 0.0;
  double w = 1.0;

  double eval(double x) const;
  /// Slope at the midpoint x = x0.
  double midpoint_slope() const { return b / (4.0 * w); }
};

struct SigmoidFit {
  SigmoidParams params;
  double midpoint_slope = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
  /// Width pinned at its bound: the data never saturates (near-linear
  /// input), so the slope must not be trusted as a confident estimate.
  bool width_at_bound = false;
  int iterations = 0;

  bool trustworthy() const { return converged && !width_at_bound; }
};

/// Damped least-squares sigmoid fit with the deterministic initial guess
/// a = min(y), b = range, x0 = mid-range crossing, w = span/10.
/// Converges when the relative step drops below 1e-8; gives up (flagged,
/// best-so-far parameters returned) after 500 iterations.
SigmoidFit fit_sigmoid(const std::vector<double>& xs,
                       const std::vector<double>& ys);

struct SlopeUncertainty {
  double slope_std = 0.0;
  int n_failed_fits = 0;
  int n_resamples = 0;
};

/// Std of the midpoint slope under Gaussian jitter of the y values
/// (resampled fits, deterministic under `seed`).
SlopeUncertainty slope_uncertainty(const std::vector<double>& xs,
                                   const std::vector<double>& ys,
                                   double jitter_sigma,
                                   int n_resamples = 200,
                                   std::uint64_t seed = 0);

}  // namespace spinbus
