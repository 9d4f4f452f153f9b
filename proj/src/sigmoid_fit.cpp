#include "spinbus/sigmoid_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "spinbus/error.hpp"

namespace spinbus {

double SigmoidParams::eval(double x) const {
  return a + b / (1.0 + std::exp(-(x - x0) / w));
}

namespace {

double rms(const std::vector<double>& xs, const std::vector<double>& ys,
           const SigmoidParams& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = p.eval(xs[i]) - ys[i];
    acc += r * r;
  }
  return std::sqrt(acc / xs.size());
}

SigmoidParams initial_guess(const std::vector<double>& xs,
                            const std::vector<double>& ys, double span) {
  SigmoidParams p;
  const auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
  p.a = *ymin_it;
  p.b = *ymax_it - *ymin_it;
  p.w = span / 10.0;

  // x0: where the data first crosses the mid-range level, linearly
  // interpolated; falls back to the span centre for flat data.
  const double mid = p.a + 0.5 * p.b;
  p.x0 = 0.5 * (xs.front() + xs.back());
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
    const double lo = ys[i] - mid;
    const double hi = ys[i + 1] - mid;
    if (lo == 0.0 || lo * hi < 0.0) {
      const double t = (hi == lo) ? 0.0 : -lo / (hi - lo);
      p.x0 = xs[i] + t * (xs[i + 1] - xs[i]);
      break;
    }
  }
  // Decreasing data: negative amplitude from the high end.
  if (ys.front() > ys.back()) {
    p.a = *ymax_it;
    p.b = *ymin_it - *ymax_it;
  }
  return p;
}

}  // namespace

SigmoidFit fit_sigmoid(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw_numerical("fit_sigmoid: x/y length mismatch");
  if (xs.size() < 5) throw_numerical("fit_sigmoid: need at least 5 points");
  for (double y : ys)
    if (!std::isfinite(y)) throw_numerical("fit_sigmoid: non-finite y value");

  const double span = xs.back() - xs.front();
  if (span == 0.0) throw_numerical("fit_sigmoid: degenerate x span");
  const double w_min = 1e-12 * std::abs(span);
  const double w_max = 10.0 * std::abs(span);

  SigmoidFit out;
  SigmoidParams p = initial_guess(xs, ys, std::abs(span));
  double best_rms = rms(xs, ys, p);
  SigmoidParams best = p;

  const int n = static_cast<int>(xs.size());
  double lambda = 1e-3;
  constexpr int max_iter = 500;

  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    Eigen::MatrixXd jac(n, 4);
    Eigen::VectorXd res(n);
    for (int i = 0; i < n; ++i) {
      const double t = (xs[i] - p.x0) / p.w;
      const double s = 1.0 / (1.0 + std::exp(-t));
      const double ds = s * (1.0 - s);
      res[i] = p.a + p.b * s - ys[i];
      jac(i, 0) = 1.0;
      jac(i, 1) = s;
      jac(i, 2) = -p.b * ds / p.w;        // d/dx0
      jac(i, 3) = -p.b * ds * t / p.w;    // d/dw
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * res;
    Eigen::MatrixXd damped =
        jtj + lambda * Eigen::MatrixXd(jtj.diagonal().asDiagonal());
    damped.diagonal().array() += lambda * 1e-12;

    Eigen::LDLT<Eigen::MatrixXd> solver(damped);
    if (solver.info() != Eigen::Success)
      throw_numerical("fit_sigmoid: singular normal equations");
    const Eigen::VectorXd step = solver.solve(-jtr);
    if (!step.allFinite())
      throw_numerical("fit_sigmoid: singular normal equations");

    SigmoidParams trial = p;
    trial.a += step[0];
    trial.b += step[1];
    trial.x0 += step[2];
    trial.w += step[3];
    trial.w = std::clamp(trial.w, w_min, w_max);

    const double trial_rms = rms(xs, ys, trial);
    if (trial_rms <= best_rms) {
      const double pnorm = std::sqrt(p.a * p.a + p.b * p.b + p.x0 * p.x0 +
                                     p.w * p.w) +
                           1e-300;
      const double rel_step = step.norm() / pnorm;
      p = trial;
      best = trial;
      best_rms = trial_rms;
      lambda = std::max(lambda * 0.1, 1e-12);
      if (rel_step < 1e-8) {
        out.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;  // stalled
    }
  }

  out.params = best;
  out.rms_residual = best_rms;
  out.width_at_bound = (best.w >= w_max * (1.0 - 1e-9)) ||
                       (best.w <= w_min * (1.0 + 1e-9));
  out.midpoint_slope = best.midpoint_slope();
  return out;
}

SlopeUncertainty slope_uncertainty(const std::vector<double>& xs,
                                   const std::vector<double>& ys,
                                   double jitter_sigma, int n_resamples,
                                   std::uint64_t seed) {
  SlopeUncertainty out;
  out.n_resamples = n_resamples;
  if (jitter_sigma == 0.0) return out;

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, jitter_sigma);

  std::vector<double> slopes;
  slopes.reserve(n_resamples);
  std::vector<double> jittered(ys.size());
  for (int r = 0; r < n_resamples; ++r) {
    for (std::size_t i = 0; i < ys.size(); ++i)
      jittered[i] = ys[i] + gauss(rng);
    try {
      const SigmoidFit fit = fit_sigmoid(xs, jittered);
      if (fit.converged)
        slopes.push_back(fit.midpoint_slope);
      else
        ++out.n_failed_fits;
    } catch (const Error&) {
      ++out.n_failed_fits;
    }
  }

  if (slopes.size() < 2) return out;
  double mean = 0.0;
  for (double s : slopes) mean += s;
  mean /= slopes.size();
  double var = 0.0;
  for (double s : slopes) var += (s - mean) * (s - mean);
  out.slope_std = std::sqrt(var / (slopes.size() - 1));
  return out;
}

}  // namespace spinbus
