#include "spinbus/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "spinbus/constants.hpp"
#include "spinbus/error.hpp"
#include "spinbus/parallel.hpp"

namespace spinbus {

namespace {

// Ground-state <sz_site>, served by the warm-started Lanczos path with a
// dense verification whenever the gap estimate collapses.
double ground_sz(const ChainSpec& spec, int site, Eigen::VectorXd* warm) {
  const GroundStateResult g = ground_state(spec, warm);
  if (g.gap_estimate <= 1e-8) {
    const SpectrumResult dense = diagonalize_chain(spec, 2);
    if (dense.ground_degenerate())
      throw_numerical("effective_symmetry_point: degenerate ground state");
    return sz_expectation(dense.ground(), site, spec.n_sites());
  }
  return sz_expectation(g.state, site, spec.n_sites());
}

}  // namespace

double effective_symmetry_point(const ChainSpec& spec, int target_site,
                                double eps_lo, double eps_hi, double tol_ghz) {
  if (target_site < 0 || target_site >= spec.n_sites())
    throw_numerical("effective_symmetry_point: target site out of range");
  if (eps_lo >= eps_hi)
    throw_numerical("effective_symmetry_point: empty search interval");

  ChainSpec work = spec;
  Eigen::VectorXd warm;
  auto eval = [&](double eps) {
    work.sites[target_site].epsilon = eps;
    return ground_sz(work, target_site, &warm);
  };

  double lo = eps_lo, hi = eps_hi;
  double f_lo = eval(lo);
  double f_hi = eval(hi);

  if (f_lo * f_hi > 0.0) {
    // Fallback scan for a bracket inside the interval.
    constexpr int scan_points = 41;
    bool found = false;
    double prev_x = lo, prev_f = f_lo;
    for (int i = 1; i < scan_points; ++i) {
      const double x = eps_lo + (eps_hi - eps_lo) * i / (scan_points - 1);
      const double f = eval(x);
      if (prev_f == 0.0 || prev_f * f < 0.0) {
        lo = prev_x;
        hi = x;
        f_lo = prev_f;
        found = true;
        break;
      }
      prev_x = x;
      prev_f = f;
    }
    if (!found)
      throw_numerical(
          "effective_symmetry_point: <sz> does not change sign on the "
          "search interval");
  }

  while (hi - lo > tol_ghz) {
    const double mid = 0.5 * (lo + hi);
    const double f = eval(mid);
    if (f == 0.0) return mid;
    if (f * f_lo < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      f_lo = f;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Search half-width for one site: the mean-field bound on the induced
// longitudinal field, padded.
double search_half_width(const ChainSpec& spec, int site) {
  double coupling = 0.0;
  for (const auto& e : spec.couplings.edges)
    if (e.a == site || e.b == site) coupling += std::abs(e.j);
  return 2.0 * coupling + 0.1;
}

// Root of the target's <sz> with every other site held fixed, widening
// the mean-field search window when it fails to bracket.
double tracked_root(const ChainSpec& spec, int target, double tol_ghz) {
  const double half = search_half_width(spec, target);
  for (int attempt = 0;; ++attempt) {
    const double w = half * (1 << attempt);
    try {
      return effective_symmetry_point(spec, target, -w, w, tol_ghz);
    } catch (const Error&) {
      if (attempt >= 4) throw;
    }
  }
}

}  // namespace

std::vector<double> tune_symmetry_points(const ChainSpec& spec,
                                         const std::vector<int>& fixed_sites,
                                         const TuneOptions& options) {
  const int n = spec.n_sites();
  std::set<int> fixed(fixed_sites.begin(), fixed_sites.end());
  std::vector<int> free_sites;
  for (int i = 0; i < n; ++i)
    if (!fixed.count(i)) free_sites.push_back(i);
  const int m = static_cast<int>(free_sites.size());

  ChainSpec work = spec;
  std::vector<double> eps(n);
  for (int i = 0; i < n; ++i) eps[i] = spec.sites[i].epsilon;
  if (m == 0) return eps;

  // Phase 1: a few damped per-unit passes, mirroring the measured
  // procedure.  Weakly coupled chains settle here immediately.
  const double root_tol = 0.25 * options.tol_ghz;
  double damping = 0.5;
  double prev_residual = std::numeric_limits<double>::infinity();
  const int gs_sweeps = std::min(options.max_sweeps, 8);
  for (int sweep = 0; sweep < gs_sweeps; ++sweep) {
    double max_residual = 0.0;
    for (int site : free_sites) {
      const double root = tracked_root(work, site, root_tol);
      max_residual = std::max(max_residual, std::abs(root - eps[site]));
      eps[site] += damping * (root - eps[site]);
      work.sites[site].epsilon = eps[site];
    }
    if (max_residual < options.tol_ghz) return eps;
    if (max_residual > 0.8 * prev_residual)
      damping = std::max(0.1, 0.5 * damping);
    prev_residual = max_residual;
  }

  // Phase 2: Newton on the simultaneous system <sz_i>({eps}) = 0.  The
  // collective modes of strongly coupled chains make the per-unit map
  // stiff; the Jacobian solve handles them directly.
  Eigen::VectorXd warm;
  auto magnetizations = [&](const std::vector<double>& point) {
    for (int i = 0; i < n; ++i) work.sites[i].epsilon = point[i];
    const GroundStateResult g = ground_state(work, &warm);
    Eigen::VectorXd f(m);
    for (int k = 0; k < m; ++k)
      f[k] = sz_expectation(g.state, free_sites[k], n);
    return f;
  };

  const double fd_step = 1e-5;
  for (int iter = 0; iter < options.max_sweeps; ++iter) {
    const Eigen::VectorXd f0 = magnetizations(eps);
    Eigen::MatrixXd jac(m, m);
    for (int k = 0; k < m; ++k) {
      std::vector<double> shifted = eps;
      shifted[free_sites[k]] += fd_step;
      jac.col(k) = (magnetizations(shifted) - f0) / fd_step;
    }

    Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-f0);
    if (!step.allFinite()) {
      // Ridge-regularized fallback for near-singular response.
      const Eigen::MatrixXd jtj = jac.transpose() * jac;
      const double tau = 1e-10 * jtj.trace() / m + 1e-300;
      step = (jtj + tau * Eigen::MatrixXd::Identity(m, m))
                 .ldlt()
                 .solve(-jac.transpose() * f0);
    }

    // Backtrack if the full step overshoots the residual.
    double scale = 1.0;
    const double f0_norm = f0.norm();
    for (int bt = 0; bt < 8; ++bt) {
      std::vector<double> trial = eps;
      for (int k = 0; k < m; ++k)
        trial[free_sites[k]] += scale * step[k];
      if (magnetizations(trial).norm() <= f0_norm || scale < 1e-3) {
        for (int k = 0; k < m; ++k) eps[free_sites[k]] = trial[free_sites[k]];
        break;
      }
      scale *= 0.5;
    }
    if (scale * step.cwiseAbs().maxCoeff() < 0.5 * options.tol_ghz) {
      for (int i = 0; i < n; ++i) work.sites[i].epsilon = eps[i];
      return eps;
    }
  }
  throw_numerical("tune_symmetry_points: no self-consistent fixed point after " +
                  std::to_string(options.max_sweeps) + " iterations");
}

FluxSignal flux_propagation(const ChainSpec& spec, int source_site,
                            const SiteCurrents& ip_na, double offset_mphi0,
                            const TuneOptions& options) {
  const int n = spec.n_sites();
  if (source_site < 0 || source_site >= n)
    throw_numerical("flux_propagation: source site out of range");
  if (static_cast<int>(ip_na.size()) != n)
    throw_numerical("flux_propagation: need one persistent current per site");

  FluxSignal out;
  out.source_site = source_site;
  std::vector<int> targets;
  for (int site = 0; site < n; ++site)
    if (site != source_site) targets.push_back(site);
  out.target_sites = targets;
  out.magnitude_mphi0.resize(targets.size());

  // Each target's symmetry point is tracked on its own, the other units
  // staying at their configured biases.
  parallel_for(static_cast<std::int64_t>(targets.size()), [&](std::int64_t i) {
    const int target = targets[i];
    double shift[2];
    for (int s = 0; s < 2; ++s) {
      ChainSpec work = spec;
      work.sites[source_site].epsilon += flux_to_epsilon(
          ip_na[source_site], (s == 0 ? 1.0 : -1.0) * offset_mphi0 * 1e-3);
      shift[s] =
          epsilon_to_flux(ip_na[target], tracked_root(work, target,
                                                      options.tol_ghz));
    }
    out.magnitude_mphi0[i] = std::abs(shift[0] - shift[1]) * 1e3;
  });
  return out;
}

std::vector<double> default_source_grid(double half_width, int n) {
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i)
    grid[i] = -half_width + 2.0 * half_width * i / (n - 1);
  return grid;
}

ResponseCurve susceptibility_curve(const ChainSpec& spec, int source_site,
                                   int target_site, const SiteCurrents& ip_na,
                                   const std::vector<double>& grid_offsets_phi0,
                                   const TuneOptions& options) {
  const int n = spec.n_sites();
  if (source_site == target_site)
    throw_numerical("susceptibility_curve: source equals target");
  if (grid_offsets_phi0.size() < 21)
    throw_config("susceptibility_curve: need a grid of >= 21 source biases");
  if (static_cast<int>(ip_na.size()) != n)
    throw_numerical("susceptibility_curve: need one persistent current per site");

  ResponseCurve curve;
  curve.units = "Phi0";
  curve.source_bias = grid_offsets_phi0;
  curve.target_symmetry_point.resize(grid_offsets_phi0.size());

  parallel_for(static_cast<std::int64_t>(grid_offsets_phi0.size()),
               [&](std::int64_t i) {
                 ChainSpec work = spec;
                 work.sites[source_site].epsilon += flux_to_epsilon(
                     ip_na[source_site], grid_offsets_phi0[i]);
                 curve.target_symmetry_point[i] = epsilon_to_flux(
                     ip_na[target_site],
                     tracked_root(work, target_site, options.tol_ghz));
               });

  curve.fit = fit_sigmoid(curve.source_bias, curve.target_symmetry_point);
  curve.midpoint_slope = curve.fit.midpoint_slope;
  curve.fit_residual = curve.fit.rms_residual;
  return curve;
}

QubitDoublet spectral_splitting(const ChainSpec& device_spec,
                                double min_overlap) {
  const int n = device_spec.n_sites();
  if (n < 3) throw_numerical("spectral_splitting: need qubits plus a chain");
  const int q1 = 0, q2 = n - 1;
  if (device_spec.sites[q1].epsilon != 0.0 ||
      device_spec.sites[q2].epsilon != 0.0)
    throw_numerical("spectral_splitting: both qubits must sit at epsilon = 0");

  // Decoupled qubit doublet: |e g> and |g e> in the transverse basis,
  // tensored with the ground state of the inner chain.
  ChainSpec inner;
  inner.sites.assign(device_spec.sites.begin() + 1,
                     device_spec.sites.end() - 1);
  for (const auto& e : device_spec.couplings.edges) {
    if (e.a == q1 || e.b == q1 || e.a == q2 || e.b == q2) continue;
    inner.couplings.edges.push_back({e.a - 1, e.b - 1, e.j});
  }
  const Eigen::VectorXd chain_ground =
      diagonalize_chain(inner, 1).ground();

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  // Transverse eigenstates of delta/2 sx: ground (1,-1)/sqrt2, excited
  // (1,1)/sqrt2 in the sz basis.
  auto qubit_state = [&](bool excited, int bit) {
    return inv_sqrt2 * ((bit == 0) ? 1.0 : (excited ? 1.0 : -1.0));
  };

  const std::int64_t dim = device_spec.dimension();
  const std::int64_t inner_dim = inner.dimension();
  Eigen::VectorXd psi_eg = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd psi_ge = Eigen::VectorXd::Zero(dim);
  for (std::int64_t b = 0; b < dim; ++b) {
    const int bit_q1 = static_cast<int>((b >> (n - 1)) & 1);
    const int bit_q2 = static_cast<int>(b & 1);
    const std::int64_t inner_index = (b >> 1) & (inner_dim - 1);
    const double chain_amp = chain_ground[inner_index];
    psi_eg[b] = qubit_state(true, bit_q1) * chain_amp * qubit_state(false, bit_q2);
    psi_ge[b] = qubit_state(false, bit_q1) * chain_amp * qubit_state(true, bit_q2);
  }

  const SpectrumResult s = diagonalize_chain(device_spec);
  const int n_scan = std::min<int>(s.n_levels(), 16);
  std::vector<std::pair<double, int>> ranked;
  for (int k = 0; k < n_scan; ++k) {
    const double oa = psi_eg.dot(s.states.col(k));
    const double ob = psi_ge.dot(s.states.col(k));
    ranked.emplace_back(oa * oa + ob * ob, k);
  }
  std::sort(ranked.rbegin(), ranked.rend());

  QubitDoublet out;
  const auto [ov1, k1] = ranked[0];
  const auto [ov2, k2] = ranked[1];
  out.lower_level = std::min(k1, k2);
  out.upper_level = std::max(k1, k2);
  out.lower_overlap = (k1 < k2) ? ov1 : ov2;
  out.upper_overlap = (k1 < k2) ? ov2 : ov1;
  if (ov1 < min_overlap || ov2 < min_overlap)
    throw_numerical(
        "spectral_splitting: qubit-like levels not identifiable (doublet "
        "overlaps " +
        std::to_string(ov1) + ", " + std::to_string(ov2) +
        " below threshold; dressed regime)");
  out.splitting_ghz = s.energies[out.upper_level] - s.energies[out.lower_level];
  return out;
}

double j_eff_from_susceptibility(double slope, double d_iz_d_fz_na_per_phi0,
                                 double ip_q1_na, double ip_q2_na,
                                 double m_q1c1_ph, double m_q2c7_ph) {
  using constants::phi0;
  const double chi_si = d_iz_d_fz_na_per_phi0 * slope * constants::nano / phi0;
  const double flux_q1 = m_q1c1_ph * constants::pico * ip_q1_na * constants::nano;
  const double flux_q2 = m_q2c7_ph * constants::pico * ip_q2_na * constants::nano;
  return chi_si * flux_q1 * flux_q2 / constants::planck_h / constants::ghz;
}

}  // namespace spinbus
