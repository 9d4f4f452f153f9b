#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spinbus/spin_model.hpp"

namespace spinbus {

/// Quasistatic 1/f^alpha flux-noise model: one frozen Gaussian offset per
/// flux loop and run, with variance from integrating the noise spectrum
/// (one-sided PSD A^2 (f/1Hz)^-alpha) over [f_low, f_high].
struct NoiseSpec {
  double amplitude = 3.0;  // uPhi0 / sqrt(Hz) at 1 Hz
  double alpha = 0.9;
  double f_low = 1e-3;   // Hz
  double f_high = 1e6;   // Hz
  std::vector<double> geometry_factors;  // per loop; empty = all 1

  void validate() const;
};

/// RMS flux offset sigma in uPhi0:
/// sigma^2 = A^2 integral of (f/1Hz)^-alpha over the band (log form at
/// alpha = 1).
double rms_flux_offset(const NoiseSpec& noise);

/// Independent zero-mean Gaussian offsets (uPhi0), one per loop, scaled
/// by the per-loop geometry factor.  Deterministic under `seed`.
std::vector<double> sample_offsets(const NoiseSpec& noise, int n_loops,
                                   std::uint64_t seed);

/// Flux-to-spin sensitivities of one unit: z-loop offsets enter the
/// longitudinal field through the persistent current, x-loop offsets
/// perturb the transverse field at the tabulated rate.
struct UnitNoiseSensitivity {
  double ip_na = 0.0;                 // nA
  double ddelta_dfx_ghz_per_phi0 = 0.0;
};

/// Per-level statistics of the spectrum over a noise ensemble.  Levels of
/// each perturbed run are matched to the noiseless eigenbasis by maximal
/// overlap; matches below sqrt(0.5) overlap are counted as ambiguous.
struct NoiseEnsembleStats {
  int n_runs = 0;
  std::uint64_t seed = 0;
  int levels = 0;
  Eigen::VectorXd noiseless_energies;   // GHz
  Eigen::VectorXd mean_energy;          // GHz, per tracked level
  Eigen::VectorXd std_energy;           // GHz (sample std)
  Eigen::VectorXd mean_transition;      // E_k - E_0 per run, averaged
  Eigen::VectorXd std_transition;       // the linewidth proxy
  std::vector<int> ambiguous_per_run;   // tracking failures per run
};

/// n_runs re-diagonalizations of `spec` with fresh frozen offsets; loop
/// order is [z_0, x_0, z_1, x_1, ...].  Runs use independent RNG
/// substreams derived from `seed`, so the ensemble is reproducible and
/// order-invariant under parallel execution.
NoiseEnsembleStats noisy_spectrum_ensemble(
    const ChainSpec& spec, const std::vector<UnitNoiseSensitivity>& sensitivity,
    const NoiseSpec& noise, int n_runs = 10, std::uint64_t seed = 0,
    int tracked_levels = 0);

/// Substream seed for run `index` (splitmix64 mixing).
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace spinbus
