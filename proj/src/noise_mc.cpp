#include "spinbus/noise_mc.hpp"

#include <cmath>
#include <random>

#include "spinbus/circuit_map.hpp"
#include "spinbus/eigensolver.hpp"
#include "spinbus/error.hpp"
#include "spinbus/parallel.hpp"

namespace spinbus {

void NoiseSpec::validate() const {
  if (!(amplitude >= 0.0)) throw_config("noise amplitude must be >= 0");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw_config("noise exponent alpha must lie in (0, 2)");
  if (!(f_low > 0.0 && f_low < f_high))
    throw_config("noise band requires 0 < f_low < f_high");
  for (double g : geometry_factors)
    if (!(g >= 0.0)) throw_config("geometry factors must be >= 0");
}

double rms_flux_offset(const NoiseSpec& noise) {
  noise.validate();
  double integral;
  if (noise.alpha == 1.0) {
    integral = std::log(noise.f_high / noise.f_low);
  } else {
    const double p = 1.0 - noise.alpha;
    integral = (std::pow(noise.f_high, p) - std::pow(noise.f_low, p)) / p;
  }
  return noise.amplitude * std::sqrt(integral);
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 on the (master, index) pair.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<double> sample_offsets(const NoiseSpec& noise, int n_loops,
                                   std::uint64_t seed) {
  noise.validate();
  if (!noise.geometry_factors.empty() &&
      static_cast<int>(noise.geometry_factors.size()) != n_loops)
    throw_config("geometry_factors must match the loop count");

  const double sigma = rms_flux_offset(noise);
  std::vector<double> offsets(n_loops, 0.0);
  if (sigma == 0.0) return offsets;

  std::mt19937_64 rng(derive_stream_seed(seed, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n_loops; ++i) {
    const double g =
        noise.geometry_factors.empty() ? 1.0 : noise.geometry_factors[i];
    offsets[i] = sigma * g * gauss(rng);
  }
  return offsets;
}

NoiseEnsembleStats noisy_spectrum_ensemble(
    const ChainSpec& spec, const std::vector<UnitNoiseSensitivity>& sensitivity,
    const NoiseSpec& noise, int n_runs, std::uint64_t seed,
    int tracked_levels) {
  spec.validate();
  noise.validate();
  const int n = spec.n_sites();
  if (static_cast<int>(sensitivity.size()) != n)
    throw_config("noisy_spectrum_ensemble: need one sensitivity per site");
  if (n_runs < 1) throw_config("noisy_spectrum_ensemble: n_runs must be >= 1");

  const SpectrumResult reference = diagonalize_chain(spec);
  const int dim = static_cast<int>(reference.dimension);
  const int m = (tracked_levels <= 0 || tracked_levels > dim)
                    ? std::min(dim, 16)
                    : tracked_levels;

  Eigen::MatrixXd energies(m, n_runs);   // tracked level x run
  std::vector<int> ambiguous(n_runs, 0);

  parallel_for(n_runs, [&](std::int64_t run) {
    const std::vector<double> offsets_uphi0 =
        sample_offsets(noise, 2 * n, derive_stream_seed(seed, run));

    ChainSpec perturbed = spec;
    for (int site = 0; site < n; ++site) {
      const double dfz = offsets_uphi0[2 * site] * 1e-6;      // Phi0
      const double dfx = offsets_uphi0[2 * site + 1] * 1e-6;  // Phi0
      perturbed.sites[site].epsilon +=
          flux_to_epsilon(sensitivity[site].ip_na, dfz);
      perturbed.sites[site].delta = std::abs(
          perturbed.sites[site].delta +
          sensitivity[site].ddelta_dfx_ghz_per_phi0 * dfx);
    }

    const SpectrumResult run_spectrum = diagonalize_chain(perturbed);
    // Track each noiseless level to the perturbed level of maximal
    // overlap among a small neighbourhood of level indices.
    const int scan = std::min(dim, m + 8);
    const Eigen::MatrixXd overlaps = reference.states.leftCols(m).transpose() *
                                     run_spectrum.states.leftCols(scan);
    for (int k = 0; k < m; ++k) {
      Eigen::Index best;
      overlaps.row(k).cwiseAbs().maxCoeff(&best);
      const double weight = overlaps(k, best) * overlaps(k, best);
      if (weight < 0.5) ++ambiguous[run];
      energies(k, run) = run_spectrum.energies[best];
    }
  });

  NoiseEnsembleStats out;
  out.n_runs = n_runs;
  out.seed = seed;
  out.levels = m;
  out.noiseless_energies = reference.energies.head(m);
  out.mean_energy.resize(m);
  out.std_energy.resize(m);
  out.mean_transition.resize(m);
  out.std_transition.resize(m);
  out.ambiguous_per_run = ambiguous;

  const Eigen::RowVectorXd ground = energies.row(0);
  auto sample_std = [n_runs](const Eigen::RowVectorXd& values) {
    // Identical samples give exactly zero width (guards the A = 0 case
    // against mean-roundoff residue).
    if (n_runs < 2 || values.maxCoeff() == values.minCoeff()) return 0.0;
    const double mean = values.mean();
    return std::sqrt((values.array() - mean).square().sum() / (n_runs - 1));
  };
  for (int k = 0; k < m; ++k) {
    const Eigen::RowVectorXd level = energies.row(k);
    const Eigen::RowVectorXd transition = level - ground;
    out.mean_energy[k] = level.mean();
    out.mean_transition[k] = transition.mean();
    out.std_energy[k] = sample_std(level);
    out.std_transition[k] = sample_std(transition);
  }
  return out;
}

}  // namespace spinbus
