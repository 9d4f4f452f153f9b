#include <doctest.h>

#include <cmath>

#include "spinbus/error.hpp"
#include "spinbus/experiments.hpp"
#include "spinbus/perturbation.hpp"

using namespace spinbus;

TEST_CASE("effective symmetry point of an isolated symmetric site") {
  const ChainSpec spec = ChainSpec::homogeneous_chain(3, 0.0, 2.0, 0.0);
  CHECK(std::abs(effective_symmetry_point(spec, 1, -1.0, 1.0)) < 1e-6);
}

TEST_CASE("two-site root matches a brute-force scan") {
  // Neighbour pinned up by a strong bias, ferromagnetic J.
  ChainSpec spec;
  spec.sites.push_back({-40.0, 0.5, SiteRole::coupler, 0});  // source, ~up
  spec.sites.push_back({0.0, 1.0, SiteRole::coupler, 1});    // target
  spec.couplings.edges.push_back({0, 1, -0.5});

  const double root = effective_symmetry_point(spec, 1, -3.0, 3.0);

  // Brute-force scan of <sz_target>(eps) over a fine grid.
  double best_eps = 0.0, best_val = 1e300;
  for (int i = 0; i <= 6000; ++i) {
    const double eps = -3.0 + 6.0 * i / 6000.0;
    ChainSpec probe = spec;
    probe.sites[1].epsilon = eps;
    const double v =
        sz_expectation(diagonalize_chain(probe, 1).ground(), 1, 2);
    if (std::abs(v) < best_val) {
      best_val = std::abs(v);
      best_eps = eps;
    }
  }
  CHECK(root == doctest::Approx(best_eps).epsilon(2e-3));
  // Mean-field estimate: the root cancels the induced field 2 J <sz_nbr>.
  CHECK(root == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("no propagation path means no shift") {
  // J_cc = 0: distant targets keep their symmetry point at zero.
  ChainSpec spec = ChainSpec::homogeneous_chain(5, 0.0, 2.0, 0.0);
  spec.sites[4].epsilon = 5.0;  // polarized source
  for (int target = 0; target < 3; ++target)
    CHECK(std::abs(effective_symmetry_point(spec, target, -1.0, 1.0)) < 1e-6);
}

TEST_CASE("no sign change is reported") {
  ChainSpec spec = ChainSpec::homogeneous_chain(2, 0.0, 1.0, 0.3);
  CHECK_THROWS_AS(effective_symmetry_point(spec, 0, 5.0, 6.0), Error);
}

TEST_CASE("iterative fine-tuning is idempotent") {
  // Slightly mistuned chain: the iterative procedure walks every unit to
  // its effective symmetry point; re-running from the tuned
  // configuration reproduces it.  In the ordered regime the collective
  // mode makes the loop stiff, so the tolerance there is the
  // measurement-scale 1e-4 GHz (still far below a mPhi0).
  auto mistune = [](ChainSpec spec) {
    spec.sites[0].epsilon = 0.04;
    spec.sites[1].epsilon = -0.03;
    spec.sites[2].epsilon = 0.02;
    spec.sites[3].epsilon = -0.05;
    spec.sites[4].epsilon = 0.01;
    return spec;
  };

  for (const auto& [ratio, tol] :
       std::vector<std::pair<double, double>>{{0.5, 1e-6}, {1.5, 1e-4}}) {
    const ChainSpec spec =
        mistune(ChainSpec::homogeneous_chain(5, 0.0, 4.0, ratio * 2.0));
    const TuneOptions options{tol, 300};
    const std::vector<double> tuned = tune_symmetry_points(spec, {}, options);

    ChainSpec retuned_spec = spec;
    for (int i = 0; i < 5; ++i) retuned_spec.sites[i].epsilon = tuned[i];
    const std::vector<double> retuned =
        tune_symmetry_points(retuned_spec, {}, options);
    for (int i = 0; i < 5; ++i)
      CHECK(std::abs(retuned[i] - tuned[i]) < 3.0 * tol);
  }

  // The mistuning-free chain is already at its fixed point.
  const ChainSpec clean = ChainSpec::homogeneous_chain(5, 0.0, 4.0, 1.0);
  for (double eps : tune_symmetry_points(clean, {}))
    CHECK(std::abs(eps) < 2e-6);
}

TEST_CASE("flux propagation onset across the critical ratio") {
  const double delta = 5.0;
  const SiteCurrents ip(7, 100.0);
  double cross_chain_weak = 0.0, cross_chain_strong = 0.0;
  std::vector<double> cross_by_ratio;
  for (double ratio : {0.2, 0.5, 1.0, 2.0}) {
    const ChainSpec chain =
        ChainSpec::homogeneous_chain(7, 0.0, delta, ratio * delta / 2.0);
    const FluxSignal signal = flux_propagation(chain, 6, ip);
    REQUIRE(signal.target_sites.size() == 6);
    // Site 0 is the far end of the chain from the source at site 6.
    const double far = signal.magnitude_mphi0.front();
    cross_by_ratio.push_back(far);
    if (ratio == 0.2) cross_chain_weak = far;
    if (ratio == 2.0) cross_chain_strong = far;

    // Monotone decay with distance from the source in the paramagnetic
    // phase, above the symmetry-point resolution floor.
    if (ratio <= 0.5) {
      for (std::size_t i = 0; i + 1 < signal.magnitude_mphi0.size(); ++i)
        CHECK(signal.magnitude_mphi0[i] <=
              signal.magnitude_mphi0[i + 1] + 1e-3);
    }
  }
  CHECK(cross_chain_weak < 0.05);
  CHECK(cross_chain_strong > 5.0);
  for (std::size_t i = 0; i + 1 < cross_by_ratio.size(); ++i)
    CHECK(cross_by_ratio[i] <= cross_by_ratio[i + 1] + 1e-9);
}

TEST_CASE("flux propagation with zero coupling is silent") {
  const ChainSpec chain = ChainSpec::homogeneous_chain(5, 0.0, 5.0, 0.0);
  const FluxSignal signal = flux_propagation(chain, 4, SiteCurrents(5, 100.0));
  for (double magnitude : signal.magnitude_mphi0)
    CHECK(magnitude < 1e-4);
}

TEST_CASE("susceptibility curve: flat at J = 0, saturating when ordered") {
  const SiteCurrents ip(7, 100.0);
  const auto grid = default_source_grid();

  const ChainSpec uncoupled = ChainSpec::homogeneous_chain(7, 0.0, 5.0, 0.0);
  const ResponseCurve flat = susceptibility_curve(uncoupled, 6, 0, ip, grid);
  CHECK(std::abs(flat.midpoint_slope) < 1e-3);

  // Deep coupling saturates toward the rigid-chain transfer of one,
  // overshooting slightly near the critical region (signals can be
  // amplified); observed magnitude frozen below.
  const ChainSpec ordered = ChainSpec::homogeneous_chain(7, 0.0, 5.0, 5.0);
  const ResponseCurve deep = susceptibility_curve(ordered, 6, 0, ip, grid);
  CHECK(deep.fit.converged);
  CHECK(std::abs(deep.midpoint_slope) > 0.5);
  CHECK(std::abs(deep.midpoint_slope) == doctest::Approx(1.19).epsilon(0.03));
}

TEST_CASE("reciprocity on the palindromic chain") {
  const ChainSpec chain = ChainSpec::homogeneous_chain(5, 0.0, 4.0, 2.0);
  const SiteCurrents ip(5, 100.0);
  const auto grid = default_source_grid(0.020, 21);
  const ResponseCurve forward = susceptibility_curve(chain, 4, 0, ip, grid);
  const ResponseCurve backward = susceptibility_curve(chain, 0, 4, ip, grid);
  CHECK(forward.midpoint_slope ==
        doctest::Approx(backward.midpoint_slope).epsilon(1e-6));
}

TEST_CASE("midpoint slope grows with the coupling ratio") {
  const double delta = 5.0;
  const SiteCurrents ip(7, 100.0);
  const auto grid = default_source_grid();
  double prev = -1.0;
  for (double ratio : {0.1, 0.5, 1.0, 2.0}) {
    const ChainSpec chain =
        ChainSpec::homogeneous_chain(7, 0.0, delta, ratio * delta / 2.0);
    const double slope =
        std::abs(susceptibility_curve(chain, 6, 0, ip, grid).midpoint_slope);
    CHECK(slope >= prev - 1e-6);
    prev = slope;
  }
  // Past the amplification peak the transfer relaxes back toward the
  // rigid-chain value of one (regression fixture).
  const ChainSpec rigid = ChainSpec::homogeneous_chain(7, 0.0, delta, 7.5);
  const double rigid_slope =
      std::abs(susceptibility_curve(rigid, 6, 0, ip, grid).midpoint_slope);
  CHECK(rigid_slope == doctest::Approx(1.04).epsilon(0.05));
  CHECK(rigid_slope < prev);
}

TEST_CASE("spectral splitting identifies the degenerate doublet") {
  // Decoupled qubits: exactly degenerate.
  const ChainSpec decoupled =
      ChainSpec::device_chain(2.0, 2.0, 5.0, 0.25, 0.0, 0.0);
  const QubitDoublet base = spectral_splitting(decoupled);
  CHECK(base.splitting_ghz == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(base.lower_overlap > 0.999);

  // Single-coupler device: splitting against the static estimator plus
  // the chain's response enhancement at the qubit frequency.
  const ChainSpec single =
      ChainSpec::device_chain(2.0, 2.0, 5.0, 0.0, 0.5, 0.5, 1);
  ChainSpec one_coupler;
  one_coupler.sites.push_back({0.0, 5.0, SiteRole::coupler, 1});
  const double j_static =
      j_eff_second_order_sum(one_coupler, 0.5, 0.5, 0, 0);
  const double enhancement = 1.0 / (1.0 - (2.0 / 5.0) * (2.0 / 5.0));
  const double splitting = spectral_splitting(single).splitting_ghz;
  CHECK(splitting ==
        doctest::Approx(2.0 * std::abs(j_static) * enhancement).epsilon(0.06));

  // Non-zero qubit bias violates the protocol.
  ChainSpec biased = decoupled;
  biased.sites[0].epsilon = 0.1;
  CHECK_THROWS_AS(spectral_splitting(biased), Error);
}

TEST_CASE("splitting degrades into the dressed regime") {
  // Strong coupling pushes chain weight into the lowest levels and the
  // doublet identification flags it.
  const ChainSpec strong =
      ChainSpec::device_chain(2.0, 2.0, 1.0, 2.5, 1.5, 1.5);
  CHECK_THROWS_AS(spectral_splitting(strong, 0.5), Error);
}

TEST_CASE("susceptibility pipeline composes units correctly") {
  CHECK(j_eff_from_susceptibility(0.0, 1e4, 80.0, 80.0, 62.6, 62.6) == 0.0);
  const double base = j_eff_from_susceptibility(0.2, 1e4, 80.0, 80.0, 62.6, 62.6);
  // Linear in each mutual inductance.
  CHECK(j_eff_from_susceptibility(0.2, 1e4, 80.0, 80.0, 2 * 62.6, 62.6) ==
        doctest::Approx(2.0 * base).epsilon(1e-12));
  CHECK(j_eff_from_susceptibility(0.2, 1e4, 80.0, 80.0, 62.6, 3 * 62.6) ==
        doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("estimator triangle on a single-coupler pipeline") {
  // All three effective-coupling routes on one analytically transparent
  // system: coupler delta = 5 GHz, attachments J = 0.4 GHz.
  ChainSpec coupler;
  coupler.sites.push_back({0.0, 5.0, SiteRole::coupler, 0});
  const double j = 0.4;
  const double j_pert = j_eff_second_order_sum(coupler, j, j, 0, 0);

  // Static splitting: low qubit frequency.
  const ChainSpec device =
      ChainSpec::device_chain(0.2, 0.2, 5.0, 0.0, j, j, 1);
  const double half_split = 0.5 * spectral_splitting(device).splitting_ghz;
  CHECK(half_split == doctest::Approx(std::abs(j_pert)).epsilon(0.05));

  // Susceptibility route in spin units: the single-unit current slope
  // maps to d<sz>/d eps = -1/delta at the symmetry point, and the
  // flux-per-energy factors cancel against the coupling conversions.
  const double ip = 100.0;
  const double d_iz_d_fz =
      ip * (1.0 / 5.0) * flux_to_epsilon(ip, 1.0);  // nA per Phi0
  const double m_equiv = 62.6;
  const double j_qc = spin_coupling_from_currents(ip, 100.0, m_equiv);
  const double scale = j / j_qc;  // rescale mutuals to make J_qc = 0.4
  const double j_susc = j_eff_from_susceptibility(
      1.0, d_iz_d_fz, 100.0 * scale, 100.0 * scale, m_equiv, m_equiv);
  CHECK(j_susc == doctest::Approx(std::abs(j_pert)).epsilon(0.02));
}
