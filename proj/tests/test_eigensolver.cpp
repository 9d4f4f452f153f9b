#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spinbus/eigensolver.hpp"
#include "spinbus/error.hpp"

using namespace spinbus;

TEST_CASE("diag of sz") {
  Eigen::MatrixXd sz(2, 2);
  sz << 1, 0, 0, -1;
  const auto s = diagonalize(sz);
  CHECK(s.energies[0] == doctest::Approx(-1.0));
  CHECK(s.energies[1] == doctest::Approx(1.0));
}

TEST_CASE("two-level closed form gap") {
  ChainSpec spec;
  spec.sites.push_back({3.0, 4.0, SiteRole::qubit, 1});
  const auto s = diagonalize_chain(spec);
  CHECK(s.gap() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("uniform 3-site chain matches the brute-force oracle") {
  const ChainSpec spec = ChainSpec::homogeneous_chain(3, 0.0, 2.0, 1.0);
  const auto s = diagonalize_chain(spec);
  const auto oracle =
      oracles::jacobi_eigenvalues(oracles::kron_hamiltonian(spec));
  REQUIRE(oracle.size() == 8);
  for (int k = 0; k < 8; ++k)
    CHECK(s.energies[k] == doctest::Approx(oracle[k]).epsilon(1e-10));
}

TEST_CASE("spectrum invariants: residuals, orthonormality, trace, order") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> field(-2.0, 2.0);
  std::uniform_real_distribution<double> positive(0.0, 3.0);
  ChainSpec spec;
  for (int i = 0; i < 5; ++i)
    spec.sites.push_back({field(rng), positive(rng), SiteRole::coupler, i});
  for (int i = 0; i + 1 < 5; ++i)
    spec.couplings.edges.push_back({i, i + 1, field(rng)});

  const Eigen::MatrixXd h = build_hamiltonian(spec);
  const auto s = diagonalize(h);

  for (int k = 0; k < s.n_levels(); ++k)
    CHECK(s.residual_norms[k] <= 1e-9 * std::max(1.0, s.h_norm));
  for (int k = 1; k < s.n_levels(); ++k)
    CHECK(s.energies[k] >= s.energies[k - 1]);

  const Eigen::MatrixXd overlap = s.states.transpose() * s.states;
  CHECK((overlap - Eigen::MatrixXd::Identity(32, 32)).cwiseAbs().maxCoeff() <
        1e-10);

  CHECK(s.energies.sum() ==
        doctest::Approx(h.trace()).epsilon(1e-8));
}

TEST_CASE("variational bound on random states") {
  const ChainSpec spec = ChainSpec::homogeneous_chain(5, 0.3, 1.7, 0.8);
  const Eigen::MatrixXd h = build_hamiltonian(spec);
  const auto s = diagonalize(h, 1);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd psi(h.rows());
    for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = gauss(rng);
    psi.normalize();
    CHECK(s.energies[0] <= psi.dot(h * psi) + 1e-10);
  }
}

TEST_CASE("expectation values") {
  // <+x| sz |+x> = 0
  Eigen::VectorXd plus_x(2);
  plus_x << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(sz_expectation(plus_x, 0, 1) == doctest::Approx(0.0));

  // Symmetry-forced zero at the homogeneous chain symmetry point.
  const ChainSpec chain = ChainSpec::homogeneous_chain(5, 0.0, 2.0, 1.0);
  const auto s = diagonalize_chain(chain, 1);
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(sz_expectation(s.ground(), i, 5)) < 1e-8);

  // Single coupler closed form -eps/sqrt(eps^2+delta^2).
  ChainSpec single;
  single.sites.push_back({1.0, 1.0, SiteRole::coupler, 0});
  const auto s1 = diagonalize_chain(single, 1);
  CHECK(sz_expectation(s1.ground(), 0, 1) ==
        doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));

  // Dense operator route agrees with the bit kernel.
  const Eigen::MatrixXd sz2 =
      embed_pauli(2, PauliAxis::z, 5).real();
  CHECK(expectation(s.ground(), sz2) ==
        doctest::Approx(sz_expectation(s.ground(), 2, 5)).epsilon(1e-12));

  Eigen::VectorXd wrong(4);
  wrong.setZero();
  CHECK_THROWS_AS(expectation(wrong, sz2), Error);
}

TEST_CASE("connected correlator") {
  // Uncorrelated product state at J = 0.
  const ChainSpec uncoupled = ChainSpec::homogeneous_chain(4, 0.4, 1.0, 0.0);
  const auto su = diagonalize_chain(uncoupled);
  CHECK(connected_correlator(su, 0, 3, 4) == doctest::Approx(0.0).epsilon(1e-10));

  // Paramagnetic 7-site chain: magnitude decays monotonically with
  // distance, and matches the free-fermion oracle.
  const double delta = 2.0, j = 0.1 * delta / 2.0;
  const ChainSpec chain = ChainSpec::homogeneous_chain(7, 0.0, delta, j);
  const auto s = diagonalize_chain(chain);
  double previous = 2.0;
  for (int b = 1; b < 7; ++b) {
    const double value = connected_correlator(s, 0, b, 7);
    CHECK(std::abs(value) < previous);
    previous = std::abs(value);

    const double zz_oracle = oracles::jw_zz_correlator(7, delta, j, 0, b);
    // At eps = 0, <sz> vanishes so the correlator is -<sz sz>.
    CHECK(value == doctest::Approx(-zz_oracle).epsilon(1e-6));
  }

  // Strong coupling: end-to-end value approaches -1 (GHZ-like doublet).
  const ChainSpec ordered = ChainSpec::homogeneous_chain(7, 0.0, 2.0, 10.0);
  const auto so = diagonalize_chain(ordered);
  CHECK(connected_correlator(so, 0, 6, 7) == doctest::Approx(-1.0).epsilon(0.01));
}

TEST_CASE("Hellmann-Feynman derivative") {
  // Symmetric point: derivative vanishes.
  const ChainSpec sym = ChainSpec::homogeneous_chain(3, 0.0, 2.0, 0.7);
  CHECK(hellmann_feynman_derivative(sym, 1, BiasParameter::epsilon) ==
        doctest::Approx(0.0).epsilon(1e-10));

  // Single spin closed form dE0/deps = -1/(2 sqrt 2) at eps = delta = 1.
  ChainSpec single;
  single.sites.push_back({1.0, 1.0, SiteRole::coupler, 0});
  CHECK(hellmann_feynman_derivative(single, 0, BiasParameter::epsilon) ==
        doctest::Approx(-1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-12));

  // Finite-difference self-oracle on a generic spec, both bias kinds.
  ChainSpec spec = ChainSpec::homogeneous_chain(4, 0.0, 1.5, 0.6);
  spec.sites[2].epsilon = 0.35;
  for (const BiasParameter bias :
       {BiasParameter::epsilon, BiasParameter::delta}) {
    const double analytic = hellmann_feynman_derivative(spec, 2, bias);
    const double step = 1e-5;
    ChainSpec up = spec, down = spec;
    if (bias == BiasParameter::epsilon) {
      up.sites[2].epsilon += step;
      down.sites[2].epsilon -= step;
    } else {
      up.sites[2].delta += step;
      down.sites[2].delta -= step;
    }
    const double numeric = (diagonalize_chain(up, 1).energies[0] -
                            diagonalize_chain(down, 1).energies[0]) /
                           (2.0 * step);
    CHECK(analytic == doctest::Approx(numeric).epsilon(1e-5));
  }

  // Degenerate ground state is refused.
  ChainSpec degenerate;
  degenerate.sites.push_back({0.0, 0.0, SiteRole::coupler, 0});
  degenerate.sites.push_back({0.0, 0.0, SiteRole::coupler, 1});
  degenerate.couplings.edges.push_back({0, 1, 1.0});
  CHECK_THROWS_AS(
      hellmann_feynman_derivative(degenerate, 0, BiasParameter::epsilon),
      Error);
}

TEST_CASE("chain gap closes as the coupling ratio grows") {
  const double delta = 2.0;
  double previous_gap = 1e300;
  for (double ratio : {0.1, 0.4, 0.7, 1.0}) {
    const ChainSpec chain =
        ChainSpec::homogeneous_chain(7, 0.0, delta, ratio * delta / 2.0);
    const double gap = diagonalize_chain(chain, 2).gap();
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
}

TEST_CASE("diagonalize rejects non-symmetric input") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(diagonalize(bad), Error);
}

TEST_CASE("degenerate blocks are reported") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
  h(0, 0) = -1.0;
  h(1, 1) = -1.0;
  h(2, 2) = 0.5;
  h(3, 3) = 2.0;
  const auto s = diagonalize(h);
  const auto blocks = s.degenerate_blocks();
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].first == 0);
  CHECK(blocks[0].second == 2);
  CHECK(s.ground_degenerate());
}
