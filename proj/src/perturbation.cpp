#include "spinbus/perturbation.hpp"

#include <cmath>
#include <string>

#include "spinbus/error.hpp"

namespace spinbus {

namespace {

// sz_site |state>, expressed in the eigenbasis: returns column vector of
// <n| sz_site |0> for all n.
Eigen::VectorXd sz_matrix_elements_with_ground(const SpectrumResult& s,
                                               int site, int n_sites) {
  const int shift = n_sites - 1 - site;
  Eigen::VectorXd sz_ground(s.dimension);
  const Eigen::VectorXd g = s.ground();
  for (Eigen::Index b = 0; b < s.dimension; ++b)
    sz_ground[b] = (((b >> shift) & 1) ? -1.0 : 1.0) * g[b];
  return s.states.transpose() * sz_ground;
}

void require_nondegenerate_ground(const SpectrumResult& s) {
  if (s.ground_degenerate())
    throw_numerical("chain ground state is degenerate (gap " +
                    std::to_string(s.gap()) + " GHz)");
}

}  // namespace

double first_order_shift(const SpectrumResult& chain_spectrum,
                         int adjacent_site, int n_chain_sites,
                         double epsilon_q, double j_qc) {
  require_nondegenerate_ground(chain_spectrum);
  const double sz =
      sz_expectation(chain_spectrum.ground(), adjacent_site, n_chain_sites);
  return epsilon_q + j_qc * sz;
}

EffectiveCoupling effective_coupling(const ChainSpec& spec, double j_q1c1,
                                     double j_q2c7, int site_a, int site_b) {
  const int n = spec.n_sites();
  if (site_b < 0) site_b = n - 1;
  if (site_a < 0 || site_a >= n || site_b >= n)
    throw_numerical("effective_coupling: attachment site out of range");

  const SpectrumResult s = diagonalize_chain(spec);
  require_nondegenerate_ground(s);

  const Eigen::VectorXd me_a = sz_matrix_elements_with_ground(s, site_a, n);
  const Eigen::VectorXd me_b = sz_matrix_elements_with_ground(s, site_b, n);

  double sum = 0.0;
  for (int m = 1; m < s.n_levels(); ++m) {
    const double w = s.energies[m] - s.energies[0];
    const double product = me_a[m] * me_b[m];
    if (w < 1e-9) {
      if (std::abs(product) > 1e-12)
        throw_numerical(
            "j_eff_second_order_sum: near-degenerate excited state with "
            "nonzero matrix element (w = " +
            std::to_string(w) + " GHz)");
      continue;
    }
    sum += product / w;
  }

  EffectiveCoupling out;
  out.omega_c = s.gap();
  out.correlator_part = connected_correlator(s, site_a, site_b, n);
  // The cross term of second-order perturbation theory counts both
  // orderings of the two attachment operators, hence the factor 2.  This
  // normalization reproduces the frozen-spin ground-energy differences
  // and the exact two-qubit splitting in the static limit.
  out.j_eff_exact_sum = -2.0 * j_q1c1 * j_q2c7 * sum;
  out.j_eff_gap_approx =
      2.0 * (j_q1c1 * j_q2c7 / out.omega_c) * out.correlator_part;
  return out;
}

double j_eff_second_order_sum(const ChainSpec& spec, double j_q1c1,
                              double j_q2c7, int site_a, int site_b) {
  return effective_coupling(spec, j_q1c1, j_q2c7, site_a, site_b)
      .j_eff_exact_sum;
}

double j_eff_gap_approx(const ChainSpec& spec, double j_q1c1, double j_q2c7,
                        int site_a, int site_b) {
  return effective_coupling(spec, j_q1c1, j_q2c7, site_a, site_b)
      .j_eff_gap_approx;
}

}  // namespace spinbus
