#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <tuple>
#include <vector>

#include "spinbus/sigmoid_fit.hpp"

namespace spinbus {

/// Lumped-element description of one tunable flux unit (rf-SQUID coupler
/// or the effective single-mode image of a flux qubit).
struct CircuitUnitParams {
  double l_z_ph = 0.0;    // total z-loop geometric inductance, pH
  double c_eff_ff = 0.0;  // effective shunt capacitance, fF
  double i_c_na = 0.0;    // single-junction critical current, nA
  double d = 0.0;         // x-loop junction asymmetry, |d| < 1
  int n_junctions_x = 2;  // 2 for split-junction tunable units

  void validate() const;

  double e_c_ghz() const;   // charging energy e^2/2C
  double e_l_ghz() const;   // inductive energy (Phi0/2pi)^2 / L
  double e_j0_ghz() const;  // single-junction Josephson energy
};

/// External fluxes in units of Phi0.  Values are stored as given; the
/// branch-reduced value (mod 1) and winding number are available for
/// callers that need the physical branch.
struct FluxBias {
  double f_z = 0.5;
  double f_x = 0.0;

  double f_z_reduced() const { return f_z - f_z_branch(); }
  int f_z_branch() const;
};

/// Effective junction energy of the split pair:
/// E_J(f_x) = n E_J0 sqrt(cos^2(pi f_x) + d^2 sin^2(pi f_x)).
double junction_energy_ghz(const CircuitUnitParams& p, double f_x);

/// Phase shift of the effective junction, theta = atan(d tan(pi f_x)),
/// evaluated on the continuous branch.  A nonzero asymmetry moves the
/// unit's z symmetry point by -theta / 2 pi.
double junction_phase_shift(const CircuitUnitParams& p, double f_x);

/// Effective critical current n I_c |cos(pi f_x)| sqrt(1 + d^2 tan^2), nA.
double effective_critical_current_na(const CircuitUnitParams& p, double f_x);

/// beta_c = 2 pi L I_c_eff / Phi0, the Josephson-to-geometric inductance
/// ratio; beta_c ~ 1 marks maximal flux susceptibility.
double beta_c(const CircuitUnitParams& p, double f_x);

/// Eigendecomposition of the displaced phase operator in the harmonic
/// basis, reusable across bias points of the same unit.
struct HarmonicBasis {
  int size = 0;
  double phi_zpf = 0.0;
  double omega_ghz = 0.0;  // bare LC level spacing sqrt(8 Ec El)
  Eigen::MatrixXd phase_eigvecs;
  Eigen::VectorXd phase_eigvals;
};

HarmonicBasis make_harmonic_basis(const CircuitUnitParams& p, int size);

/// Spectrum of the single-mode circuit
///   H = 4 E_C n^2 + E_L (phi - 2 pi f_z)^2 / 2 - E_J(f_x) cos(phi + theta)
/// evaluated in the harmonic basis of the bare LC oscillator.  The current
/// operator is I_z = (Phi - Phi_z^ext) / L_z, reported in nA.
struct CircuitSpectrum {
  Eigen::VectorXd energies_ghz;  // ascending
  Eigen::MatrixXd states;        // columns, harmonic-basis amplitudes
  Eigen::MatrixXd iz_na;         // current operator in the eigenbasis
  int basis_size = 0;
  bool converged = false;  // gap stable under basis doubling

  double e0() const { return energies_ghz[0]; }
  double gap() const { return energies_ghz[1] - energies_ghz[0]; }
  double iz_ground() const { return iz_na(0, 0); }
  double persistent_current_na() const { return std::abs(iz_na(0, 1)); }
};

/// Single evaluation at a fixed basis size (no convergence enforcement).
CircuitSpectrum quantize_unit_fixed(const CircuitUnitParams& p,
                                    const FluxBias& bias, int basis_size);
CircuitSpectrum quantize_unit_fixed(const CircuitUnitParams& p,
                                    const FluxBias& bias,
                                    const HarmonicBasis& basis);

/// Doubles the basis until E1 - E0 is stable to 1e-6 relative, starting
/// from `basis_size` (>= 20); errors if the cap (16x) is reached.
CircuitSpectrum quantize_unit(const CircuitUnitParams& p, const FluxBias& bias,
                              int basis_size = 60);

/// Spin-model character of one unit extracted at fixed f_x.
struct UnitCharacter {
  double delta_ghz = 0.0;           // gap at the z symmetry point
  double persistent_current_na = 0.0;  // |<0|I_z|1>| there
  double f_z_symmetry = 0.5;        // zero crossing of <0|I_z|0>
  double beta_c = 0.0;
  double d_iz_d_fz = 0.0;           // midpoint slope, nA / Phi0
  bool slope_from_sigmoid = false;  // false: local finite difference
  std::vector<double> f_z_grid;
  std::vector<double> iz_curve_na;  // <0|I_z|0> over f_z_grid
  SigmoidFit iz_fit;
};

/// Tabulates <0|I_z|0> over `f_z_grid` (which must bracket the symmetry
/// point), locates the zero crossing, and evaluates delta, I_p and the
/// sigmoid midpoint slope there.
UnitCharacter extract_character(const CircuitUnitParams& p, double f_x,
                                const std::vector<double>& f_z_grid,
                                int basis_size = 60);

/// Uniform grid of n points spanning center +- half_width (Phi0).
std::vector<double> default_fz_grid(double center = 0.5,
                                    double half_width = 0.020, int n = 41);

/// Inductive spin-model coupling J = M I_p,i I_p,j / h in GHz
/// (M in pH, currents in nA).
double spin_coupling_from_circuit(const UnitCharacter& a,
                                  const UnitCharacter& b, double mutual_ph);
double spin_coupling_from_currents(double ip_a_na, double ip_b_na,
                                   double mutual_ph);

/// Longitudinal spin field from a z-flux detuning:
/// eps = 2 I_p Phi0 delta_f_z / h, GHz.  Detunings beyond 0.05 Phi0 are
/// outside the linearisation regime and flagged through `linear_range_ok`.
double flux_to_epsilon(double ip_na, double delta_f_z_phi0,
                       bool* linear_range_ok = nullptr);

/// Inverse of flux_to_epsilon.
double epsilon_to_flux(double ip_na, double epsilon_ghz);

/// d Delta / d f_x by central differences (GHz per Phi0), used for the
/// x-loop flux-noise sensitivity.
double delta_fx_sensitivity(const CircuitUnitParams& p, double f_x,
                            double step = 1e-4, int basis_size = 60);

/// Smallest f_x in [fx_lo, fx_hi] with gap(f_x) = target (the gap is
/// monotone increasing in f_x over the sweep range).
double fx_for_target_delta(const CircuitUnitParams& p, double target_ghz,
                           double fx_lo = 0.01, double fx_hi = 0.45,
                           int basis_size = 60);

/// Two-terminal effective capacitance of an island network: the Schur
/// complement of the node-capacitance Laplacian onto the terminal pair.
/// Edges are (node_i, node_j, C in fF); node indices are arbitrary labels.
double effective_capacitance_ff(int n_nodes,
                                const std::vector<std::tuple<int, int, double>>& edges,
                                int terminal_a, int terminal_b);

/// Circuit parameters of the tabulated coupler design: I_c = 240 nA,
/// L_z = 756 pH, C_eff reduced from the three-island capacitance network.
CircuitUnitParams sm_coupler_params(double d = 0.0);

/// Effective single-mode parameters for the flux qubits.  C_eff comes
/// from the four-island network; L_z and I_c are effective values picked
/// so the single-mode machinery reproduces the qubits' quoted operating
/// transverse fields (2.3 GHz and ~10 MHz) at accessible f_x.
CircuitUnitParams sm_qubit_params(double d = 0.0);

/// Mutual inductances of the tabulated design, pH.
inline constexpr double sm_mutual_cc_ph = 64.2;
inline constexpr double sm_mutual_qc_ph = 62.6;

}  // namespace spinbus
