#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "spinbus/spin_model.hpp"

namespace spinbus {

/// Levels closer than this are treated as one degenerate block.
inline constexpr double degeneracy_tol_ghz = 1e-9;

/// Eigenvalues, eigenvectors and residual metadata of a diagonalized
/// real-symmetric Hamiltonian.  Energies ascend; eigenvector signs are
/// fixed by making the largest-magnitude component positive.
struct SpectrumResult {
  Eigen::VectorXd energies;       // GHz, nondecreasing
  Eigen::MatrixXd states;         // orthonormal columns
  Eigen::Index dimension = 0;     // of the underlying Hilbert space
  Eigen::VectorXd residual_norms; // ||H v - E v|| per kept pair
  double h_norm = 0.0;            // operator 2-norm estimate (max |E|)

  int n_levels() const { return static_cast<int>(energies.size()); }
  Eigen::VectorXd ground() const { return states.col(0); }
  double gap() const { return energies[1] - energies[0]; }

  /// Maximal blocks of consecutive levels spaced below `tol`.
  std::vector<std::pair<int, int>> degenerate_blocks(
      double tol = degeneracy_tol_ghz) const;
  bool ground_degenerate(double tol = degeneracy_tol_ghz) const;
};

/// Dense symmetric eigendecomposition; keeps the lowest k levels
/// (k <= 0 keeps all).  Errors on non-symmetric input.
SpectrumResult diagonalize(const Eigen::MatrixXd& h, int k = 0);

/// Convenience: build + diagonalize a chain spec.
SpectrumResult diagonalize_chain(const ChainSpec& spec, int k = 0);

/// <state|op|state> for a real symmetric operator.
double expectation(const Eigen::VectorXd& state, const Eigen::MatrixXd& op);

/// Fast diagonal-operator paths (no matrix build).
double sz_expectation(const Eigen::VectorXd& state, int site, int n_sites);
double szsz_expectation(const Eigen::VectorXd& state, int site_a, int site_b,
                        int n_sites);
double sx_expectation(const Eigen::VectorXd& state, int site, int n_sites);

/// The parenthesised quantity of the gap-approximation coupling formula:
/// <sz_a><sz_b> - <sz_a sz_b> on the ground state.
double connected_correlator(const SpectrumResult& spectrum, int site_a,
                            int site_b, int n_sites);

/// Ground state via Lanczos on the matrix-free kernel, with full
/// reorthogonalization and an explicit residual check.  Intended as the
/// fast path for bias sweeps; diagonalize() remains the dense reference.
struct GroundStateResult {
  double energy = 0.0;
  double gap_estimate = 0.0;  // second Ritz value minus the first
  Eigen::VectorXd state;
  int iterations = 0;
  bool converged = false;
};

GroundStateResult ground_state_lanczos(const ChainSpec& spec,
                                       const Eigen::VectorXd* warm_start = nullptr,
                                       double residual_tol = 1e-8,
                                       int max_iterations = 200);

/// Lanczos when it converges, dense otherwise; `warm` is updated with
/// the returned state for the next call of a sweep.
GroundStateResult ground_state(const ChainSpec& spec,
                               Eigen::VectorXd* warm = nullptr);

enum class BiasParameter { epsilon, delta };

/// Ground-state energy derivative dE0/d(bias of `site`) via the
/// Hellmann-Feynman theorem: <g| dH/d bias |g>.  Errors when the ground
/// state is degenerate below `gap_tol`.
double hellmann_feynman_derivative(const ChainSpec& spec, int site,
                                   BiasParameter bias,
                                   double gap_tol = 1e-6);

}  // namespace spinbus
