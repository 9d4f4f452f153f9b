#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace spinbus {

enum class SiteRole { qubit, coupler };

/// One spin-1/2 site of the transverse-field Ising chain.  epsilon and
/// delta are the longitudinal and transverse fields in GHz (h = 1); the
/// Hamiltonian carries epsilon/2 and delta/2.
struct SpinSite {
  double epsilon = 0.0;  // GHz
  double delta = 0.0;    // GHz, >= 0 by convention
  SiteRole role = SiteRole::coupler;
  int index = 0;  // index within its role (q1, q2, c1..c7, ...)

  std::string label() const;
};

struct CouplingEdge {
  int a = 0;
  int b = 0;
  double j = 0.0;  // GHz, J > 0 is antiferromagnetic (+J sz sz)
};

struct CouplingGraph {
  std::vector<CouplingEdge> edges;

  /// Rejects self-edges, duplicate unordered pairs, and out-of-range sites.
  void validate(int n_sites) const;
};

/// Full spin-model description: ordered sites plus the coupling graph.
/// Basis convention: site 0 is the most significant bit of the basis
/// index, and bit value 0 means sz = +1.
struct ChainSpec {
  std::vector<SpinSite> sites;
  CouplingGraph couplings;

  int n_sites() const { return static_cast<int>(sites.size()); }
  std::int64_t dimension() const { return std::int64_t{1} << n_sites(); }

  void validate() const;

  /// sz eigenvalue (+1/-1) of `site` in basis state `state`.
  double sz_value(std::int64_t state, int site) const {
    const int shift = n_sites() - 1 - site;
    return ((state >> shift) & 1) ? -1.0 : 1.0;
  }

  /// Homogeneous coupler-only chain: n sites with common (eps_c, delta_c)
  /// and nearest-neighbour coupling j_cc.
  static ChainSpec homogeneous_chain(int n, double eps_c, double delta_c,
                                     double j_cc);

  /// The 9-site device topology q1-c1-...-c7-q2 (8 edges) with a
  /// homogeneously tuned coupler chain.
  static ChainSpec device_chain(double delta_q1, double delta_q2,
                                double delta_c, double j_cc, double j_q1c1,
                                double j_q2c7, int n_couplers = 7);

  /// Site index of qubit 1 / qubit 2 in device_chain ordering.
  static int q1_site() { return 0; }
  int q2_site() const { return n_sites() - 1; }
};

/// Maximum chain length for the dense builder (2^14 x 2^14 doubles).
inline constexpr int dense_site_cap_default = 14;

/// Dense H = sum_i (eps_i/2 sz_i + delta_i/2 sx_i) + sum_edges J sz sz.
/// OpenMP-parallel over basis columns; bitwise identical to the serial
/// reference.
Eigen::MatrixXd build_hamiltonian(const ChainSpec& spec,
                                  int site_cap = dense_site_cap_default);

/// Serial reference implementation, kept for testing and benchmarking.
Eigen::MatrixXd build_hamiltonian_serial(const ChainSpec& spec,
                                         int site_cap = dense_site_cap_default);

/// Matrix-free y = H x for chains above the dense cap.
Eigen::VectorXd apply_hamiltonian(const ChainSpec& spec,
                                  const Eigen::VectorXd& x);
Eigen::VectorXd apply_hamiltonian_serial(const ChainSpec& spec,
                                         const Eigen::VectorXd& x);

/// Sparse triplet form (row, col, value) for N > dense cap workflows.
struct SparseHamiltonian {
  std::int64_t dimension = 0;
  std::vector<Eigen::Triplet<double>> triplets;
};
SparseHamiltonian build_hamiltonian_sparse(const ChainSpec& spec);

enum class PauliAxis { x, y, z };

/// sigma^axis acting on `site` of an n-site register, identity elsewhere.
/// Intended for tests and small-operator work, n <= 14.
Eigen::MatrixXcd embed_pauli(int site, PauliAxis axis, int n_sites);

/// 2x2 Pauli matrix.
Eigen::Matrix2cd pauli_matrix(PauliAxis axis);

}  // namespace spinbus
