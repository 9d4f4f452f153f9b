#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spinbus/eigensolver.hpp"
#include "spinbus/spin_model.hpp"

namespace spinbus {

/// Ordered partition of the chain into contiguous groups with a kept
/// level count per group.
struct GroupingPlan {
  std::vector<int> group_sizes;   // contiguous along the chain
  std::vector<int> kept_levels;   // 1 <= k_g <= 2^size_g

  int n_groups() const { return static_cast<int>(group_sizes.size()); }
  void validate(const ChainSpec& spec) const;
  std::int64_t composite_dimension() const;

  /// First site index of each group.
  std::vector<int> group_offsets() const;

  /// The device partition: each qubit its own group, couplers grouped
  /// (1,2), (3,4,5), (6,7); `k` caps the coupler-group kept levels.
  static GroupingPlan device_plan(int n_couplers, int k);
};

/// Per-group eigendata plus sz operators projected into the kept basis.
struct GroupReduction {
  std::vector<Eigen::VectorXd> energies;                // per group, k_g
  std::vector<Eigen::MatrixXd> basis;                   // 2^size_g x k_g
  std::vector<std::vector<Eigen::MatrixXd>> sz_projected;  // [group][local site]
  GroupingPlan plan;
};

/// Diagonalizes each group with intra-group couplings only, keeps the
/// lowest k_g eigenpairs and projects every site's sz into that basis.
GroupReduction group_reduce(const ChainSpec& spec, const GroupingPlan& plan);

/// H_comp = sum_g diag(group energies) + sum_(cross edges) J sz_a sz_b in
/// the reduced product basis (dimension prod k_g).  Group 0 is the most
/// significant factor, matching the chain basis convention.
Eigen::MatrixXd assemble_composite(const ChainSpec& spec,
                                   const GroupReduction& reduction);

/// group_reduce + assemble + diagonalize.
SpectrumResult hierarchical_spectrum(const ChainSpec& spec,
                                     const GroupingPlan& plan);

struct ConvergenceRow {
  int k = 0;
  std::int64_t composite_dim = 0;
  double max_abs_error_ghz = 0.0;  // over the lowest m levels
  double ground_error_ghz = 0.0;   // hierarchical minus exact (>= 0)
  bool variational_ok = false;
  bool meets_tolerance = false;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  int smallest_converged_k = -1;  // -1: tolerance never met
};

/// Error-vs-k table against the exact dense spectrum; plans are
/// device_plan(n_couplers, k) for each k in the ladder.
ConvergenceTable convergence_sweep(const ChainSpec& spec,
                                   const std::vector<int>& k_ladder,
                                   int compare_levels, double tol_ghz);

}  // namespace spinbus
