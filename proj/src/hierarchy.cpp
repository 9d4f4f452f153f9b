#include "spinbus/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spinbus/error.hpp"
#include "spinbus/parallel.hpp"

namespace spinbus {

void GroupingPlan::validate(const ChainSpec& spec) const {
  if (group_sizes.empty() || group_sizes.size() != kept_levels.size())
    throw_config("grouping plan: sizes and kept levels must align");
  int total = 0;
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    const int size = group_sizes[g];
    const int k = kept_levels[g];
    if (size < 1) throw_config("grouping plan: empty group");
    if (k < 1 || k > (1 << size))
      throw_config("grouping plan: kept levels out of range for group " +
                   std::to_string(g));
    total += size;
  }
  if (total != spec.n_sites())
    throw_config("grouping plan: groups must cover all sites exactly once");
}

std::int64_t GroupingPlan::composite_dimension() const {
  std::int64_t dim = 1;
  for (int k : kept_levels) dim *= k;
  return dim;
}

std::vector<int> GroupingPlan::group_offsets() const {
  std::vector<int> offsets(group_sizes.size());
  int acc = 0;
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    offsets[g] = acc;
    acc += group_sizes[g];
  }
  return offsets;
}

GroupingPlan GroupingPlan::device_plan(int n_couplers, int k) {
  if (n_couplers < 3) throw_config("device plan needs at least 3 couplers");
  GroupingPlan plan;
  const int pair = 2;
  const int mid = n_couplers - 2 * pair;
  plan.group_sizes = {1, pair, mid, pair, 1};
  plan.kept_levels = {2, std::min(k, 1 << pair), std::min(k, 1 << mid),
                      std::min(k, 1 << pair), 2};
  return plan;
}

GroupReduction group_reduce(const ChainSpec& spec, const GroupingPlan& plan) {
  spec.validate();
  plan.validate(spec);

  const auto offsets = plan.group_offsets();
  const int n_groups = plan.n_groups();

  GroupReduction out;
  out.plan = plan;
  out.energies.resize(n_groups);
  out.basis.resize(n_groups);
  out.sz_projected.resize(n_groups);

  parallel_for(n_groups, [&](std::int64_t g) {
    const int begin = offsets[g];
    const int size = plan.group_sizes[g];
    const int k = plan.kept_levels[g];

    ChainSpec sub;
    sub.sites.assign(spec.sites.begin() + begin,
                     spec.sites.begin() + begin + size);
    for (const auto& e : spec.couplings.edges) {
      const bool a_in = e.a >= begin && e.a < begin + size;
      const bool b_in = e.b >= begin && e.b < begin + size;
      if (a_in && b_in)
        sub.couplings.edges.push_back({e.a - begin, e.b - begin, e.j});
    }

    const SpectrumResult s = diagonalize_chain(sub, k);
    out.energies[g] = s.energies;
    out.basis[g] = s.states;

    // sz of each local site projected into the kept basis: P^T D_s P with
    // D_s the diagonal of sz eigenvalues.
    out.sz_projected[g].resize(size);
    const std::int64_t dim = sub.dimension();
    for (int local = 0; local < size; ++local) {
      Eigen::MatrixXd scaled = s.states;
      const int shift = size - 1 - local;
      for (std::int64_t b = 0; b < dim; ++b)
        if ((b >> shift) & 1) scaled.row(b) *= -1.0;
      out.sz_projected[g][local] = s.states.transpose() * scaled;
    }
  });
  return out;
}

namespace {

// kron chain over groups; factors default to identity(k_g).
Eigen::MatrixXd kron_embed(const GroupingPlan& plan,
                           const std::vector<const Eigen::MatrixXd*>& factor) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
  for (int g = 0; g < plan.n_groups(); ++g) {
    const int k = plan.kept_levels[g];
    Eigen::MatrixXd m;
    if (factor[g] != nullptr)
      m = *factor[g];
    else
      m = Eigen::MatrixXd::Identity(k, k);
    Eigen::MatrixXd next(out.rows() * m.rows(), out.cols() * m.cols());
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c)
        next.block(r * m.rows(), c * m.cols(), m.rows(), m.cols()) =
            out(r, c) * m;
    out.swap(next);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd assemble_composite(const ChainSpec& spec,
                                   const GroupReduction& reduction) {
  const GroupingPlan& plan = reduction.plan;
  const auto offsets = plan.group_offsets();
  const int n_groups = plan.n_groups();

  auto group_of = [&](int site) {
    for (int g = n_groups - 1; g >= 0; --g)
      if (site >= offsets[g]) return g;
    throw_numerical("assemble_composite: site outside any group");
  };

  const std::int64_t dim = plan.composite_dimension();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);

  std::vector<const Eigen::MatrixXd*> factor(n_groups, nullptr);
  for (int g = 0; g < n_groups; ++g) {
    const Eigen::MatrixXd diag =
        Eigen::MatrixXd(reduction.energies[g].asDiagonal());
    factor.assign(n_groups, nullptr);
    factor[g] = &diag;
    h += kron_embed(plan, factor);
  }

  for (const auto& e : spec.couplings.edges) {
    const int ga = group_of(e.a);
    const int gb = group_of(e.b);
    if (ga == gb) continue;  // already inside the group spectra
    const Eigen::MatrixXd& sza = reduction.sz_projected[ga][e.a - offsets[ga]];
    const Eigen::MatrixXd& szb = reduction.sz_projected[gb][e.b - offsets[gb]];
    if (sza.rows() != plan.kept_levels[ga] ||
        szb.rows() != plan.kept_levels[gb])
      throw_numerical("assemble_composite: mismatched projected bases");
    factor.assign(n_groups, nullptr);
    factor[ga] = &sza;
    factor[gb] = &szb;
    h += e.j * kron_embed(plan, factor);
  }
  return 0.5 * (h + h.transpose());
}

SpectrumResult hierarchical_spectrum(const ChainSpec& spec,
                                     const GroupingPlan& plan) {
  const GroupReduction reduction = group_reduce(spec, plan);
  return diagonalize(assemble_composite(spec, reduction));
}

ConvergenceTable convergence_sweep(const ChainSpec& spec,
                                   const std::vector<int>& k_ladder,
                                   int compare_levels, double tol_ghz) {
  int n_couplers = 0;
  for (const auto& s : spec.sites)
    if (s.role == SiteRole::coupler) ++n_couplers;
  if (n_couplers + 2 != spec.n_sites())
    throw_config("convergence_sweep expects the qubit-chain-qubit layout");

  const SpectrumResult exact = diagonalize_chain(spec);

  ConvergenceTable table;
  for (int k : k_ladder) {
    const GroupingPlan plan = GroupingPlan::device_plan(n_couplers, k);
    const SpectrumResult approx = hierarchical_spectrum(spec, plan);

    ConvergenceRow row;
    row.k = k;
    row.composite_dim = plan.composite_dimension();
    const int m = std::min<int>(
        {compare_levels, approx.n_levels(), exact.n_levels()});
    double max_err = 0.0;
    for (int i = 0; i < m; ++i)
      max_err = std::max(max_err,
                         std::abs(approx.energies[i] - exact.energies[i]));
    row.max_abs_error_ghz = max_err;
    row.ground_error_ghz = approx.energies[0] - exact.energies[0];
    row.variational_ok = row.ground_error_ghz >= -1e-10;
    row.meets_tolerance = max_err <= tol_ghz;
    if (row.meets_tolerance && table.smallest_converged_k < 0)
      table.smallest_converged_k = k;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace spinbus
