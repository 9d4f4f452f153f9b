#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "spinbus/error.hpp"
#include "spinbus/hierarchy.hpp"

using namespace spinbus;

namespace {

ChainSpec paper_chain(double ratio) {
  const double delta_c = 5.0;
  return ChainSpec::device_chain(2.0, 2.0, delta_c, ratio * delta_c / 2.0,
                                 0.25, 0.25);
}

}  // namespace

TEST_CASE("full-k hierarchy is an exact change of basis") {
  const ChainSpec spec = paper_chain(0.5);
  GroupingPlan plan;
  plan.group_sizes = {1, 2, 3, 2, 1};
  plan.kept_levels = {2, 4, 8, 4, 2};
  CHECK(plan.composite_dimension() == 512);

  const SpectrumResult exact = diagonalize_chain(spec);
  const SpectrumResult approx = hierarchical_spectrum(spec, plan);
  const double scale = std::max(1.0, exact.energies.cwiseAbs().maxCoeff());
  for (int k = 0; k < 512; ++k)
    CHECK(std::abs(approx.energies[k] - exact.energies[k]) <= 1e-8 * scale);
}

TEST_CASE("group reduction keeps the lowest group levels") {
  // Triplet group (c3, c4, c5) of the homogeneous chain at k = 4: kept
  // energies match the lowest 4 of the isolated 8-dim block.
  const ChainSpec sub = ChainSpec::homogeneous_chain(3, 0.0, 2.0, 1.0);
  const SpectrumResult direct = diagonalize_chain(sub);

  GroupingPlan plan;
  plan.group_sizes = {3};
  plan.kept_levels = {4};
  const GroupReduction reduction = group_reduce(sub, plan);
  REQUIRE(reduction.energies[0].size() == 4);
  for (int k = 0; k < 4; ++k)
    CHECK(reduction.energies[0][k] ==
          doctest::Approx(direct.energies[k]).epsilon(1e-12));
}

TEST_CASE("k = 1 everywhere collapses to a mean-field scalar") {
  const ChainSpec spec = paper_chain(0.3);
  GroupingPlan plan;
  plan.group_sizes = {1, 2, 3, 2, 1};
  plan.kept_levels = {1, 1, 1, 1, 1};
  const SpectrumResult s = hierarchical_spectrum(spec, plan);
  CHECK(s.n_levels() == 1);
  // Variational scalar: group ground energies plus projected couplings.
  CHECK(s.energies[0] >= diagonalize_chain(spec, 1).energies[0] - 1e-10);
}

TEST_CASE("no inter-group edges gives sums of group energies") {
  ChainSpec spec = ChainSpec::homogeneous_chain(4, 0.1, 1.5, 0.8);
  spec.couplings.edges.clear();
  spec.couplings.edges.push_back({0, 1, 0.8});
  spec.couplings.edges.push_back({2, 3, 0.8});

  GroupingPlan plan;
  plan.group_sizes = {2, 2};
  plan.kept_levels = {4, 4};
  const SpectrumResult s = hierarchical_spectrum(spec, plan);

  ChainSpec left, right;
  left.sites = {spec.sites[0], spec.sites[1]};
  left.couplings.edges.push_back({0, 1, 0.8});
  right.sites = {spec.sites[2], spec.sites[3]};
  right.couplings.edges.push_back({0, 1, 0.8});
  const auto le = diagonalize_chain(left).energies;
  const auto re = diagonalize_chain(right).energies;
  std::vector<double> sums;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) sums.push_back(le[a] + re[b]);
  std::sort(sums.begin(), sums.end());
  for (int k = 0; k < 16; ++k)
    CHECK(s.energies[k] == doctest::Approx(sums[k]).epsilon(1e-10));
}

TEST_CASE("variational bound holds for every truncation") {
  const ChainSpec spec = paper_chain(0.8);
  const double exact_ground = diagonalize_chain(spec, 1).energies[0];
  for (int k : {1, 2, 3, 4, 6, 8}) {
    const GroupingPlan plan = GroupingPlan::device_plan(7, k);
    const SpectrumResult s = hierarchical_spectrum(spec, plan);
    CHECK(s.energies[0] >= exact_ground - 1e-10);
  }
}

TEST_CASE("permuting the kept basis does not change the spectrum") {
  const ChainSpec spec = paper_chain(0.5);
  const GroupingPlan plan = GroupingPlan::device_plan(7, 4);
  GroupReduction reduction = group_reduce(spec, plan);
  const SpectrumResult before =
      diagonalize(assemble_composite(spec, reduction));

  // Reverse the kept order inside the middle group.
  const int g = 2;
  const int k = plan.kept_levels[g];
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(k);
  for (int i = 0; i < k; ++i) perm.indices()[i] = k - 1 - i;
  reduction.energies[g] = (perm.transpose() * reduction.energies[g]).eval();
  reduction.basis[g] = (reduction.basis[g] * perm).eval();
  for (auto& sz : reduction.sz_projected[g])
    sz = (perm.transpose() * sz * perm).eval();

  const SpectrumResult after =
      diagonalize(assemble_composite(spec, reduction));
  for (int i = 0; i < before.n_levels(); ++i)
    CHECK(after.energies[i] ==
          doctest::Approx(before.energies[i]).epsilon(1e-9));
}

TEST_CASE("convergence sweep reaches the tolerance below full dimension") {
  const ChainSpec spec = paper_chain(0.5);
  const ConvergenceTable table =
      convergence_sweep(spec, {1, 2, 3, 4, 6, 7, 8}, 4, 1e-3);

  // Exact at the full ladder top.
  CHECK(table.rows.back().max_abs_error_ghz <= 1e-8);
  // Some k below the full dimension already meets the tolerance.
  CHECK(table.smallest_converged_k > 0);
  CHECK(table.smallest_converged_k < 8);
  // Weakly monotone error decay (plateaus allowed).
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i)
    CHECK(table.rows[i + 1].max_abs_error_ghz <=
          table.rows[i].max_abs_error_ghz + 1e-9);
  for (const auto& row : table.rows) CHECK(row.variational_ok);
}

TEST_CASE("stronger coupling needs more kept levels") {
  const ConvergenceTable weak =
      convergence_sweep(paper_chain(0.2), {1, 2, 3, 4}, 4, 1e-3);
  const ConvergenceTable strong =
      convergence_sweep(paper_chain(2.0), {1, 2, 3, 4}, 4, 1e-3);
  for (std::size_t i = 0; i < weak.rows.size(); ++i)
    CHECK(strong.rows[i].max_abs_error_ghz >=
          weak.rows[i].max_abs_error_ghz);
  if (weak.smallest_converged_k > 0 && strong.smallest_converged_k > 0)
    CHECK(strong.smallest_converged_k >= weak.smallest_converged_k);
}

TEST_CASE("plan validation") {
  const ChainSpec spec = paper_chain(0.5);
  GroupingPlan bad;
  bad.group_sizes = {4, 4};
  bad.kept_levels = {4, 4};
  CHECK_THROWS_AS(bad.validate(spec), Error);  // does not cover all sites

  bad.group_sizes = {4, 5};
  bad.kept_levels = {32, 4};
  CHECK_THROWS_AS(bad.validate(spec), Error);  // k beyond group dimension

  GroupingPlan ok = GroupingPlan::device_plan(7, 64);
  ok.validate(spec);  // kept levels are clamped to the group dimension
  CHECK(ok.kept_levels[2] == 8);
}
