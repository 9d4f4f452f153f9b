// Benchmark comparing the serial reference kernels against the
// OpenMP-parallel ones: dense Hamiltonian assembly, matrix-free H*v and a
// susceptibility-style sweep of independent diagonalizations.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "spinbus/eigensolver.hpp"
#include "spinbus/experiments.hpp"
#include "spinbus/parallel.hpp"
#include "spinbus/spin_model.hpp"

using namespace spinbus;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.4f s %10.4f s %8.2fx\n", name, serial, parallel,
              serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const bool smoke = argc > 1 && std::strcmp(argv[1], "--smoke") == 0;
  const int n_build = smoke ? 8 : 13;
  const int n_sweep = smoke ? 8 : 41;
  const int reps = smoke ? 1 : 3;

  std::printf("threads available: %d\n", max_threads());
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial", "openmp",
              "speedup");

  const ChainSpec big = ChainSpec::homogeneous_chain(n_build, 0.0, 2.0, 1.0);

  const double t_build_serial =
      time_best_of(reps, [&] { build_hamiltonian_serial(big); });
  const double t_build_parallel =
      time_best_of(reps, [&] { build_hamiltonian(big); });
  report("build_hamiltonian", t_build_serial, t_build_parallel);

  Eigen::VectorXd x = Eigen::VectorXd::Random(big.dimension());
  const double t_apply_serial = time_best_of(
      reps, [&] { for (int i = 0; i < 8; ++i) apply_hamiltonian_serial(big, x); });
  const double t_apply_parallel = time_best_of(
      reps, [&] { for (int i = 0; i < 8; ++i) apply_hamiltonian(big, x); });
  report("apply_hamiltonian (x8)", t_apply_serial, t_apply_parallel);

  // Sweep of independent diagonalizations, the shape every experiment
  // driver reduces to.
  const ChainSpec chain = ChainSpec::homogeneous_chain(7, 0.0, 5.0, 2.5);
  std::vector<double> gaps(n_sweep);
  auto sweep = [&](auto&& loop) {
    loop(n_sweep, [&](std::int64_t i) {
      ChainSpec work = chain;
      work.sites[6].epsilon = -2.0 + 4.0 * double(i) / (n_sweep - 1);
      gaps[i] = diagonalize_chain(work, 2).gap();
    });
  };
  const double t_sweep_serial = time_best_of(reps, [&] {
    sweep([](std::int64_t n, auto&& body) { serial_for(n, body); });
  });
  const double t_sweep_parallel = time_best_of(reps, [&] {
    sweep([](std::int64_t n, auto&& body) { parallel_for(n, body); });
  });
  report("diagonalization sweep", t_sweep_serial, t_sweep_parallel);

  // Serial and parallel assemblies must agree bitwise.
  const Eigen::MatrixXd a = build_hamiltonian_serial(big);
  const Eigen::MatrixXd b = build_hamiltonian(big);
  if (a != b) {
    std::printf("MISMATCH between serial and parallel assembly\n");
    return 1;
  }
  std::printf("serial/openmp assembly identical: yes\n");
  return 0;
}
