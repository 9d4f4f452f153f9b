#include "spinbus/spin_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spinbus/error.hpp"
#include "spinbus/parallel.hpp"

namespace spinbus {

std::string SpinSite::label() const {
  return (role == SiteRole::qubit ? "q" : "c") + std::to_string(index);
}

void CouplingGraph::validate(int n_sites) const {
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (e.a < 0 || e.a >= n_sites || e.b < 0 || e.b >= n_sites)
      throw_config("coupling edge (" + std::to_string(e.a) + "," +
                   std::to_string(e.b) + ") out of range");
    if (e.a == e.b)
      throw_config("self-edge on site " + std::to_string(e.a));
    auto key = std::minmax(e.a, e.b);
    if (!seen.insert(key).second)
      throw_config("duplicate edge (" + std::to_string(key.first) + "," +
                   std::to_string(key.second) + ")");
    if (!std::isfinite(e.j))
      throw_config("non-finite coupling strength");
  }
}

void ChainSpec::validate() const {
  if (sites.empty()) throw_config("chain has no sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& s = sites[i];
    if (!std::isfinite(s.epsilon))
      throw_config("site " + std::to_string(i) + ": epsilon not finite");
    if (!(s.delta >= 0.0) || !std::isfinite(s.delta))
      throw_config("site " + std::to_string(i) +
                   ": delta must be finite and >= 0 (sign convention is "
                   "fixed, negative transverse fields are rejected)");
  }
  couplings.validate(n_sites());
}

ChainSpec ChainSpec::homogeneous_chain(int n, double eps_c, double delta_c,
                                       double j_cc) {
  ChainSpec spec;
  for (int i = 0; i < n; ++i)
    spec.sites.push_back({eps_c, delta_c, SiteRole::coupler, i + 1});
  for (int i = 0; i + 1 < n; ++i)
    spec.couplings.edges.push_back({i, i + 1, j_cc});
  spec.validate();
  return spec;
}

ChainSpec ChainSpec::device_chain(double delta_q1, double delta_q2,
                                  double delta_c, double j_cc, double j_q1c1,
                                  double j_q2c7, int n_couplers) {
  ChainSpec spec;
  spec.sites.push_back({0.0, delta_q1, SiteRole::qubit, 1});
  for (int i = 0; i < n_couplers; ++i)
    spec.sites.push_back({0.0, delta_c, SiteRole::coupler, i + 1});
  spec.sites.push_back({0.0, delta_q2, SiteRole::qubit, 2});

  spec.couplings.edges.push_back({0, 1, j_q1c1});
  for (int i = 1; i < n_couplers; ++i)
    spec.couplings.edges.push_back({i, i + 1, j_cc});
  spec.couplings.edges.push_back({n_couplers, n_couplers + 1, j_q2c7});
  spec.validate();
  return spec;
}

namespace {

struct ColumnKernel {
  const ChainSpec& spec;
  int n;

  // Diagonal entry of column `state` plus the sx flip targets.
  double diagonal(std::int64_t state) const {
    double d = 0.0;
    for (int i = 0; i < n; ++i)
      d += 0.5 * spec.sites[i].epsilon * spec.sz_value(state, i);
    for (const auto& e : spec.couplings.edges)
      d += e.j * spec.sz_value(state, e.a) * spec.sz_value(state, e.b);
    return d;
  }
};

template <typename Loop>
Eigen::MatrixXd build_dense(const ChainSpec& spec, int site_cap, Loop&& loop) {
  spec.validate();
  const int n = spec.n_sites();
  if (n > site_cap)
    throw_config("chain of " + std::to_string(n) +
                 " sites exceeds the dense cap of " + std::to_string(site_cap));
  const std::int64_t dim = spec.dimension();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  ColumnKernel kernel{spec, n};
  loop(dim, [&](std::int64_t col) {
    h(col, col) = kernel.diagonal(col);
    for (int i = 0; i < n; ++i) {
      const std::int64_t row = col ^ (std::int64_t{1} << (n - 1 - i));
      // Each (row, col) pair is written exactly once per sx_i term, so
      // the matrix is bitwise symmetric by construction.
      h(row, col) += 0.5 * spec.sites[i].delta;
    }
  });
  return h;
}

}  // namespace

Eigen::MatrixXd build_hamiltonian(const ChainSpec& spec, int site_cap) {
  return build_dense(spec, site_cap,
                     [](std::int64_t n, auto&& body) { parallel_for(n, body); });
}

Eigen::MatrixXd build_hamiltonian_serial(const ChainSpec& spec, int site_cap) {
  return build_dense(spec, site_cap,
                     [](std::int64_t n, auto&& body) { serial_for(n, body); });
}

namespace {

template <typename Loop>
Eigen::VectorXd apply_impl(const ChainSpec& spec, const Eigen::VectorXd& x,
                           Loop&& loop) {
  const int n = spec.n_sites();
  const std::int64_t dim = spec.dimension();
  if (x.size() != dim) throw_config("state dimension mismatch in apply");
  Eigen::VectorXd y(dim);
  ColumnKernel kernel{spec, n};
  loop(dim, [&](std::int64_t row) {
    double acc = kernel.diagonal(row) * x[row];
    for (int i = 0; i < n; ++i) {
      const std::int64_t src = row ^ (std::int64_t{1} << (n - 1 - i));
      acc += 0.5 * spec.sites[i].delta * x[src];
    }
    y[row] = acc;
  });
  return y;
}

}  // namespace

Eigen::VectorXd apply_hamiltonian(const ChainSpec& spec,
                                  const Eigen::VectorXd& x) {
  return apply_impl(spec, x,
                    [](std::int64_t n, auto&& body) { parallel_for(n, body); });
}

Eigen::VectorXd apply_hamiltonian_serial(const ChainSpec& spec,
                                         const Eigen::VectorXd& x) {
  return apply_impl(spec, x,
                    [](std::int64_t n, auto&& body) { serial_for(n, body); });
}

SparseHamiltonian build_hamiltonian_sparse(const ChainSpec& spec) {
  spec.validate();
  const int n = spec.n_sites();
  SparseHamiltonian out;
  out.dimension = spec.dimension();
  out.triplets.reserve(static_cast<std::size_t>(out.dimension) * (n + 1));
  ColumnKernel kernel{spec, n};
  for (std::int64_t col = 0; col < out.dimension; ++col) {
    const double d = kernel.diagonal(col);
    if (d != 0.0) out.triplets.emplace_back(col, col, d);
    for (int i = 0; i < n; ++i) {
      if (spec.sites[i].delta == 0.0) continue;
      const std::int64_t row = col ^ (std::int64_t{1} << (n - 1 - i));
      out.triplets.emplace_back(row, col, 0.5 * spec.sites[i].delta);
    }
  }
  return out;
}

Eigen::Matrix2cd pauli_matrix(PauliAxis axis) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (axis) {
    case PauliAxis::x:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case PauliAxis::y:
      m(0, 1) = -1.0i;
      m(1, 0) = 1.0i;
      break;
    case PauliAxis::z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
  }
  return m;
}

Eigen::MatrixXcd embed_pauli(int site, PauliAxis axis, int n_sites) {
  // Dense embedding is for tests and small operators; the bit kernels
  // above cover larger registers.
  if (n_sites < 1 || n_sites > 10)
    throw_config("embed_pauli: n_sites must be in [1, 10]");
  if (site < 0 || site >= n_sites)
    throw_config("embed_pauli: site index out of range");
  const Eigen::Matrix2cd sigma = pauli_matrix(axis);
  const Eigen::Matrix2cd ident = Eigen::Matrix2cd::Identity();
  // Site 0 is the outermost (most significant) Kronecker factor.
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < n_sites; ++i) {
    const Eigen::Matrix2cd& factor = (i == site) ? sigma : ident;
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c)
        next.block(r * 2, c * 2, 2, 2) = out(r, c) * factor;
    out.swap(next);
  }
  return out;
}

}  // namespace spinbus
