#include "spinbus/eigensolver.hpp"

#include <cmath>

#include "spinbus/error.hpp"

namespace spinbus {

std::vector<std::pair<int, int>> SpectrumResult::degenerate_blocks(
    double tol) const {
  std::vector<std::pair<int, int>> blocks;
  int begin = 0;
  for (int i = 1; i <= n_levels(); ++i) {
    if (i == n_levels() || energies[i] - energies[i - 1] > tol) {
      if (i - begin > 1) blocks.emplace_back(begin, i);
      begin = i;
    }
  }
  return blocks;
}

bool SpectrumResult::ground_degenerate(double tol) const {
  return n_levels() > 1 && gap() <= tol;
}

SpectrumResult diagonalize(const Eigen::MatrixXd& h, int k) {
  if (h.rows() != h.cols()) throw_numerical("diagonalize: matrix not square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw_numerical("diagonalize: input is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw_numerical("diagonalize: eigensolver failed to converge");

  const int dim = static_cast<int>(h.rows());
  const int keep = (k <= 0 || k > dim) ? dim : k;

  SpectrumResult out;
  out.dimension = dim;
  out.energies = solver.eigenvalues().head(keep);
  out.states = solver.eigenvectors().leftCols(keep);
  out.h_norm = std::max(std::abs(solver.eigenvalues()[0]),
                        std::abs(solver.eigenvalues()[dim - 1]));

  // Reproducible sign convention: largest-|component| entry positive.
  for (int j = 0; j < keep; ++j) {
    Eigen::Index imax;
    out.states.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.states(imax, j) < 0.0) out.states.col(j) *= -1.0;
  }

  out.residual_norms.resize(keep);
  const Eigen::MatrixXd hv = h * out.states;
  for (int j = 0; j < keep; ++j)
    out.residual_norms[j] =
        (hv.col(j) - out.energies[j] * out.states.col(j)).norm();
  return out;
}

SpectrumResult diagonalize_chain(const ChainSpec& spec, int k) {
  return diagonalize(build_hamiltonian(spec), k);
}

double expectation(const Eigen::VectorXd& state, const Eigen::MatrixXd& op) {
  if (op.rows() != op.cols() || op.rows() != state.size())
    throw_numerical("expectation: dimension mismatch");
  return state.dot(op * state);
}

double sz_expectation(const Eigen::VectorXd& state, int site, int n_sites) {
  if (site < 0 || site >= n_sites)
    throw_numerical("sz_expectation: site out of range");
  const int shift = n_sites - 1 - site;
  double acc = 0.0;
  for (Eigen::Index b = 0; b < state.size(); ++b) {
    const double s = ((b >> shift) & 1) ? -1.0 : 1.0;
    acc += s * state[b] * state[b];
  }
  return acc;
}

double szsz_expectation(const Eigen::VectorXd& state, int site_a, int site_b,
                        int n_sites) {
  if (site_a < 0 || site_a >= n_sites || site_b < 0 || site_b >= n_sites)
    throw_numerical("szsz_expectation: site out of range");
  const int sa = n_sites - 1 - site_a;
  const int sb = n_sites - 1 - site_b;
  double acc = 0.0;
  for (Eigen::Index b = 0; b < state.size(); ++b) {
    const double za = ((b >> sa) & 1) ? -1.0 : 1.0;
    const double zb = ((b >> sb) & 1) ? -1.0 : 1.0;
    acc += za * zb * state[b] * state[b];
  }
  return acc;
}

double sx_expectation(const Eigen::VectorXd& state, int site, int n_sites) {
  if (site < 0 || site >= n_sites)
    throw_numerical("sx_expectation: site out of range");
  const Eigen::Index flip = Eigen::Index{1} << (n_sites - 1 - site);
  double acc = 0.0;
  for (Eigen::Index b = 0; b < state.size(); ++b)
    acc += state[b] * state[b ^ flip];
  return acc;
}

double connected_correlator(const SpectrumResult& spectrum, int site_a,
                            int site_b, int n_sites) {
  const Eigen::VectorXd g = spectrum.ground();
  const double za = sz_expectation(g, site_a, n_sites);
  const double zb = sz_expectation(g, site_b, n_sites);
  const double zz = szsz_expectation(g, site_a, site_b, n_sites);
  return za * zb - zz;
}

GroundStateResult ground_state_lanczos(const ChainSpec& spec,
                                       const Eigen::VectorXd* warm_start,
                                       double residual_tol,
                                       int max_iterations) {
  const Eigen::Index dim = spec.dimension();
  GroundStateResult out;

  Eigen::VectorXd v(dim);
  if (warm_start && warm_start->size() == dim && warm_start->norm() > 0.0) {
    v = warm_start->normalized();
  } else {
    // Deterministic generic start vector.
    for (Eigen::Index i = 0; i < dim; ++i)
      v[i] = 1.0 + 0.3 * std::sin(double(i + 1));
    v.normalize();
  }

  const int max_basis = std::min<Eigen::Index>(dim, max_iterations);
  Eigen::MatrixXd basis(dim, max_basis);
  std::vector<double> alpha, beta;  // beta[k] couples v_k and v_{k+1}
  basis.col(0) = v;

  Eigen::VectorXd w;
  int k = 0;
  for (; k < max_basis; ++k) {
    w = apply_hamiltonian(spec, basis.col(k));
    const double a = basis.col(k).dot(w);
    alpha.push_back(a);

    w -= a * basis.col(k);
    if (k > 0) w -= beta[k - 1] * basis.col(k - 1);
    // Two-pass reorthogonalization keeps the basis clean for the tight
    // tolerances the symmetry-point root finder needs.
    for (int pass = 0; pass < 2; ++pass)
      w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);

    // Ritz data for the current tridiagonal block.
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int i = 0; i <= k; ++i) tri(i, i) = alpha[i];
    for (int i = 0; i < k; ++i) {
      tri(i, i + 1) = beta[i];
      tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri_solver(tri);
    const double b_next = w.norm();
    const double residual_estimate =
        b_next * std::abs(tri_solver.eigenvectors()(k, 0));
    const double scale =
        std::max(1.0, std::abs(tri_solver.eigenvalues()[0]));

    if (residual_estimate <= residual_tol * scale || b_next < 1e-14 ||
        k + 1 == max_basis) {
      out.energy = tri_solver.eigenvalues()[0];
      out.gap_estimate = (k > 0)
                             ? tri_solver.eigenvalues()[1] - out.energy
                             : 0.0;
      out.state = basis.leftCols(k + 1) * tri_solver.eigenvectors().col(0);
      out.state.normalize();
      out.iterations = k + 1;
      const double true_residual =
          (apply_hamiltonian(spec, out.state) - out.energy * out.state)
              .norm();
      out.converged = true_residual <= 10.0 * residual_tol * scale;
      return out;
    }
    beta.push_back(b_next);
    basis.col(k + 1) = w / b_next;
  }
  out.iterations = k;
  out.converged = false;
  return out;
}

GroundStateResult ground_state(const ChainSpec& spec, Eigen::VectorXd* warm) {
  GroundStateResult result =
      ground_state_lanczos(spec, warm && warm->size() ? warm : nullptr);
  if (!result.converged) {
    const SpectrumResult dense = diagonalize_chain(spec, 2);
    result.energy = dense.energies[0];
    result.gap_estimate = dense.gap();
    result.state = dense.ground();
    result.converged = true;
  }
  if (warm) *warm = result.state;
  return result;
}

double hellmann_feynman_derivative(const ChainSpec& spec, int site,
                                   BiasParameter bias, double gap_tol) {
  if (site < 0 || site >= spec.n_sites())
    throw_numerical("hellmann_feynman_derivative: site out of range");
  const SpectrumResult spectrum = diagonalize_chain(spec, 2);
  if (spectrum.ground_degenerate(gap_tol))
    throw_numerical(
        "hellmann_feynman_derivative: ground state degenerate (gap " +
        std::to_string(spectrum.gap()) + " GHz)");
  const Eigen::VectorXd g = spectrum.ground();
  // dH/d eps_i = sz_i / 2, dH/d delta_i = sx_i / 2.
  if (bias == BiasParameter::epsilon)
    return 0.5 * sz_expectation(g, site, spec.n_sites());
  return 0.5 * sx_expectation(g, site, spec.n_sites());
}

}  // namespace spinbus
