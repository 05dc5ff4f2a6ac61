#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>

#include "fdrum/laplace.hpp"

namespace fdrum {

namespace {

// Orthogonalizes x against the first `used` columns of basis (twice) and
// normalizes it. Returns false when x lies numerically in their span.
bool orthonormalize_against(const Eigen::MatrixXd& basis, Eigen::Index used, Eigen::VectorXd& x) {
  const double before = x.norm();
  if (before == 0.0) return false;
  for (int pass = 0; pass < 2; ++pass) {
    if (used > 0) x -= basis.leftCols(used) * (basis.leftCols(used).transpose() * x);
  }
  const double after = x.norm();
  if (after < 1e-10 * before) return false;
  x /= after;
  return true;
}

}  // namespace

RawSpectrum partial_spectrum(const SparseSymMatrix& m, Eigen::Index k,
                             const PartialSpectrumOptions& opts) {
  const Eigen::Index n = m.order();
  if (k < 1 || k >= n)
    throw ArgumentError("partial_spectrum: need 1 <= k < order (k=" + std::to_string(k) +
                        ", order=" + std::to_string(n) + ")");
  if (opts.block_size < 1) throw ArgumentError("partial_spectrum: block_size must be >= 1");

  // -L is symmetric positive definite for a Dirichlet Laplacian.
  const Eigen::SparseMatrix<double> spd = -m.matrix;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(spd);
  if (factor.info() != Eigen::Success)
    throw ConvergenceError("partial_spectrum: factorization of -L failed", 0.0);

  const Eigen::Index block = std::min<Eigen::Index>(opts.block_size, n);
  const Eigen::Index max_basis =
      opts.max_basis > 0 ? std::min(opts.max_basis, n) : std::min<Eigen::Index>(n, 20 * k + 200);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  };

  Eigen::MatrixXd basis(n, max_basis);
  Eigen::MatrixXd image(n, max_basis);  // (-L)^-1 applied to basis columns
  Eigen::Index used = 0;

  auto append = [&](Eigen::VectorXd x) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (orthonormalize_against(basis, used, x)) {
        basis.col(used) = x;
        image.col(used) = factor.solve(x);
        ++used;
        return;
      }
      x = random_vector();
    }
    throw ConvergenceError("partial_spectrum: cannot extend Krylov basis", 0.0);
  };

  for (Eigen::Index j = 0; j < block && used < max_basis; ++j) append(random_vector());

  Eigen::VectorXd theta;
  Eigen::MatrixXd ritz_coeffs;
  double worst = 0.0;
  Eigen::Index block_start = 0;
  while (true) {
    const Eigen::MatrixXd projected =
        basis.leftCols(used).transpose() * image.leftCols(used);
    const Eigen::MatrixXd sym = 0.5 * (projected + projected.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    // Largest theta of the inverse are the smallest |lambda|.
    theta = es.eigenvalues().reverse();
    ritz_coeffs = es.eigenvectors().rowwise().reverse();

    worst = 0.0;
    if (used >= k) {
      for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::VectorXd s = ritz_coeffs.col(i);
        const Eigen::VectorXd r =
            image.leftCols(used) * s - theta(i) * (basis.leftCols(used) * s);
        worst = std::max(worst, r.norm() / std::abs(theta(i)));
      }
      if (worst <= opts.tol || used == n) break;
    }
    if (used >= max_basis)
      throw ConvergenceError("partial_spectrum: no convergence within basis of " +
                                 std::to_string(max_basis) + " vectors; worst relative residual " +
                                 std::to_string(worst),
                             worst);

    const Eigen::Index block_end = used;
    for (Eigen::Index j = block_start; j < block_end && used < max_basis; ++j)
      append(image.col(j));
    block_start = block_end;
  }

  RawSpectrum out;
  out.values.resize(k);
  Eigen::MatrixXd vectors = basis.leftCols(used) * ritz_coeffs.leftCols(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    vectors.col(i).normalize();
    // Rayleigh quotient against L itself.
    out.values(i) = vectors.col(i).dot(m.matrix * vectors.col(i));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(out.values(a)) < std::abs(out.values(b));
  });
  Eigen::VectorXd sorted(k);
  Eigen::MatrixXd sorted_vectors(n, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    sorted(i) = out.values(order[static_cast<std::size_t>(i)]);
    sorted_vectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  }
  out.values = sorted;
  if (opts.want_vectors) out.vectors = std::move(sorted_vectors);
  return out;
}

}  // namespace fdrum
