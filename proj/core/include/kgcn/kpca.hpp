#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "kgcn/kernels.hpp"
#include "kgcn/numcore.hpp"

namespace kgcn {

/// Kernel PCA projector fitted on training node signals (the anchors).
/// axes column h is the Gram eigenvector v_h scaled by 1/sqrt(lambda_h), so
/// projections of the anchors reproduce the centered Gram.
struct KpcaProjector {
  KernelSpec spec;
  Matrix anchors;
  std::vector<double> gram_col_mean;
  double gram_total_mean = 0.0;
  Matrix axes;
  std::vector<double> eigvals;

  std::size_t input_dim() const { return anchors.cols(); }
  std::size_t output_dim() const { return axes.cols(); }
};

/// Double centering: G - colmean - rowmean + totalmean. Rows and columns of
/// the result sum to zero.
Matrix center_gram(const Matrix& g);

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations
/// (off-diagonal norm below 1e-12 of the input norm, at most 100 sweeps).
/// Returns eigenvalues in descending order (ties keep original index order)
/// with matching eigenvector columns.
std::pair<std::vector<double>, Matrix> sym_eig(const Matrix& s);

/// Uniformly subsamples rows when x has more than max_rows of them; row
/// order is preserved. Deterministic given the seed.
Matrix subsample_rows(const Matrix& x, std::size_t max_rows,
                      std::uint64_t seed);

/// Fits a KPCA projector with H output dimensions. H must not exceed the
/// positive spectrum of the centered Gram, nor D for the linear kernel,
/// nor D^p for the polynomial kernel ("kpca/overdim" otherwise).
KpcaProjector kpca_fit(const KernelSpec& spec, const Matrix& x,
                       std::size_t h);

/// Projects one signal: kernel row against the anchors, centered with the
/// stored training statistics, times the axes.
std::vector<double> kpca_project(const KpcaProjector& proj,
                                 std::span<const double> x);

/// Row-wise kpca_project.
Matrix kpca_project_all(const KpcaProjector& proj, const Matrix& x);

}  // namespace kgcn
