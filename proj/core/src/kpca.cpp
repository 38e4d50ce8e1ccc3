#include "kgcn/kpca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kgcn {

namespace {

double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * m(i, j);
  }
  return std::sqrt(acc);
}

double offdiag_norm(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) acc += m(i, j) * m(i, j);
  }
  return std::sqrt(2.0 * acc);
}

}  // namespace

Matrix center_gram(const Matrix& g) {
  if (g.rows() != g.cols()) {
    throw Error(ErrorKind::Data, "kpca/not-symmetric",
                "gram matrix must be square");
  }
  const std::size_t n = g.rows();
  std::vector<double> row_mean(n, 0.0);
  std::vector<double> col_mean(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row_mean[i] += g(i, j);
      col_mean[j] += g(i, j);
      total += g(i, j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    row_mean[i] /= static_cast<double>(n);
    col_mean[i] /= static_cast<double>(n);
  }
  total /= static_cast<double>(n) * static_cast<double>(n);

  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = g(i, j) - row_mean[i] - col_mean[j] + total;
    }
  }
  return out;
}

std::pair<std::vector<double>, Matrix> sym_eig(const Matrix& s) {
  if (s.rows() != s.cols()) {
    throw Error(ErrorKind::Data, "kpca/not-symmetric",
                "matrix must be square");
  }
  const std::size_t n = s.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(s(i, j) - s(j, i)) > 1e-10) {
        throw Error(ErrorKind::Data, "kpca/not-symmetric",
                    "entries (" + std::to_string(i) + "," +
                        std::to_string(j) + ") differ by " +
                        std::to_string(std::abs(s(i, j) - s(j, i))));
      }
    }
  }

  Matrix a = s;
  // Symmetrize exactly so rotations keep both triangles in sync.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  Matrix v = Matrix::identity(n);
  const double threshold = 1e-12 * frobenius_norm(s);

  for (int sweep = 0; sweep < 100 && offdiag_norm(a) > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) < 1e-300) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        double app = a(p, p);
        double aqq = a(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double sn = t * c;

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          double akp = a(k, p);
          double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(p, k) = a(k, p);
          a(k, q) = sn * akp + c * akq;
          a(q, k) = a(k, q);
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p);
          double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&a](std::size_t x,
                                                    std::size_t y) {
    return a(x, x) > a(y, y);
  });

  std::vector<double> vals(n);
  Matrix vecs(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    vals[col] = a(order[col], order[col]);
    for (std::size_t row = 0; row < n; ++row) {
      vecs(row, col) = v(row, order[col]);
    }
  }
  return {std::move(vals), std::move(vecs)};
}

Matrix subsample_rows(const Matrix& x, std::size_t max_rows,
                      std::uint64_t seed) {
  if (max_rows < 1) {
    throw Error(ErrorKind::Data, "kpca/bad-spec", "max_rows must be >= 1");
  }
  if (x.rows() <= max_rows) return x;
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(max_rows);
  std::sort(idx.begin(), idx.end());
  Matrix out(max_rows, x.cols());
  for (std::size_t i = 0; i < max_rows; ++i) {
    for (std::size_t d = 0; d < x.cols(); ++d) out(i, d) = x(idx[i], d);
  }
  return out;
}

KpcaProjector kpca_fit(const KernelSpec& spec, const Matrix& x,
                       std::size_t h) {
  spec.validate();
  x.ensure_finite("kpca input");
  if (h < 1) {
    throw Error(ErrorKind::Data, "kpca/bad-spec",
                "requested dimension must be >= 1");
  }
  const std::size_t n = x.rows();
  const std::size_t dim = x.cols();
  if (n < 2) {
    throw Error(ErrorKind::Data, "kpca/bad-spec",
                "need at least 2 anchor points, got " + std::to_string(n));
  }

  if (spec.kind == KernelKind::Linear && h > dim) {
    throw Error(ErrorKind::Numeric, "kpca/overdim",
                "linear kernel supports at most " + std::to_string(dim) +
                    " dimensions, requested " + std::to_string(h));
  }
  if (spec.kind == KernelKind::Polynomial) {
    double cap = std::pow(static_cast<double>(dim), spec.p);
    if (cap < 9e18 && static_cast<double>(h) > cap) {
      throw Error(ErrorKind::Numeric, "kpca/overdim",
                  "polynomial kernel of degree " + std::to_string(spec.p) +
                      " supports at most " + std::to_string(cap) +
                      " dimensions, requested " + std::to_string(h));
    }
  }

  Matrix g = gram(spec, x, x);
  Matrix gc = center_gram(g);
  auto [vals, vecs] = sym_eig(gc);

  double lambda_max = vals.empty() ? 0.0 : vals[0];
  double floor = 1e-10 * lambda_max;
  std::size_t positive = 0;
  while (positive < vals.size() && vals[positive] > floor &&
         vals[positive] > 0.0) {
    ++positive;
  }
  if (h > positive) {
    throw Error(ErrorKind::Numeric, "kpca/overdim",
                "centered gram has " + std::to_string(positive) +
                    " usable dimensions, requested " + std::to_string(h));
  }

  KpcaProjector proj;
  proj.spec = spec;
  proj.anchors = x;
  proj.gram_col_mean.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      proj.gram_col_mean[j] += g(i, j);
      total += g(i, j);
    }
  }
  for (double& m : proj.gram_col_mean) m /= static_cast<double>(n);
  proj.gram_total_mean = total / (static_cast<double>(n) *
                                  static_cast<double>(n));

  proj.axes = Matrix(n, h);
  proj.eigvals.assign(vals.begin(), vals.begin() + static_cast<long>(h));
  for (std::size_t col = 0; col < h; ++col) {
    double scale = 1.0 / std::sqrt(vals[col]);
    for (std::size_t row = 0; row < n; ++row) {
      proj.axes(row, col) = vecs(row, col) * scale;
    }
  }
  return proj;
}

std::vector<double> kpca_project(const KpcaProjector& proj,
                                 std::span<const double> x) {
  const std::size_t n = proj.anchors.rows();
  if (x.size() != proj.anchors.cols()) {
    throw Error(ErrorKind::Data, "kpca/dim-mismatch",
                "signal of length " + std::to_string(x.size()) +
                    " against anchors of dimension " +
                    std::to_string(proj.anchors.cols()));
  }
  std::vector<double> k(n);
  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    k[j] = kernel_eval(proj.spec, x, proj.anchors.row(j));
    mean += k[j];
  }
  mean /= static_cast<double>(n);

  std::vector<double> out(proj.axes.cols(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double centered = k[j] - mean - proj.gram_col_mean[j] +
                      proj.gram_total_mean;
    for (std::size_t hcol = 0; hcol < out.size(); ++hcol) {
      out[hcol] += centered * proj.axes(j, hcol);
    }
  }
  return out;
}

Matrix kpca_project_all(const KpcaProjector& proj, const Matrix& x) {
  Matrix out(x.rows(), proj.axes.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<double> row = kpca_project(proj, x.row(i));
    for (std::size_t hcol = 0; hcol < row.size(); ++hcol) {
      out(i, hcol) = row[hcol];
    }
  }
  return out;
}

}  // namespace kgcn
