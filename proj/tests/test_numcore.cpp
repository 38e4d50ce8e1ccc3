#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kgcn/numcore.hpp"

using namespace kgcn;

TEST_CASE("matrix construction and access") {
  Matrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.size() == 6);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(m(i, j) == 0.0);

  m(1, 2) = 4.5;
  CHECK(m(1, 2) == 4.5);
  CHECK(m.row(1)[2] == 4.5);

  Matrix from_data(2, 2, {1, 2, 3, 4});
  CHECK(from_data(0, 1) == 2.0);
  CHECK(from_data(1, 0) == 3.0);

  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("identity") {
  Matrix id = Matrix::identity(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(id(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("matmul against hand computation") {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix b(3, 2, {7, 8, 9, 10, 11, 12});
  Matrix c = matmul(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 2);
  CHECK(c(0, 0) == doctest::Approx(58).epsilon(1e-14));
  CHECK(c(0, 1) == doctest::Approx(64).epsilon(1e-14));
  CHECK(c(1, 0) == doctest::Approx(139).epsilon(1e-14));
  CHECK(c(1, 1) == doctest::Approx(154).epsilon(1e-14));

  Matrix id = Matrix::identity(3);
  CHECK(matmul(a, id) == a);

  Matrix wrong(2, 2);
  CHECK_THROWS_AS(matmul(a, wrong), Error);
}

TEST_CASE("transpose") {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix t = transpose(a);
  CHECK(t.rows() == 3);
  CHECK(t.cols() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(t(j, i) == a(i, j));
}

TEST_CASE("ensure_finite") {
  Matrix ok(1, 2, {1.0, 2.0});
  CHECK_NOTHROW(ok.ensure_finite("test"));
  Matrix bad(1, 2, {1.0, 2.0});
  bad(0, 1) = std::nan("");
  CHECK(!bad.all_finite());
  try {
    bad.ensure_finite("test");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "numcore/non-finite");
  }
}

TEST_CASE("rng determinism and ranges") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u32() == b.next_u32());

  Rng c(42), d(43);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs |= (c.next_u32() != d.next_u32());
  CHECK(differs);

  Rng streams_a(42, 0), streams_b(42, 1);
  bool stream_differs = false;
  for (int i = 0; i < 10; ++i)
    stream_differs |= (streams_a.next_u32() != streams_b.next_u32());
  CHECK(stream_differs);

  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    double x = r.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    double x = r.uniform(-2.0, 3.0);
    CHECK(x >= -2.0);
    CHECK(x < 3.0);
  }
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
}

TEST_CASE("rng normal moments") {
  Rng r(11);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal(1.0, 2.0);
    sum += x;
    sq += x * x;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
  CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("rng shuffle is a permutation and is seeded") {
  std::vector<int> xs(20);
  for (int i = 0; i < 20; ++i) xs[i] = i;
  std::vector<int> ys = xs;
  Rng r1(5), r2(5);
  r1.shuffle(xs);
  r2.shuffle(ys);
  CHECK(xs == ys);
  std::vector<int> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 20; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("mix_seed stability") {
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2) != mix_seed(2, 2));
}

TEST_CASE("log_sum_exp") {
  // Reference values computed with 50-digit arithmetic.
  std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.6931471805599453).epsilon(1e-15));

  std::vector<double> pair{3.5, 3.5};
  CHECK(log_sum_exp(pair) == doctest::Approx(4.1931471805599453).epsilon(1e-15));

  std::vector<double> single{-7.25};
  CHECK(log_sum_exp(single) == -7.25);

  std::vector<double> negbig{-1000.0, -1000.0};
  CHECK(log_sum_exp(negbig) == doctest::Approx(-999.3068528194400547).epsilon(1e-15));

  std::vector<double> empty;
  try {
    log_sum_exp(empty);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "numcore/empty-reduction");
  }
}

TEST_CASE("softmax cross entropy") {
  // ce([10,0], 0) and ce([0,10], 0) frozen from high-precision evaluation.
  std::vector<double> logits{10.0, 0.0};
  auto r = softmax_cross_entropy(logits, 0);
  CHECK(r.loss == doctest::Approx(4.5398899216864647e-05).epsilon(1e-12));
  CHECK(r.probs[0] + r.probs[1] == doctest::Approx(1.0).epsilon(1e-15));

  auto wrong = softmax_cross_entropy(logits, 1);
  CHECK(wrong.loss == doctest::Approx(10.000045398899217).epsilon(1e-13));

  // Uniform logits: loss is log of the class count.
  std::vector<double> uniform{2.0, 2.0, 2.0, 2.0};
  auto u = softmax_cross_entropy(uniform, 2);
  CHECK(u.loss == doctest::Approx(1.3862943611198906).epsilon(1e-15));
  for (double p : u.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));

  // Shift invariance.
  std::vector<double> shifted{712.0, 702.0};
  CHECK(softmax_cross_entropy(shifted, 0).loss ==
        doctest::Approx(4.5398899216864647e-05).epsilon(1e-12));

  try {
    softmax_cross_entropy(logits, 2);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "numcore/bad-label");
  }
}

TEST_CASE("finite_diff_grad on analytic functions") {
  auto quad = [](std::span<const double> x) {
    return x[0] * x[0] + 3.0 * x[1];
  };
  std::vector<double> at{3.0, -2.0};
  auto g = finite_diff_grad(quad, at);
  CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-9));

  auto expf = [](std::span<const double> x) { return std::exp(x[0]); };
  std::vector<double> at2{1.25};
  auto g2 = finite_diff_grad(expf, at2);
  CHECK(g2[0] == doctest::Approx(std::exp(1.25)).epsilon(1e-9));
}

TEST_CASE("rel_error") {
  CHECK(rel_error(1.0, 1.0) == 0.0);
  CHECK(rel_error(0.0, 0.0) == 0.0);
  CHECK(rel_error(2.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(rel_error(1e-12, 0.0) == doctest::Approx(1e-4).epsilon(1e-10));
  CHECK(rel_error(3.0, -3.0) == doctest::Approx(1.0).epsilon(1e-15));
}
