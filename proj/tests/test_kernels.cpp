#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "kgcn/kernels.hpp"
#include "oracles.hpp"

using namespace kgcn;

namespace {

// Random pair inside the kind's valid domain. HI needs [0,1]; Log/Power are
// happiest away from the u == v non-smooth point, which random draws avoid.
std::pair<std::vector<double>, std::vector<double>> random_pair(
    KernelKind kind, Rng& rng, std::size_t dim) {
  double lo = kind == KernelKind::HistogramIntersection ? 0.0 : -1.5;
  double hi = kind == KernelKind::HistogramIntersection ? 1.0 : 1.5;
  std::vector<double> u(dim), v(dim);
  for (auto& x : u) x = rng.uniform(lo, hi);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return {u, v};
}

}  // namespace

TEST_CASE("closed forms match the catalog definitions") {
  for (KernelKind kind : kAllKernelKinds) {
    KernelSpec spec = KernelSpec::defaults(kind);
    Rng rng(2024);
    for (int rep = 0; rep < 200; ++rep) {
      auto [u, v] = random_pair(kind, rng, 6);
      double got = kernel_eval(spec, u, v);
      double want = oracle::kernel(spec, u, v);
      CHECK_MESSAGE(got == doctest::Approx(want).epsilon(1e-12),
                    std::string(kernel_name(kind)));
    }
  }
}

TEST_CASE("pinned kernel values") {
  std::vector<double> u12{1, 2}, v34{3, 4};
  CHECK(kernel_eval(KernelSpec::defaults(KernelKind::Linear), u12, v34) == 11.0);

  std::vector<double> a{0.3, -0.7, 0.2};
  CHECK(kernel_eval(KernelSpec::defaults(KernelKind::Gaussian), a, a) == 1.0);

  std::vector<double> hu{0.2, 0.7}, hv{0.5, 0.3};
  CHECK(kernel_eval(KernelSpec::defaults(KernelKind::HistogramIntersection),
                    hu, hv) == doctest::Approx(0.5).epsilon(1e-15));

  // Gaussian beta=1 at squared distance 2; value frozen from a
  // high-precision evaluation of exp(-2).
  std::vector<double> e1{1, 0}, e2{0, 1};
  CHECK(kernel_eval(KernelSpec::defaults(KernelKind::Gaussian), e1, e2) ==
        doctest::Approx(0.1353352832366127).epsilon(1e-15));
}

TEST_CASE("kernel names round trip") {
  for (KernelKind kind : kAllKernelKinds) {
    auto back = kernel_from_name(kernel_name(kind));
    REQUIRE(back.has_value());
    CHECK(*back == kind);
  }
  CHECK(!kernel_from_name("no-such-kernel").has_value());
}

TEST_CASE("family predicates") {
  CHECK(is_inner_product_kernel(KernelKind::Linear));
  CHECK(is_inner_product_kernel(KernelKind::Polynomial));
  CHECK(is_inner_product_kernel(KernelKind::Sigmoid));
  CHECK(is_inner_product_kernel(KernelKind::Tanh));
  CHECK(is_distance_kernel(KernelKind::Gaussian));
  CHECK(is_distance_kernel(KernelKind::Laplacian));
  CHECK(is_distance_kernel(KernelKind::Power));
  CHECK(is_distance_kernel(KernelKind::InverseMultiquadric));
  CHECK(is_distance_kernel(KernelKind::Log));
  CHECK(is_distance_kernel(KernelKind::Cauchy));
  CHECK(!is_distance_kernel(KernelKind::HistogramIntersection));
  CHECK(!is_inner_product_kernel(KernelKind::HistogramIntersection));
}

TEST_CASE("defaults and validation") {
  CHECK(KernelSpec::defaults(KernelKind::Gaussian).beta == 1.0);
  CHECK(KernelSpec::defaults(KernelKind::HistogramIntersection).beta == 50.0);
  CHECK(KernelSpec::defaults(KernelKind::InverseMultiquadric).b == 1.0);
  CHECK(KernelSpec::defaults(KernelKind::Polynomial).p == 2);
  CHECK(KernelSpec::defaults(KernelKind::Cauchy).sigma2 == 1.0);

  KernelSpec bad = KernelSpec::defaults(KernelKind::Gaussian);
  bad.beta = 0.0;
  try {
    bad.validate();
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "kernels/bad-spec");
  }

  KernelSpec badp = KernelSpec::defaults(KernelKind::Power);
  badp.p = 0;
  CHECK_THROWS_AS(badp.validate(), Error);

  KernelSpec badsig = KernelSpec::defaults(KernelKind::Cauchy);
  badsig.sigma2 = -1.0;
  CHECK_THROWS_AS(badsig.validate(), Error);
}

TEST_CASE("dim mismatch and HI domain errors") {
  std::vector<double> u{1, 2, 3}, v{1, 2};
  try {
    kernel_eval(KernelSpec::defaults(KernelKind::Linear), u, v);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "kernels/dim-mismatch");
  }

  std::vector<double> hu{0.5, 1.2}, hv{0.5, 0.5};
  try {
    kernel_eval(KernelSpec::defaults(KernelKind::HistogramIntersection), hu, hv);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "kernels/range-violation");
    // Exactly one code prefix in the rendered message.
    std::string what = e.what();
    CHECK(what.find("[kernels/range-violation]") == 0);
    CHECK(what.find("[kernels/range-violation]", 1) == std::string::npos);
  }
}

TEST_CASE("neural composition matches closed forms") {
  for (KernelKind kind : kAllKernelKinds) {
    if (kind == KernelKind::HistogramIntersection) continue;
    KernelSpec spec = KernelSpec::defaults(kind);
    Rng rng(99);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      auto [u, v] = random_pair(kind, rng, 8);
      double exact = kernel_eval(spec, u, v);
      double neural = kernel_eval_neural(spec, u, v);
      worst = std::max(worst, std::fabs(exact - neural));
    }
    CHECK_MESSAGE(worst <= 1e-9, std::string(kernel_name(kind)));
  }
}

TEST_CASE("HI composition approximates and sharpens with beta") {
  const std::size_t dim = 24;
  Rng rng(4242);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> u(dim), v(dim);
    for (auto& x : u) x = rng.uniform(0.05, 0.95);
    for (auto& x : v) x = rng.uniform(0.05, 0.95);
    pairs.emplace_back(u, v);
  }
  KernelSpec spec = KernelSpec::defaults(KernelKind::HistogramIntersection);
  double prev = -1.0;
  for (double beta : {10.0, 25.0, 50.0, 100.0}) {
    spec.beta = beta;
    double worst = 0.0;
    for (const auto& [u, v] : pairs) {
      double exact = kernel_eval(spec, u, v);
      double neural = kernel_eval_neural(spec, u, v);
      worst = std::max(worst, std::fabs(exact - neural));
    }
    if (beta == 50.0) CHECK(worst <= 0.02 * dim);
    if (prev >= 0.0) CHECK(worst <= prev + 1e-12);
    prev = worst;
  }
}

TEST_CASE("analytic gradients match finite differences") {
  for (KernelKind kind : kAllKernelKinds) {
    KernelSpec spec = KernelSpec::defaults(kind);
    Rng rng(31337);
    for (int rep = 0; rep < 20; ++rep) {
      auto [u, v] = random_pair(kind, rng, 5);
      if (kind == KernelKind::HistogramIntersection)
        // Stay away from the min kink so the finite difference is two-sided.
        for (std::size_t d = 0; d < u.size(); ++d)
          if (std::fabs(u[d] - v[d]) < 1e-3) u[d] = std::min(1.0, u[d] + 2e-3);

      auto grads = kernel_grads(spec, u, v);
      std::vector<double> vc = v;
      auto fu = [&](std::span<const double> x) {
        return kernel_eval(spec, x, vc);
      };
      auto du = finite_diff_grad(fu, u);
      std::vector<double> uc = u;
      auto fv = [&](std::span<const double> x) {
        return kernel_eval(spec, uc, x);
      };
      auto dv = finite_diff_grad(fv, v);
      for (std::size_t d = 0; d < u.size(); ++d) {
        CHECK_MESSAGE(rel_error(grads.du[d], du[d]) < 1e-5,
                      std::string(kernel_name(kind)) << " du[" << d << "]");
        CHECK_MESSAGE(rel_error(grads.dv[d], dv[d]) < 1e-5,
                      std::string(kernel_name(kind)) << " dv[" << d << "]");
      }
    }
  }
}

TEST_CASE("distance kernels use the zero subgradient at u == v") {
  std::vector<double> u{0.3, -0.4, 0.9};
  for (KernelKind kind : {KernelKind::Laplacian, KernelKind::Log}) {
    auto g = kernel_grads(KernelSpec::defaults(kind), u, u);
    for (double x : g.du) CHECK(x == 0.0);
    for (double x : g.dv) CHECK(x == 0.0);
  }
  auto gg = kernel_grads(KernelSpec::defaults(KernelKind::Gaussian), u, u);
  for (double x : gg.du) CHECK(x == 0.0);
}

TEST_CASE("HI tie gradient goes to the first argument") {
  std::vector<double> u{0.5, 0.2}, v{0.5, 0.8};
  auto g = kernel_grads(
      KernelSpec::defaults(KernelKind::HistogramIntersection), u, v);
  CHECK(g.du[0] == 1.0);  // tie at d=0
  CHECK(g.dv[0] == 0.0);
  CHECK(g.du[1] == 1.0);  // u strictly smaller at d=1
  CHECK(g.dv[1] == 0.0);
}

TEST_CASE("gram equals looped evaluation and is symmetric") {
  Matrix x = oracle::random_matrix(5, 3, 17);
  Matrix y = oracle::random_matrix(4, 3, 18);
  for (KernelKind kind : kAllKernelKinds) {
    KernelSpec spec = KernelSpec::defaults(kind);
    Matrix gx = x, gy = y;
    if (kind == KernelKind::HistogramIntersection) {
      gx = oracle::random_matrix(5, 3, 17, 0.0, 1.0);
      gy = oracle::random_matrix(4, 3, 18, 0.0, 1.0);
    }
    Matrix g = gram(spec, gx, gy);
    Matrix want = oracle::looped_gram(spec, gx, gy);
    REQUIRE(g.rows() == 5);
    REQUIRE(g.cols() == 4);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        CHECK(g(i, j) == doctest::Approx(want(i, j)).epsilon(1e-12));

    Matrix sym = gram(spec, gx, gx);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        CHECK(std::fabs(sym(i, j) - sym(j, i)) <= 1e-12);
  }
}

TEST_CASE("linear gram is X X^T and gaussian diagonal is one") {
  Matrix x = oracle::random_matrix(6, 4, 23);
  Matrix g = gram(KernelSpec::defaults(KernelKind::Linear), x, x);
  Matrix want = oracle::matmul(x, transpose(x));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(g(i, j) == doctest::Approx(want(i, j)).epsilon(1e-12));

  Matrix gg = gram(KernelSpec::defaults(KernelKind::Gaussian), x, x);
  for (std::size_t i = 0; i < 6; ++i) CHECK(gg(i, i) == 1.0);
}

TEST_CASE("gram reports the failing entry") {
  Matrix x(2, 2, {0.2, 0.4, 0.6, 0.8});
  Matrix y(2, 2, {0.1, 0.3, 0.5, 1.4});
  try {
    gram(KernelSpec::defaults(KernelKind::HistogramIntersection), x, y);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "kernels/range-violation");
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("value bounds") {
  Rng rng(808);
  for (int rep = 0; rep < 200; ++rep) {
    auto [u, v] = random_pair(KernelKind::Gaussian, rng, 6);
    for (KernelKind kind : {KernelKind::Gaussian, KernelKind::Laplacian,
                            KernelKind::Cauchy, KernelKind::Sigmoid}) {
      double k = kernel_eval(KernelSpec::defaults(kind), u, v);
      CHECK(k > 0.0);
      CHECK(k <= 1.0);
    }
    for (KernelKind kind : {KernelKind::Power, KernelKind::Log}) {
      CHECK(kernel_eval(KernelSpec::defaults(kind), u, v) <= 0.0);
    }
  }
}

TEST_CASE("sigma quad shapes per catalog row") {
  auto lin = sigma_quad(KernelSpec::defaults(KernelKind::Linear));
  CHECK(lin.s1.form == ScalarFn::Form::Identity);
  CHECK(lin.s2.form == ScalarFn::Form::Identity);
  CHECK(lin.s3.form == ScalarFn::Form::Identity);
  CHECK(lin.s4.form == ScalarFn::Form::Identity);

  auto poly = sigma_quad(KernelSpec::defaults(KernelKind::Polynomial));
  CHECK(poly.s1.form == ScalarFn::Form::Identity);
  CHECK(poly.s3.form == ScalarFn::Form::PowP);

  auto gauss = sigma_quad(KernelSpec::defaults(KernelKind::Gaussian));
  CHECK(gauss.s1.form == ScalarFn::Form::Exp);
  CHECK(gauss.s2.form == ScalarFn::Form::LogSquared);
  CHECK(gauss.s3.form == ScalarFn::Form::ExpNegBeta);
  CHECK(gauss.s4.form == ScalarFn::Form::NegExp);

  auto lap = sigma_quad(KernelSpec::defaults(KernelKind::Laplacian));
  CHECK(lap.s3.form == ScalarFn::Form::ExpNegBetaSqrt);
}
