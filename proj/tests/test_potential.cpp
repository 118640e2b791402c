// Potential models: analytic derivatives against finite-difference oracles,
// the effective-potential decomposition, and the sqrt(eps) Taylor-remainder
// bound.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rpk/potential.hpp"

using namespace rpk;

namespace {

// Central finite differences as an independent derivative oracle (O(h^2)).
template <int D>
RVec<D> fd_gradient(const PotentialModel<D>& v, const RVec<D>& x, double h = 1e-5) {
  RVec<D> g;
  for (int i = 0; i < D; ++i) {
    RVec<D> e = RVec<D>::Zero();
    e[i] = h;
    g[i] = (v.value(x + e) - v.value(x - e)) / (2.0 * h);
  }
  return g;
}

template <int D>
RMat<D> fd_hessian(const PotentialModel<D>& v, const RVec<D>& x, double h = 1e-5) {
  RMat<D> m;
  for (int i = 0; i < D; ++i) {
    RVec<D> e = RVec<D>::Zero();
    e[i] = h;
    m.col(i) = (v.gradient(x + e) - v.gradient(x - e)) / (2.0 * h);
  }
  return m;
}

template <int D>
void check_derivatives(const PotentialModel<D>& v, const RVec<D>& x) {
  REQUIRE((v.gradient(x) - fd_gradient(v, x)).norm() < 1e-7);
  REQUIRE((v.hessian(x) - fd_hessian(v, x)).norm() < 1e-6);
  const RMat<D> q = v.hessian(x);
  REQUIRE((q - q.transpose()).norm() <= 1e-12 * std::max(1.0, q.norm()));
  REQUIRE(sym_operator_norm<D>(q) <= v.hessian_bound * (1.0 + 1e-12));
}

}  // namespace

TEST_CASE("builtin potentials: values, gradients, hessians") {
  SECTION("harmonic isotropic at (1,0)") {
    const auto v = harmonic_isotropic<2>();
    const RVec<2> x(1.0, 0.0);
    CHECK(v.value(x) == Catch::Approx(0.5));
    CHECK((v.gradient(x) - RVec<2>(1.0, 0.0)).norm() == Catch::Approx(0.0).margin(1e-15));
    CHECK((v.hessian(x) - RMat<2>::Identity()).norm() == Catch::Approx(0.0).margin(1e-15));
    CHECK(v.hessian_bound == 1.0);
  }
  SECTION("zero potential") {
    const auto v = zero_potential<2>();
    const RVec<2> x(0.3, -2.0);
    CHECK(v.value(x) == 0.0);
    CHECK(v.gradient(x).norm() == 0.0);
    CHECK(v.hessian(x).norm() == 0.0);
    CHECK(v.hessian_bound == 0.0);
  }
  SECTION("harmonic plus cosine at the origin") {
    // Hand differentiation of |x|^2/2 + a cos(k.x), a = 0.1, k = (1,0):
    // value(0) = a, hessian(0) = I - a k k^T = I + diag(-0.1, 0).
    const auto v = harmonic_plus_cosine<2>(0.1, RVec<2>(1.0, 0.0));
    const RVec<2> x(0.0, 0.0);
    CHECK(v.value(x) == Catch::Approx(0.1));
    RMat<2> expected = RMat<2>::Identity();
    expected(0, 0) -= 0.1;
    CHECK((v.hessian(x) - expected).norm() == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("finite-difference oracle over sample points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const auto va = harmonic_anisotropic<2>(RVec<2>(0.3, 0.7));
    const auto vc = harmonic_plus_cosine<2>(0.1, RVec<2>(1.0, 0.5));
    const auto vc3 = harmonic_plus_cosine<3>(0.2, RVec<3>(1.0, 0.0, -0.5));
    for (int i = 0; i < 20; ++i) {
      check_derivatives<2>(va, RVec<2>(u(rng), u(rng)));
      check_derivatives<2>(vc, RVec<2>(u(rng), u(rng)));
      check_derivatives<3>(vc3, RVec<3>(u(rng), u(rng), u(rng)));
    }
  }
  SECTION("anisotropic rejects non-positive coefficients") {
    CHECK_THROWS_AS(harmonic_anisotropic<2>(RVec<2>(1.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(harmonic_anisotropic<2>(RVec<2>(-0.5, 1.0)), std::invalid_argument);
  }
}

TEST_CASE("effective potential") {
  SECTION("quadratic potential has zero remainder") {
    const auto v = harmonic_isotropic<2>();
    const RVec<2> q(0.7, -0.2), y(1.0, 1.0);
    CHECK(effective_potential(v, q, 0.01, y) == Catch::Approx(1.0).epsilon(1e-11));
    CHECK(std::abs(taylor_remainder(v, q, 0.01, y)) < 1e-11);
  }
  SECTION("zero potential gives zero") {
    const auto v = zero_potential<2>();
    CHECK(effective_potential(v, RVec<2>(1.0, 2.0), 0.04, RVec<2>(3.0, -1.0)) == 0.0);
  }
  SECTION("direct-evaluation oracle vs quadratic-form decomposition") {
    const auto v = harmonic_plus_cosine<2>(0.1, RVec<2>(1.0, 0.0));
    const RVec<2> q(0.0, 0.0), y(2.0, 0.0);
    const double eps = 0.04;
    const double direct = effective_potential(v, q, eps, y);
    const double split = 0.5 * y.dot(v.hessian(q) * y) + taylor_remainder(v, q, eps, y);
    CHECK(direct == Catch::Approx(split).epsilon(1e-12));
  }
  SECTION("rejects non-positive eps") {
    const auto v = harmonic_isotropic<2>();
    CHECK_THROWS_AS(effective_potential(v, RVec<2>(0, 0), 0.0, RVec<2>(1, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("taylor remainder") {
  const auto vc = harmonic_plus_cosine<2>(0.1, RVec<2>(1.0, 0.0));

  SECTION("vanishes at y = 0 and for quadratic potentials") {
    CHECK(taylor_remainder(vc, RVec<2>(0.4, 0.1), 0.09, RVec<2>(0, 0)) == 0.0);
    const auto va = harmonic_anisotropic<2>(RVec<2>(0.3, 0.7));
    CHECK(std::abs(taylor_remainder(va, RVec<2>(1.0, -1.0), 0.25, RVec<2>(2.0, 1.0))) < 1e-12);
  }

  SECTION("sqrt(eps) scaling: remainder ratio at eps vs eps/4 is about 2") {
    // sin(k.q) away from zero so the leading third-order term dominates.
    const RVec<2> q(0.7, 0.0), y(1.2, 0.5);
    const double r1 = taylor_remainder(vc, q, 0.01, y);
    const double r2 = taylor_remainder(vc, q, 0.0025, y);
    CHECK(std::abs(r1 / r2) == Catch::Approx(2.0).epsilon(0.2));
  }

  SECTION("bounded by third-derivative bound: |rem| <= C sqrt(eps) |y|^3") {
    // C = sup |D^3 V| / 6; sampled over 10^3 random (q, y) pairs.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uq(-2.0, 2.0), uy(-3.0, 3.0);
    const auto vc2 = harmonic_plus_cosine<2>(0.3, RVec<2>(1.0, 0.5));
    for (const double eps : {0.25, 0.04}) {
      for (int i = 0; i < 500; ++i) {
        const RVec<2> q(uq(rng), uq(rng)), y(uy(rng), uy(rng));
        const double bound =
            vc2.third_derivative_bound / 6.0 * std::sqrt(eps) * std::pow(y.norm(), 3);
        REQUIRE(std::abs(taylor_remainder(vc2, q, eps, y)) <= bound * (1.0 + 1e-9) + 1e-14);
      }
    }
  }

  SECTION("exact decomposition for every builtin over random samples") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const auto pots = {zero_potential<2>(), harmonic_isotropic<2>(),
                       harmonic_anisotropic<2>(RVec<2>(0.4, 1.1)),
                       harmonic_plus_cosine<2>(0.15, RVec<2>(0.8, -0.3))};
    for (const auto& v : pots) {
      for (int i = 0; i < 50; ++i) {
        const RVec<2> q(u(rng), u(rng)), y(u(rng), u(rng));
        const double eps = 0.01 + 0.2 * std::abs(u(rng));
        const double lhs = effective_potential(v, q, eps, y);
        const double rhs = 0.5 * y.dot(v.hessian(q) * y) + taylor_remainder(v, q, eps, y);
        REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
      }
    }
  }
}
