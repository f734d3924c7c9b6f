#include "fixtures.hpp"

#include "npqn/nonsmooth.hpp"

#include <doctest.h>

using namespace npqn;
using npqn::test::vec;

namespace {

PolyhedralTermd random_term(SplitMix64 &rng, int n) {
  MatrixXd G(n, n);
  do {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        G(r, c) = rng.uniform(-1.0, 1.0);
  } while (condition_number(G) > 1e4);
  return PolyhedralTermd(G, rng.uniform(0.0, 2.0));
}

VectorXd random_vec(SplitMix64 &rng, int n, double scale = 3.0) {
  VectorXd y(n);
  for (int i = 0; i < n; ++i)
    y(i) = rng.uniform(-scale, scale);
  return y;
}

MatrixXd diag2(double a, double b) { return vec({a, b}).asDiagonal(); }

} // namespace

TEST_SUITE("nonsmooth") {

TEST_CASE("eval_support and the vertex oracle") {
  const PolyhedralTermd id(MatrixXd::Identity(2, 2), 1.0);
  const PolyhedralTermd d21(diag2(2, 1), 1.0);
  CHECK(eval_support(id, vec({3, -4})) == doctest::Approx(7.0));
  CHECK(eval_support(id, vec({0, 0})) == 0.0);
  CHECK(eval_support(d21, vec({2, 3})) == doctest::Approx(4.0));
  CHECK(support_oracle_vertices(id, vec({3, -4})) == doctest::Approx(7.0));
  CHECK(support_oracle_vertices(id, vec({0, 0})) == 0.0);
  CHECK(support_oracle_vertices(d21, vec({2, 3})) == doctest::Approx(4.0));
  const PolyhedralTermd big(MatrixXd::Identity(13, 13), 1.0);
  CHECK_THROWS_AS(support_oracle_vertices(big, VectorXd(VectorXd::Zero(13))), Error);
}

TEST_CASE("support_subgradient") {
  const PolyhedralTermd id(MatrixXd::Identity(2, 2), 1.0);
  CHECK(support_subgradient(id, vec({3, -4})).isApprox(vec({1, -1})));
  CHECK(support_subgradient(id, vec({0, 0})).isZero(0.0));
  CHECK(support_subgradient(PolyhedralTermd(diag2(2, 1), 1.0), vec({2, 3})).isApprox(vec({0.5, 1})));
}

TEST_CASE("build_dual_data") {
  auto dd = build_dual_data(PolyhedralTermd(MatrixXd::Identity(1, 1), 2.0));
  CHECK(dd.A.isApprox(vec({1, -1})));
  CHECK(dd.b.isApprox(vec({2, 2})));
  dd = build_dual_data(PolyhedralTermd(MatrixXd::Identity(2, 2), 0.0));
  CHECK(dd.b.isZero(0.0));
  MatrixXd G(2, 2);
  G << 1, 1, 0, 1;
  dd = build_dual_data(PolyhedralTermd(G, 1.0));
  MatrixXd A(4, 2);
  A << 1, 1, 0, 1, -1, -1, 0, -1;
  CHECK(dd.A == A);
  CHECK(dd.b == VectorXd::Ones(4));
}

TEST_CASE("term invariants") {
  MatrixXd G(2, 2);
  G << 0.3, 0.9, 0.2, 0.4;
  const PolyhedralTermd t(G, 0.5);
  CHECK((t.G() * t.Ginv_T().transpose() - MatrixXd::Identity(2, 2)).norm() <= 1e-10);
  CHECK_FALSE(t.is_zero());
  CHECK(PolyhedralTermd::zero(3).is_zero());
  CHECK_THROWS_AS(PolyhedralTermd(G, -1.0), Error);
  CHECK_THROWS_AS(PolyhedralTermd(MatrixXd::Identity(2, 3), 1.0), Error);
}

TEST_CASE("generate_random_term") {
  SUBCASE("deterministic") {
    SplitMix64 a(42), b(42);
    const auto ta = generate_random_term<double>(2, vec({1, 1}), a);
    const auto tb = generate_random_term<double>(2, vec({1, 1}), b);
    CHECK(ta.G() == tb.G());
    CHECK(ta.delta() == tb.delta());
  }
  SUBCASE("stream order matches an independent SplitMix64") {
    SplitMix64 rng(42);
    const auto t = generate_random_term<double>(2, vec({1, 1}), rng);
    MatrixXd G(2, 2);
    G << 0.7415648787718233, 0.27860113025513866, 0.1599103928769201, 0.34419071652363753;
    CHECK(t.G() == G);
    CHECK(t.delta() == doctest::Approx(0.023042413483219698 * std::sqrt(2.0)).epsilon(1e-15));
  }
  SUBCASE("zero anchor") {
    SplitMix64 rng(1);
    CHECK(generate_random_term<double>(2, vec({0, 0}), rng).is_zero());
  }
  SUBCASE("ranges") {
    SplitMix64 rng(7);
    const VectorXd anchor = vec({3, -4});
    const auto t = generate_random_term<double>(2, anchor, rng);
    const double dbar = t.delta() / anchor.norm();
    CHECK(dbar >= 0.02);
    CHECK(dbar <= 0.10);
    CHECK((t.G().array() >= 0.0).all());
    CHECK((t.G().array() <= 1.0).all());
  }
}

TEST_CASE("closed form equals vertex enumeration") {
  SplitMix64 rng(1001);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 5;
    const auto t = random_term(rng, n);
    const VectorXd y = random_vec(rng, n);
    const double a = eval_support(t, y), b = support_oracle_vertices(t, y);
    worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(b)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("support function properties") {
  SplitMix64 rng(77);
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 5;
    const auto t = random_term(rng, n);
    const VectorXd y = random_vec(rng, n), y2 = random_vec(rng, n);
    const double gy = eval_support(t, y), gy2 = eval_support(t, y2);
    CHECK(gy2 >= gy + support_subgradient(t, y).dot(y2 - y) - 1e-10);
    const double s = rng.uniform(0.0, 5.0);
    CHECK(std::abs(eval_support(t, VectorXd(s * y)) - s * gy) <= 1e-12 * (1.0 + std::abs(s * gy)));
    CHECK(eval_support(t, VectorXd(0.5 * y + 0.5 * y2)) <= 0.5 * gy + 0.5 * gy2 + 1e-12);
  }
}

} // TEST_SUITE
