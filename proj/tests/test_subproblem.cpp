#include "fixtures.hpp"
#include "oracles.hpp"

#include "npqn/subproblem.hpp"

#include <doctest.h>

using namespace npqn;
using npqn::test::vec;

namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

SubproblemSolutiond solve1d(std::vector<double> g, std::vector<PolyhedralTermd> terms = {}, double x = 0.0,
                            SubproblemOptions opt = {}) {
  std::vector<VectorXd> grads;
  std::vector<MatrixXd> H;
  for (double gj : g) {
    grads.push_back(vec({gj}));
    H.push_back(scalar(1.0));
  }
  if (terms.empty())
    terms.assign(g.size(), PolyhedralTermd::zero(1));
  return solve_subproblem(vec({x}), grads, H, terms, test::cube(1, -100, 100), opt);
}

} // namespace

TEST_SUITE("subproblem") {

TEST_CASE("scalar examples") {
  SUBCASE("single quadratic") {
    const auto s = solve1d({1.0});
    CHECK(s.d(0) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(s.theta == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(s.lambda(0) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("two objectives, second one binds") {
    const auto s = solve1d({2.0, 1.0});
    CHECK(s.d(0) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(s.theta == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(s.lambda(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(s.lambda(1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.kkt.max() <= 1e-8);
  }
  SUBCASE("opposed gradients: critical point") {
    const auto s = solve1d({1.0, -1.0});
    CHECK(std::abs(s.d(0)) <= 1e-7);
    CHECK(std::abs(s.theta) <= 1e-8);
    CHECK(s.lambda(0) == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("soft threshold: |grad| <= delta") {
    const auto s = solve1d({0.5}, {PolyhedralTermd(scalar(1.0), 1.0)});
    CHECK(std::abs(s.d(0)) <= 1e-7);
    CHECK(std::abs(s.theta) <= 1e-8);
  }
  SUBCASE("PQNA regularization") {
    SubproblemOptions opt;
    opt.variant = Variant::PQNA;
    opt.pqna_reg = 1.0;
    const auto s = solve1d({1.0}, {}, 0.0, opt);
    CHECK(s.d(0) == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(s.theta == doctest::Approx(-0.25).epsilon(1e-8));
  }
  SUBCASE("box caps the step") {
    const auto s = solve_subproblem(vec({0.0}), {vec({1.0})}, {scalar(1.0)}, {PolyhedralTermd::zero(1)},
                                    test::cube(1, -0.25, 1), SubproblemOptions{});
    CHECK(s.d(0) == doctest::Approx(-0.25).epsilon(1e-7));
    CHECK(s.theta == doctest::Approx(-0.25 + 0.03125).epsilon(1e-7));
    CHECK(s.box_lower_mult(0) == doctest::Approx(0.75).epsilon(1e-5));
  }
}

TEST_CASE("build_qcqp") {
  const std::vector<PolyhedralTermd> terms{PolyhedralTermd::zero(1), PolyhedralTermd(scalar(1.0), 1.0)};
  const auto q = build_qcqp(vec({0.5}), {vec({1.0}), vec({1.0})}, {scalar(1.0), scalar(1.0)}, terms,
                            test::cube(1, -1, 1), SubproblemOptions{});
  CHECK_FALSE(q.rows[0].has_dual_block());
  CHECK(q.rows[1].has_dual_block());
  CHECK(q.rows[1].g_x == doctest::Approx(0.5));
  CHECK(q.lo(0) == doctest::Approx(-1.5));
  CHECK(q.hi(0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(build_qcqp(vec({0.0}), {vec({1.0})}, {scalar(-1.0)}, {PolyhedralTermd::zero(1)},
                             test::cube(1, -1, 1), SubproblemOptions{}),
                  Error);
  CHECK_THROWS_AS(build_qcqp(vec({0.0}), {vec({1.0, 2.0})}, {scalar(1.0)}, {PolyhedralTermd::zero(1)},
                             test::cube(1, -1, 1), SubproblemOptions{}),
                  Error);
}

TEST_CASE("strictly_feasible_start") {
  SUBCASE("dual block") {
    const std::vector<PolyhedralTermd> terms{PolyhedralTermd(scalar(1.0), 1.0)};
    const auto q =
        build_qcqp(vec({0.5}), {vec({0.0})}, {scalar(1.0)}, terms, test::cube(1, -1, 1), SubproblemOptions{});
    const auto p = strictly_feasible_start(q);
    REQUIRE(p.w[0].size() == 2);
    CHECK(p.w[0](0) == doctest::Approx(1.5));
    CHECK(p.w[0](1) == doctest::Approx(1.0));
    CHECK((terms[0].dual_A().transpose() * p.w[0] - (q.x + p.d)).norm() <= 1e-12);
  }
  SUBCASE("no dual block") {
    const auto q = build_qcqp(vec({0.0}), {vec({2.0})}, {scalar(1.0)}, {PolyhedralTermd::zero(1)},
                              test::cube(1, -1, 1), SubproblemOptions{});
    const auto p = strictly_feasible_start(q);
    CHECK(p.t == doctest::Approx(1.0));
    CHECK(p.d(0) == 0.0);
    CHECK(p.w[0].size() == 0);
  }
  SUBCASE("boundary start") {
    const auto q = build_qcqp(vec({1.0}), {vec({2.0})}, {scalar(1.0)}, {PolyhedralTermd::zero(1)},
                              test::cube(1, -1, 1), SubproblemOptions{});
    CHECK_THROWS_AS(strictly_feasible_start(q), Error);
  }
}

TEST_CASE("kkt_residual") {
  const std::vector<VectorXd> grads{vec({2.0}), vec({1.0})};
  const std::vector<MatrixXd> H{scalar(1.0), scalar(1.0)};
  const std::vector<PolyhedralTermd> terms{PolyhedralTermd::zero(1), PolyhedralTermd::zero(1)};
  SubproblemSolutiond sol;
  sol.d = vec({-1.0});
  sol.theta = -0.5;
  sol.lambda = vec({0.0, 1.0});
  auto r = kkt_residual(vec({0.0}), sol, grads, H, terms);
  CHECK(r.max() <= 1e-10);

  const std::vector<VectorXd> opposed{vec({1.0}), vec({-1.0})};
  sol.d = vec({0.0});
  sol.theta = 0.0;
  sol.lambda = vec({0.5, 0.5});
  r = kkt_residual(vec({0.0}), sol, opposed, H, terms);
  CHECK(r.stationarity <= 1e-15);
  sol.lambda = vec({0.6, 0.4});
  r = kkt_residual(vec({0.0}), sol, opposed, H, terms);
  CHECK(r.stationarity == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("random instances against the brute-force oracle") {
  SplitMix64 rng(99);
  for (int k = 0; k < 60; ++k) {
    const int n = 1 + k % 2, m = 1 + (k / 2) % 3;
    const auto inst = oracle::random_instance(rng, n, m);
    const Boxd box = test::cube(n, -2, 2);
    const auto s = solve_subproblem(inst.x, inst.grads, inst.H, inst.terms, box, SubproblemOptions{});
    const auto ref = oracle::exact_minimize(inst, oracle::grid_minimize(inst, n == 1 ? 1e-3 : 1e-2, 1e-4).d);
    CAPTURE(k);
    CHECK(std::abs(s.theta - ref.value) <= 1e-5);
    CHECK((s.d - ref.d).norm() <= 1e-3);
    CHECK(s.theta <= 1e-8);
    CHECK((s.lambda.array() >= 0.0).all());
    CHECK(std::abs(s.lambda.sum() - 1.0) <= 1e-10);
    CHECK(s.kkt.max() <= 1e-6);
    CHECK(box.contains(VectorXd(inst.x + s.d), 1e-12));
  }
}

} // TEST_SUITE
