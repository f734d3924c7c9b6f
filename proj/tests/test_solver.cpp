#include "fixtures.hpp"

#include "npqn/problems.hpp"
#include "npqn/solver.hpp"

#include <doctest.h>

using namespace npqn;
using npqn::test::vec;

namespace {

SubproblemSolutiond fake_solution(VectorXd d, double theta) {
  SubproblemSolutiond s;
  s.d = std::move(d);
  s.theta = theta;
  return s;
}

ProblemSpecd quadratic_pair() {
  MatrixXd A1(2, 2), A2(2, 2);
  A1 << 3, 1, 1, 2;
  A2 << 1, -0.5, -0.5, 4;
  return test::quadratic_problem({A1, A2}, {vec({1, 0}), vec({0, 1})}, test::cube(2, -4, 4), "pair");
}

} // namespace

TEST_SUITE("solver") {

TEST_CASE("check_stop") {
  const SolverConfig c;
  CHECK(check_stop(fake_solution(vec({1e-7}), -1e-14), 5, c) == Termination::DirectionTol);
  CHECK(check_stop(fake_solution(vec({1.0}), -0.5), 300, c) == Termination::IterCap);
  CHECK_FALSE(check_stop(fake_solution(vec({1.0}), -0.5), 3, c).has_value());
  CHECK(check_stop(fake_solution(vec({1e-3}), -1e-11), 3, c) == Termination::ThetaTol);
  CHECK(check_stop(fake_solution(vec({1e-3}), 2e-12), 3, c) == Termination::ThetaTol);
}

TEST_CASE("NPQNA on half the squared norm") {
  const auto p = test::half_norm(2);
  const auto r = run(p, vec({1, 1}), SolverConfig{});
  CHECK(r.termination == Termination::DirectionTol);
  CHECK(r.iterations == 1);
  CHECK(r.iterates[0].alpha == 1.0);
  CHECK(r.x.norm() <= 1e-7);
  CHECK(r.function_evaluations == r.iterations + 1);
}

TEST_CASE("critical start") {
  const auto p = test::quadratic_problem({MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2)},
                                         {vec({1, 0.5}), vec({-1, -0.5})}, test::cube(2, -3, 3));
  const auto r = run(p, vec({0, 0}), SolverConfig{});
  CHECK(r.termination == Termination::DirectionTol);
  CHECK(r.iterations == 0);
  CHECK(r.iterates.size() == 1);
  CHECK(r.iterates[0].h == -1);
}

TEST_CASE("NPGA on a convex quadratic pair") {
  const auto p = quadratic_pair();
  SolverConfig c;
  c.variant = Variant::NPGA;
  for (const auto &x0 : uniform_starts(p.box, 20, 11)) {
    const auto r = run(p, x0, c);
    CHECK(converged(r.termination));
    CHECK(r.iterations <= 3);
  }
}

TEST_CASE("NPGA needs Hessians") {
  auto p = test::half_norm(1);
  p.smooth[0].hessian = nullptr;
  SolverConfig c;
  c.variant = Variant::NPGA;
  CHECK_THROWS_AS(run(p, vec({1}), c), Error);
}

TEST_CASE("start outside the box") { CHECK_THROWS_AS(run(test::half_norm(1), vec({11}), SolverConfig{}), Error); }

TEST_CASE("trace invariants") {
  const auto p = attach_nonsmooth(get_problem("FDS", 3), 4);
  for (Variant v : {Variant::NPQNA, Variant::PQNA, Variant::NPGA}) {
    SolverConfig c;
    c.variant = v;
    const auto r = run(p, vec({1.1, -0.4, 0.7}), c);
    CAPTURE(to_string(v));
    CHECK(converged(r.termination));
    CHECK(r.iterations <= c.max_iter);
    CHECK(r.function_evaluations == r.iterations + 1);
    CHECK(r.trial_evaluations >= r.iterations);
    CHECK(static_cast<int>(r.iterates.size()) == r.iterations + 1);
    for (const auto &it : r.iterates) {
      CHECK(it.theta <= 1e-8);
      CHECK(p.box.contains(it.x, 1e-12));
      for (double e : it.min_eig)
        CHECK(e >= c.spd_floor - 1e-12);
    }
  }
}

TEST_CASE("diagnostics") {
  SUBCASE("exact curvature gives zero ratio") {
    IterateRecord<double> rec;
    rec.x = vec({1, 1});
    rec.d = vec({0.5, -1});
    rec.d_norm = rec.d.norm();
    const auto p = quadratic_pair();
    for (int j = 0; j < 2; ++j)
      rec.curvature_times_d.push_back(p.smooth[j].hessian(rec.x) * rec.d);
    const VectorXd next = rec.x + rec.d;
    const auto diag = diagnostics_step(rec, &next, p, vec({0, 0}));
    CHECK(*diag.dennis_more[0] <= 1e-15);
    CHECK(*diag.dennis_more[1] <= 1e-15);
    CHECK(*diag.tau == doctest::Approx(rec.d.norm() / std::sqrt(2.0)));
  }
  SUBCASE("zero direction") {
    IterateRecord<double> rec;
    rec.x = vec({1, 1});
    rec.d = vec({0, 0});
    rec.curvature_times_d = {vec({0, 0}), vec({0, 0})};
    const auto diag = diagnostics_step<double>(rec, nullptr, quadratic_pair(), vec({0, 0}));
    CHECK_FALSE(diag.dennis_more[0].has_value());
    CHECK_FALSE(diag.tau.has_value());
  }
  SUBCASE("quadratic bi-objective run") {
    const int n = 6;
    MatrixXd A1 = MatrixXd::Identity(n, n), A2 = MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      A1(i, i) = 1.0 + i;
      A2(i, i) = 6.0 - 0.5 * i;
      if (i + 1 < n)
        A1(i, i + 1) = A1(i + 1, i) = A2(i, i + 1) = A2(i + 1, i) = 0.4;
    }
    const auto p = test::quadratic_problem({A1, A2}, {VectorXd::Ones(n), VectorXd::LinSpaced(n, -1, 1)},
                                           test::cube(n, -5, 5));
    SolverConfig c;
    c.d_tol = 1e-10;
    const auto r = run(p, VectorXd(VectorXd::LinSpaced(n, 4, -4)), c);
    REQUIRE(converged(r.termination));
    REQUIRE(r.diagnostics.size() >= 6);
    // Regression values for this instance.
    const std::size_t last = r.diagnostics.size() - 1;
    for (int j = 0; j < 2; ++j) {
      double best = 1e300;
      for (std::size_t i = last - 5; i < last; ++i)
        best = std::min(best, *r.diagnostics[i].dennis_more[j]);
      CHECK(best <= 0.01 * *r.diagnostics[0].dennis_more[j]);
    }
  }
}

TEST_CASE("eta = 0 and pqna_reg = 0 make NPQNA and PQNA identical") {
  const auto p = attach_nonsmooth(get_problem("BK1"), 9);
  SolverConfig a;
  a.eta = 0.0;
  a.pqna_reg = 0.0;
  SolverConfig b = a;
  b.variant = Variant::PQNA;
  const auto ra = run(p, vec({4.0, -2.5}), a), rb = run(p, vec({4.0, -2.5}), b);
  REQUIRE(ra.iterates.size() == rb.iterates.size());
  for (std::size_t k = 0; k < ra.iterates.size(); ++k)
    CHECK((ra.iterates[k].x - rb.iterates[k].x).lpNorm<Eigen::Infinity>() <= 1e-12);
}

} // TEST_SUITE
