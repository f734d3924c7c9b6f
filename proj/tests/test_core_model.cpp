#include "fixtures.hpp"

#include "npqn/config.hpp"
#include "npqn/problems.hpp"

#include <doctest.h>

using namespace npqn;
using npqn::test::vec;

TEST_SUITE("core_model") {

TEST_CASE("box needs lb < ub") {
  CHECK_THROWS_AS(Boxd(vec({0, 1}), vec({1, 1})), Error);
  CHECK_THROWS_AS(Boxd(vec({0}), vec({1, 2})), Error);
  const Boxd b(vec({-1, 0}), vec({1, 4}));
  CHECK(b.midpoint().isApprox(vec({0, 2})));
  CHECK(b.contains(vec({1, 4})));
  CHECK_FALSE(b.contains(vec({1.1, 4})));
}

TEST_CASE("evaluate_objectives") {
  SUBCASE("centered quadratic at its minimum") {
    const auto p = test::half_norm(2);
    CHECK(evaluate_objectives(p, vec({0, 0}))(0) == 0.0);
  }
  SUBCASE("zero smooth part plus L1 norm") {
    ProblemSpecd p = test::quadratic_problem({MatrixXd::Zero(2, 2)}, {VectorXd::Zero(2)}, test::cube(2, -5, 5));
    p.nonsmooth[0] = PolyhedralTermd(MatrixXd::Identity(2, 2), 1.0);
    CHECK(evaluate_objectives(p, vec({3, -4}))(0) == doctest::Approx(7.0).epsilon(1e-15));
  }
  SUBCASE("JOS1 at the origin") {
    const VectorXd F = evaluate_objectives(get_problem("JOS1"), vec({0, 0}));
    CHECK(F(0) == 0.0);
    CHECK(F(1) == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("domain tolerance") {
    const auto p = test::half_norm(1);
    CHECK_NOTHROW(evaluate_objectives(p, vec({-10 - 1e-13})));
    try {
      evaluate_objectives(p, vec({-10 - 1e-9}));
      FAIL("expected OutOfDomain");
    } catch (const Error &e) {
      CHECK(e.code() == Errc::OutOfDomain);
    }
  }
  SUBCASE("pure") {
    const ProblemSpecd p = attach_nonsmooth(get_problem("FDS", 5), 3);
    const VectorXd x = vec({0.1, -0.2, 0.3, 1.1, -1.7});
    const VectorXd a = evaluate_objectives(p, x), b = evaluate_objectives(p, x);
    CHECK((a.array() == b.array()).all());
  }
}

TEST_CASE("validate_problem") {
  SUBCASE("well-formed quadratic") {
    const auto p = test::quadratic_problem({MatrixXd::Identity(3, 3), 2 * MatrixXd::Identity(3, 3)},
                                           {VectorXd::Zero(3), VectorXd::Ones(3)}, test::cube(3, -2, 2));
    CHECK(validate_problem(p).ok());
  }
  SUBCASE("gradient off by a factor two") {
    auto p = test::quadratic_problem({2 * MatrixXd::Identity(2, 2)}, {VectorXd::Zero(2)}, test::cube(2, 1, 3));
    p.smooth[0].value = [](const VectorXd &x) { return x.squaredNorm(); };
    p.smooth[0].gradient = [](const VectorXd &x) -> VectorXd { return x; };
    p.smooth[0].hessian = nullptr;
    const auto r = validate_problem(p);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].magnitude == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("singular matrices") {
    CHECK_THROWS_AS(PolyhedralTermd(MatrixXd::Ones(2, 2), 1.0), Error);
    auto p = test::half_norm(2);
    MatrixXd G = MatrixXd::Ones(2, 2);
    G(1, 1) += 1e-10;
    p.nonsmooth[0] = PolyhedralTermd(G, 1.0);
    const auto r = validate_problem(p);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].what.find("ill-conditioned") != std::string::npos);
  }
  SUBCASE("dimension mismatch") {
    auto p = test::half_norm(2);
    p.nonsmooth.push_back(PolyhedralTermd::zero(2));
    CHECK_FALSE(validate_problem(p).ok());
  }
}

TEST_CASE("solver config") {
  const SolverConfig d;
  CHECK(d.rho == 0.5);
  CHECK(d.tau == 1e-4);
  CHECK(d.mu == 1.0);
  CHECK(d.eta == 0.85);
  CHECK(d.d_tol == 1e-6);
  CHECK(d.max_iter == 300);
  CHECK(d.max_backtracks == 50);
  CHECK(d.spd_floor == 1e-8);
  CHECK(d.pqna_reg == 1e-3);
  CHECK(d.subproblem_tol == 1e-8);
  CHECK(SolverConfig::benchmark_preset().eta == 1e-4);
  CHECK_NOTHROW(d.validate());

  SolverConfig c;
  c.rho = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.eta = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);

  try {
    set_config_value(c, "etaa", "0.5");
    FAIL("expected InvalidConfig");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::InvalidConfig);
    CHECK(std::string(e.what()).find("'eta'") != std::string::npos);
  }
  set_config_value(c, "variant", "PQNA");
  CHECK(c.variant == Variant::PQNA);
  CHECK_THROWS_AS(set_config_value(c, "max_iter", "3.5"), Error);
}

} // TEST_SUITE
