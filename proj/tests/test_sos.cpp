#include <catch2/catch_amalgamated.hpp>

#include "funnelkit/sos.hpp"
#include "funnelkit/util/rng.hpp"

using namespace funnelkit;
using namespace funnelkit::sos;

namespace {
Polynomial x0() { return Polynomial::var(0); }
Polynomial x1() { return Polynomial::var(1); }

Polynomial random_poly(Rng& rng, const std::vector<VarId>& vars, int deg) {
  auto basis = monomial_basis(vars, deg);
  Polynomial p;
  for (auto& m : basis)
    if (rng.bernoulli(0.7)) p.add_term(m, rng.uniform(-1.5, 1.5));
  return p;
}
}  // namespace

TEST_CASE("check_sos: perfect square") {
  // x^2 + 2x + 1 = (x+1)^2, Gram [[1,1],[1,1]] over (1, x)
  Polynomial p = x0() * x0() + 2.0 * x0() + Polynomial(1.0);
  auto r = check_sos(p, 1e-8);
  REQUIRE(r.verdict == SosVerdict::Sos);
  REQUIRE(r.cert.residual <= 1e-8);
  REQUIRE(r.cert.basis.size() == 2);
  REQUIRE(r.cert.Q(0, 0) == Catch::Approx(1.0).margin(1e-5));
  REQUIRE(r.cert.Q(0, 1) == Catch::Approx(1.0).margin(1e-5));
  REQUIRE(r.cert.Q(1, 1) == Catch::Approx(1.0).margin(1e-5));
}

TEST_CASE("check_sos: negative somewhere") {
  Polynomial p = x0() * x0() - Polynomial(1.0);
  REQUIRE(check_sos(p).verdict == SosVerdict::NotSos);
}

TEST_CASE("check_sos: odd degree rejected without solving") {
  Polynomial p = x0() * x0() * x0() + Polynomial(1.0);
  REQUIRE(check_sos(p).verdict == SosVerdict::NotSos);
}

TEST_CASE("check_sos: Motzkin polynomial is nonnegative but not SOS") {
  Polynomial x = x0(), y = x1();
  Polynomial p = x * x * x * x * y * y + x * x * y * y * y * y -
                 3.0 * (x * x * y * y) + Polynomial(1.0);
  auto r = check_sos(p);
  REQUIRE(r.verdict == SosVerdict::NotSos);
  REQUIRE(r.t_star > 1e-3);  // solver evidence: a genuine eigenvalue shift is needed

  // sanity: numerically nonnegative on a grid
  for (double a = -2; a <= 2; a += 0.25)
    for (double b = -2; b <= 2; b += 0.25) {
      Eigen::VectorXd z(2);
      z << a, b;
      REQUIRE(p.eval(z) >= -1e-9);
    }
}

TEST_CASE("check_sos round-trip on random sums of squares") {
  Rng rng(101);
  for (int t = 0; t < 40; ++t) {
    int nvars = rng.uniform_int(1, 3);
    std::vector<VarId> vars;
    for (int i = 0; i < nvars; ++i) vars.push_back(i);
    Polynomial p;
    int nsq = rng.uniform_int(1, 3);
    for (int s = 0; s < nsq; ++s) {
      Polynomial q = random_poly(rng, vars, rng.uniform_int(1, 2));
      p += q * q;
    }
    if (p.is_zero()) continue;
    auto r = check_sos(p, 1e-8);
    INFO("t=" << t << " p=" << p.str());
    REQUIRE(r.verdict == SosVerdict::Sos);
    REQUIRE(r.cert.residual <= 1e-8 * std::max(1.0, p.max_abs_coeff()));

    // certificate implies nonnegativity at random points
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd z(nvars);
      for (int i = 0; i < nvars; ++i) z[i] = rng.uniform(-2, 2);
      REQUIRE(p.eval(z) >= -1e-6);
    }
  }
}

TEST_CASE("s_procedure: x >= 0 on {x - 1 >= 0}") {
  Program prog;
  DecPoly p(x0());
  auto frag = s_procedure(prog, p, {}, {x0() - Polynomial(1.0)}, {}, {0}, "t");
  prog.require_sos(frag.residual, "t");
  auto compiled = prog.compile();
  auto sol = conic::solve_sdp(compiled.sdp);
  REQUIRE(sol.status == conic::SolveStatus::Optimal);
  // multiplier L = 1 works: x - 1 (x - 1) = 1; solver may find any valid L
  Polynomial L = compiled.poly_value(sol, frag.ineq_multipliers[0]);
  Polynomial residual = compiled.poly_value(sol, frag.residual);
  auto rc = check_sos(residual, 1e-6);
  REQUIRE(rc.verdict == SosVerdict::Sos);
}

TEST_CASE("s_procedure: p = g is certified with L = 1") {
  Program prog;
  Polynomial g = Polynomial(1.0) - x0() * x0();
  auto frag = s_procedure(prog, DecPoly(g), {}, {g}, {}, {0}, "t");
  prog.require_sos(frag.residual, "t");
  auto compiled = prog.compile();
  auto sol = conic::solve_sdp(compiled.sdp);
  REQUIRE(sol.status == conic::SolveStatus::Optimal);
}

TEST_CASE("s_procedure: false implication is infeasible") {
  // x >= 0 does not imply x >= 1, at several multiplier degrees
  for (int deg : {0, 1, 2}) {
    Program prog;
    DecPoly p(x0() - Polynomial(1.0));
    auto frag = s_procedure(prog, p, {}, {x0()}, {}, {deg}, "t");
    prog.require_sos(frag.residual, "t");
    auto compiled = prog.compile();
    auto sol = conic::solve_sdp(compiled.sdp);
    INFO("multiplier degree " << deg);
    REQUIRE(sol.status == conic::SolveStatus::Infeasible);
  }
}

TEST_CASE("s_procedure: unfixable odd degree errors out") {
  Program prog;
  DecPoly p(x0() * x0() * x0());  // fixed cubic term, no multipliers
  REQUIRE_THROWS_AS(s_procedure(prog, p, {}, {}, {}, {}, "t"), std::invalid_argument);
}

TEST_CASE("bilinear product is rejected with names") {
  Program prog;
  DecPoly a = prog.add_free_poly(monomial_basis({0}, 1), "A");
  DecPoly b = prog.add_free_poly(monomial_basis({0}, 1), "B");
  try {
    DecPoly c = a * b;
    FAIL("expected BilinearError");
  } catch (const BilinearError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("A") != std::string::npos);
    REQUIRE(msg.find("B") != std::string::npos);
  }
}

TEST_CASE("compile recovers constraint polynomials from certificates") {
  // sigma SOS of degree 2, sigma(0) = 1, minimize sigma(1): optimum 0 via
  // sigma = (ax + b)^2 with b^2 = 1, minimize (a + b)^2 -> a = -b.
  Program prog;
  DecPoly sigma = prog.add_sos_poly(monomial_basis({0}, 1), "sigma");
  // sigma(0) = 1
  AffExpr at0;
  for (auto& [m, a] : sigma.terms())
    if (m.is_one()) at0 += a;
  prog.require_eq(at0 - AffExpr(1.0));
  // minimize sigma(1) = sum of all coefficients
  AffExpr at1;
  for (auto& [m, a] : sigma.terms()) at1 += a;
  prog.minimize(at1);
  auto compiled = prog.compile();
  auto sol = conic::solve_sdp(compiled.sdp);
  REQUIRE(sol.status == conic::SolveStatus::Optimal);
  REQUIRE(sol.primal_obj == Catch::Approx(0.0).margin(1e-5));

  Polynomial sig = compiled.poly_value(sol, sigma);
  Eigen::VectorXd z0(1), z1(1);
  z0 << 0;
  z1 << 1;
  REQUIRE(sig.eval(z0) == Catch::Approx(1.0).margin(1e-5));
  REQUIRE(sig.eval(z1) == Catch::Approx(0.0).margin(1e-4));

  // the recovered template is itself SOS (it was Gram-parameterized)
  auto rc = check_sos(sig, 1e-6);
  REQUIRE(rc.verdict == SosVerdict::Sos);
}

TEST_CASE("empty program compiles and solves trivially") {
  Program prog;
  auto compiled = prog.compile();
  auto sol = conic::solve_sdp(compiled.sdp);
  REQUIRE(sol.status == conic::SolveStatus::Optimal);
}

TEST_CASE("compile + recovery round trip on a quadratic-form identity") {
  // find P psd with x'Px = 2x0^2 + 3x1^2 exactly
  Program prog;
  MatVar P = prog.add_psd_matrix(2, "P");
  DecPoly v = prog.quad_form(P, {Monomial::var(0), Monomial::var(1)});
  Polynomial target = 2.0 * (x0() * x0()) + 3.0 * (x1() * x1());
  prog.require_eq_poly(v - DecPoly(target));
  auto compiled = prog.compile();
  auto sol = conic::solve_sdp(compiled.sdp);
  REQUIRE(sol.status == conic::SolveStatus::Optimal);
  Eigen::MatrixXd Pv = compiled.matrix_value(sol, P);
  REQUIRE(Pv(0, 0) == Catch::Approx(2.0).margin(1e-6));
  REQUIRE(Pv(1, 1) == Catch::Approx(3.0).margin(1e-6));
  REQUIRE(Pv(0, 1) == Catch::Approx(0.0).margin(1e-6));
}
