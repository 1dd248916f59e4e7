#include <catch2/catch_amalgamated.hpp>

#include "conjugen/expr.hpp"
#include "support/oracles.hpp"

using conjugen::cdouble;
using conjugen::HoloExpr;

TEST_CASE("parse accepts the grammar") {
  HoloExpr e = conjugen::parse("phi1^2 - phi2^2", 2);
  CHECK(conjugen::depth(e) == 3);
  CHECK(e.arity == 2);

  CHECK_NOTHROW(conjugen::parse("3 + 2*i", 1));
  CHECK_NOTHROW(conjugen::parse("exp(phi1)*sin(phi2)/cos(phi1) - log(2+phi2)", 2));
  CHECK_NOTHROW(conjugen::parse("  phi1   *(phi2+ 1.5e-2) ", 2));
  CHECK_NOTHROW(conjugen::parse("phi1^-2", 1));
  CHECK_NOTHROW(conjugen::parse("2^3", 1));
}

TEST_CASE("parse rejects out-of-range variables") {
  CHECK_THROWS_AS(conjugen::parse("phi3", 2), conjugen::ArityError);
  CHECK_THROWS_AS(conjugen::parse("phi0", 2), conjugen::ArityError);
  CHECK_THROWS_AS(conjugen::parse("phi1 + phi7", 4), conjugen::ArityError);
}

TEST_CASE("parse rejects non-holomorphic functions") {
  CHECK_THROWS_AS(conjugen::parse("conj(phi1)", 2), conjugen::NonHolomorphic);
  CHECK_THROWS_AS(conjugen::parse("abs(phi1)", 2), conjugen::NonHolomorphic);
  CHECK_THROWS_AS(conjugen::parse("Re(phi1)", 2), conjugen::NonHolomorphic);
  CHECK_THROWS_AS(conjugen::parse("sqrt(phi1)", 2), conjugen::NonHolomorphic);
}

TEST_CASE("parse reports syntax errors with position") {
  CHECK_THROWS_AS(conjugen::parse("", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("phi1 +", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("phi1^2.5", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("phi1^(2)", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("phi1^phi2", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("phi1^2^3", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("foo", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("phi", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("phi1 $ phi2", 2), conjugen::SyntaxError);
  CHECK_THROWS_AS(conjugen::parse("(phi1", 2), conjugen::SyntaxError);
  try {
    conjugen::parse("phi1 + $", 2);
    FAIL("expected SyntaxError");
  } catch (const conjugen::SyntaxError& err) {
    CHECK(err.position == 7);
  }
}

TEST_CASE("evaluate: product rule example") {
  HoloExpr e = conjugen::parse("phi1*phi2", 2);
  std::vector<cdouble> phi = {cdouble{2, 0}, cdouble{3, 0}};
  conjugen::EvalResult r = conjugen::evaluate(e, phi);
  CHECK(r.value == cdouble{6, 0});
  CHECK(r.grad[0] == cdouble{3, 0});
  CHECK(r.grad[1] == cdouble{2, 0});
  CHECK(r.hess[0][0] == cdouble{0, 0});
  CHECK(r.hess[0][1] == cdouble{1, 0});
  CHECK(r.hess[1][0] == cdouble{1, 0});
  CHECK(r.hess[1][1] == cdouble{0, 0});
}

TEST_CASE("evaluate: difference of squares at complex point") {
  HoloExpr e = conjugen::parse("phi1^2 - phi2^2", 2);
  std::vector<cdouble> phi = {cdouble{1, 0}, cdouble{0, 2}};
  conjugen::EvalResult r = conjugen::evaluate(e, phi);
  CHECK(r.value == cdouble{5, 0});
  CHECK(r.grad[0] == cdouble{2, 0});
  CHECK(r.grad[1] == cdouble{0, -4});
}

TEST_CASE("evaluate: unary minus and powers") {
  HoloExpr e = conjugen::parse("-phi1^2", 1);
  std::vector<cdouble> phi = {cdouble{2, 0}};
  CHECK(conjugen::evaluate_value(e, phi) == cdouble{-4, 0});

  HoloExpr inv = conjugen::parse("phi1^-2", 1);
  conjugen::EvalResult r = conjugen::evaluate(inv, phi);
  CHECK(std::abs(r.value - cdouble{0.25, 0}) < 1e-15);
  CHECK(std::abs(r.grad[0] - cdouble{-0.25, 0}) < 1e-15);
}

TEST_CASE("evaluate rejects poles and branch points") {
  std::vector<cdouble> at_one = {cdouble{1, 0}};
  std::vector<cdouble> at_zero = {cdouble{0, 0}};
  CHECK_THROWS_AS(conjugen::evaluate_value(conjugen::parse("1/(phi1 - 1)", 1), at_one),
                  conjugen::EvalDomainError);
  CHECK_THROWS_AS(conjugen::evaluate_value(conjugen::parse("log(phi1)", 1), at_zero),
                  conjugen::EvalDomainError);
  CHECK_THROWS_AS(conjugen::evaluate_value(conjugen::parse("phi1^-1", 1), at_zero),
                  conjugen::EvalDomainError);
  try {
    conjugen::evaluate_value(conjugen::parse("phi2/(phi1 - 1)", 2),
                             std::vector<cdouble>{cdouble{1, 0}, cdouble{2, 0}});
    FAIL("expected EvalDomainError");
  } catch (const conjugen::EvalDomainError& err) {
    CHECK(err.subexpression.find("phi1") != std::string::npos);
  }
}

TEST_CASE("evaluate rejects arity mismatch") {
  HoloExpr e = conjugen::parse("phi1", 2);
  std::vector<cdouble> phi = {cdouble{1, 0}};
  CHECK_THROWS_AS(conjugen::evaluate_value(e, phi), conjugen::ArityError);
}

TEST_CASE("AD gradient matches central finite differences") {
  std::mt19937_64 rng(0x5EED);
  for (const oracles::CorpusEntry& entry : oracles::corpus()) {
    HoloExpr e = conjugen::parse(entry.source, entry.arity);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<cdouble> phi =
          oracles::random_phi(rng, static_cast<std::size_t>(entry.arity), 0.2, 2.0);
      std::vector<cdouble> ad = conjugen::evaluate_gradient(e, phi);
      oracles::FdGradient fd = oracles::fd_gradient(e, phi);
      for (std::size_t j = 0; j < ad.size(); ++j) {
        INFO(entry.source << " component " << j);
        CHECK(oracles::rel_error(fd.real_axis[j], ad[j]) < 1e-7);
        CHECK(oracles::rel_error(fd.imag_axis[j], ad[j]) < 1e-7);
      }
    }
  }
}

TEST_CASE("AD Hessian is bitwise symmetric and matches gradient differences") {
  std::mt19937_64 rng(0xBADA55);
  for (const oracles::CorpusEntry& entry : oracles::corpus()) {
    HoloExpr e = conjugen::parse(entry.source, entry.arity);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<cdouble> phi =
          oracles::random_phi(rng, static_cast<std::size_t>(entry.arity), 0.2, 2.0);
      conjugen::EvalResult r = conjugen::evaluate(e, phi);
      auto fd = oracles::fd_hessian(e, phi);
      for (std::size_t i = 0; i < r.grad.size(); ++i)
        for (std::size_t j = 0; j < r.grad.size(); ++j) {
          CHECK(r.hess[i][j] == r.hess[j][i]);  // bitwise
          INFO(entry.source << " entry " << i << "," << j);
          CHECK(oracles::rel_error(fd[i][j], r.hess[i][j]) < 1e-7);
        }
    }
  }
}

TEST_CASE("printing and reparsing gives a structurally identical AST") {
  const char* sources[] = {
      "phi1^2 - phi2^2", "3 + 2*i", "exp(phi1)*sin(phi2)", "-phi1*phi2/(1+phi1)",
      "phi1^-3",         "((phi1))", "1.5e-2*phi2 - i",     "log(6 + phi1*phi2)",
  };
  for (const char* src : sources) {
    HoloExpr a = conjugen::parse(src, 2);
    std::string printed = conjugen::print(a);
    HoloExpr b = conjugen::parse(printed, 2);
    INFO(src << " -> " << printed);
    CHECK(conjugen::structurally_equal(a, b));
    CHECK(conjugen::print(b) == printed);
  }
}

TEST_CASE("evaluation is exact for literal arithmetic") {
  HoloExpr e = conjugen::parse("(3 + 2*i)*(1 - i)", 1);
  std::vector<cdouble> phi = {cdouble{0, 0}};
  CHECK(conjugen::evaluate_value(e, phi) == cdouble{5, -1});
}
