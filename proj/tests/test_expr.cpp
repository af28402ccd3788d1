#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace specgeo;
using testing_support::point;

namespace {

cplx eval_at(const std::string& src, int n, std::initializer_list<cplx> z) {
  return evaluate(parse_expression(src, n), point(z));
}

template <class E>
ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const E& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::spec_invalid;
}

}  // namespace

TEST(Parse, QuadraticPrepotentialValue) {
  const cplx v = eval_at("(i/2)*(z1^2 + z2^2)", 2, {1.0, cplx(0, 2)});
  EXPECT_NEAR(v.real(), 0.0, 1e-15);
  EXPECT_NEAR(v.imag(), -1.5, 1e-15);
}

TEST(Parse, QuadraticPrepotentialNodeCount) {
  EXPECT_EQ(parse_expression("(i/2)*(z1^2 + z2^2)", 2).node_count(), 7u);
}

TEST(Parse, CubicAtUnitPoint) {
  const cplx v = eval_at("z1^3 / z2", 2, {1.0, 1.0});
  EXPECT_EQ(v, cplx(1.0, 0.0));
}

TEST(Parse, ZeroIndexIsSyntaxError) {
  EXPECT_THROW(parse_expression("z1^3 / z0", 2), SyntaxError);
}

TEST(Parse, IndexBeyondDimensionIsUnknownVariable) {
  try {
    parse_expression("z1 + z3", 2);
    FAIL() << "expected UnknownVariable";
  } catch (const UnknownVariable& e) {
    EXPECT_EQ(e.index(), 3);
    EXPECT_EQ(e.code(), ErrorCode::unknown_variable);
  }
}

TEST(Parse, MalformedInputs) {
  for (const char* src : {"", "z1 +", "(z1", "z1)", "z1^1.5", "z", "foo(z1)",
                          "z1 ** 2", "2 z1", "exp z1"})
    EXPECT_THROW(parse_expression(src, 2), SyntaxError) << src;
}

TEST(Parse, SyntaxErrorReportsPosition) {
  try {
    parse_expression("z1 + $", 1);
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(Parse, UnaryMinusBindsToFactor) {
  EXPECT_EQ(eval_at("-z1^2", 1, {2.0}), cplx(-4.0));
  EXPECT_EQ(eval_at("(-z1)^2", 1, {2.0}), cplx(4.0));
  EXPECT_EQ(eval_at("3 - -z1", 1, {2.0}), cplx(5.0));
}

TEST(Parse, UnicodeMinusAccepted) {
  EXPECT_EQ(eval_at("z1 \xE2\x88\x92 1", 1, {3.0}), cplx(2.0));
}

TEST(Parse, NumbersConstantsAndFunctions) {
  EXPECT_NEAR(std::abs(eval_at("1.5e-3 * z1", 1, {2.0}) - cplx(3e-3)), 0.0, 1e-18);
  EXPECT_NEAR(std::abs(eval_at("exp(i*pi)", 1, {0.0}) - cplx(-1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(eval_at("log(z1)", 1, {-1.0}) - cplx(0, M_PI)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(eval_at("z1^(-2)", 1, {2.0}) - cplx(0.25)), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(eval_at("z1^0", 1, {0.0}) - cplx(1.0)), 0.0, 0.0);
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_EQ(eval_at("2 + 3 * z1", 1, {2.0}), cplx(8.0));
  EXPECT_EQ(eval_at("8 / 4 / z1", 1, {2.0}), cplx(1.0));
  EXPECT_EQ(eval_at("10 - 4 - z1", 1, {1.0}), cplx(5.0));
  EXPECT_EQ(eval_at("2 * z1^3", 1, {2.0}), cplx(16.0));
}

TEST(Evaluate, PoleHit) {
  const Expression e = parse_expression("z1^3 / z2", 2);
  EXPECT_EQ(code_of<EvaluationError>([&] { evaluate(e, point({1.0, 0.0})); }),
            ErrorCode::pole_hit);
  const Expression lit = parse_expression("1/0 + z1", 1);
  EXPECT_EQ(code_of<EvaluationError>([&] { evaluate(lit, point({1.0})); }),
            ErrorCode::pole_hit);
}

TEST(Evaluate, BranchPoint) {
  const Expression e = parse_expression("log(z1)", 1);
  EXPECT_EQ(code_of<EvaluationError>([&] { evaluate(e, point({0.0})); }),
            ErrorCode::branch_point);
}

TEST(Evaluate, NegativePowerAtZeroIsPole) {
  const Expression e = parse_expression("z1^(-1)", 1);
  EXPECT_EQ(code_of<EvaluationError>([&] { evaluate(e, point({0.0})); }),
            ErrorCode::pole_hit);
}

TEST(Evaluate, DimensionMismatchRejected) {
  const Expression e = parse_expression("z1", 2);
  EXPECT_THROW(evaluate(e, point({1.0})), std::invalid_argument);
}

// print() output must parse back to an expression with the same values.
TEST(Print, RoundTripPreservesValues) {
  const std::vector<std::string> sources = {
      "(i/2)*(z1^2 + z2^2)",
      "0.5*(2*i*z1^2 + 2*z1*z2 + i*z2^2)",
      "z1^3/z2",
      "i*z1 + z2^2",
      "-z1^2 - (-z2)^3 + 1.25e-2",
      "exp(z1 * z2) / (1 + z1^2)",
      "log(2 + z1) * z2^(-2) - pi",
      "z1 - (z2 - z1) / (3 - i)",
  };
  std::mt19937_64 rng(7);
  for (const auto& src : sources) {
    const Expression e = parse_expression(src, 2);
    const std::string printed = print(e);
    const Expression back = parse_expression(printed, 2);
    EXPECT_EQ(print(back), printed) << src;
    for (int k = 0; k < 25; ++k) {
      const VectorXcd z = testing_support::random_point(rng, 2, 0.5, 1.5);
      const cplx a = evaluate(e, z);
      const cplx b = evaluate(back, z);
      EXPECT_LE(std::abs(a - b), 1e-14 * (1 + std::abs(a))) << src << " -> " << printed;
    }
  }
}

TEST(Print, DoublesSurviveRoundTrip) {
  const Expression e = parse_expression("0.1 * z1 + 0.30000000000000004", 1);
  const Expression back = parse_expression(print(e), 1);
  EXPECT_EQ(evaluate(e, point({1.0})), evaluate(back, point({1.0})));
}
