#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stefan/params.hpp"

using namespace stefan;

TEST(Params, ReduceMapsToRhoSigmaAlpha) {
  PhysicalParams p{0.5, 2.0, 0.5, 0.1};
  const auto r = reduce(p, 0.75);
  EXPECT_DOUBLE_EQ(r.sigma, 1.0);
  EXPECT_DOUBLE_EQ(r.rho, 0.5);
  EXPECT_DOUBLE_EQ(r.alpha, 0.75);
  EXPECT_DOUBLE_EQ(r.idiosyncratic_vol(), std::sqrt(0.75));
  EXPECT_DOUBLE_EQ(r.common_vol(), 0.5);
  EXPECT_DOUBLE_EQ(r.kappa(), 0.5);
  EXPECT_DOUBLE_EQ(r.theta(), 0.5);
}

TEST(Params, ValidationNamesTheConstraint) {
  EXPECT_FALSE(validate(PhysicalParams{}).has_value());
  EXPECT_EQ(validate({0.0, 1.0, 0.0, 0.0})->constraint, "kappa");
  EXPECT_EQ(validate({0.5, -1.0, 0.0, 0.0})->constraint, "lambda");
  EXPECT_EQ(validate({0.5, 1.0, 0.0, -0.1})->constraint, "s0");
  EXPECT_EQ(validate({0.5, 1.0, 1.0, 0.0})->constraint, "parabolicity");
  EXPECT_EQ(validate({0.5, 1.0, -1.0, 0.0})->constraint, "parabolicity");
  EXPECT_EQ(validate({0.5, 1.0, std::nan(""), 0.0})->constraint, "parabolicity");
  EXPECT_FALSE(validate({0.5, 1.0, 0.999, 0.0}).has_value());
}

TEST(Params, ReduceRejectsBadInput) {
  EXPECT_THROW(reduce({0.5, 1.0, 2.0, 0.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(reduce(PhysicalParams{}, -1.0), std::invalid_argument);
  EXPECT_NO_THROW(reduce(PhysicalParams{}, 0.0));
}
