#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace stefan {

/// Built-in test functions for the weak formulation. All are smooth and
/// bounded on the half-line to the right of the front.
enum class TestFunction { one, exp_neg, cos_bump, exp_time_exp };

inline constexpr std::array<TestFunction, 4> kAllTestFunctions{
    TestFunction::one, TestFunction::exp_neg, TestFunction::cos_bump,
    TestFunction::exp_time_exp};

std::string_view name(TestFunction f);
std::optional<TestFunction> test_function_from_name(std::string_view s);

/// Parameters of g(x) = cos(x) * exp(-(x - c)^2 / (2 w^2)).
inline constexpr double kBumpCenter = 1.0;
inline constexpr double kBumpWidth = 0.5;

/// g, g', g'' at x.
struct BumpValues {
  double g, dg, d2g;
};
BumpValues cos_bump(double x);

}  // namespace stefan
