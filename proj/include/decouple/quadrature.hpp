#pragma once

#include <array>
#include <vector>

namespace decouple {

/// Symmetric rule on the reference triangle (0,0),(1,0),(0,1).
/// Points are barycentric (l0, l1, l2) with reference coordinates (l1, l2);
/// weights are positive and sum to the reference area 1/2.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

/// Rule exact for polynomials of total degree <= `degree`, 1 <= degree <= 8.
/// Degrees without a dedicated positive rule return the next higher one.
[[nodiscard]] const QuadratureRule& quadrature_rule(int degree);

inline constexpr int kMaxQuadratureDegree = 8;

}  // namespace decouple
