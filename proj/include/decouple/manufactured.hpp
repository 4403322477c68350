#pragma once

#include <map>
#include <string>
#include <vector>

#include "decouple/assembly.hpp"

namespace decouple {

/// g(t) = sum_k c_k t^k + sum_j (s_j sin(j pi t) + c_j cos(j pi t)), with exact
/// derivatives of any order.
class Profile {
public:
    struct Mode {
        int j;
        double sin_coeff;
        double cos_coeff;
    };

    static Profile polynomial(std::vector<double> ascending);
    static Profile trig(std::vector<Mode> modes, double constant = 0.0);

    [[nodiscard]] double derivative(int order, double t) const;

private:
    std::vector<double> poly_;
    std::vector<Mode> modes_;
};

/// u(x, y) = a(x) b(y).
struct Separable {
    Profile a;
    Profile b;

    [[nodiscard]] double d(int dx, int dy, const Point& p) const { return a.derivative(dx, p.x) * b.derivative(dy, p.y); }
};

/// Exact fields of a manufactured solution keyed by stage name, plus the load.
struct ManufacturedCase {
    std::string id;
    std::string regularity;
    Field load;
    std::map<std::string, FieldJet> exact;

    /// Throws InvalidArgument when the stage field is not available in closed form.
    [[nodiscard]] const FieldJet& field(const std::string& name) const;
    [[nodiscard]] bool has(const std::string& name) const { return exact.count(name) != 0; }
};

/// u = sin(pi x) sin(pi y), -Delta u = f.
[[nodiscard]] ManufacturedCase poisson_sine_case();
/// phi = curl(x^2 (1-x)^2 y^2 (1-y)^2), p = x^3 - 1/4, -Delta phi + grad p = f.
[[nodiscard]] ManufacturedCase stokes_bubble_case();
/// u = sin^2(pi x) sin^2(pi y) in H^2_0, eps^2 Delta^2 u - Delta u = f; eps = infinity
/// is not representable, so `biharmonic_case` gives Delta^2 u = f directly.
[[nodiscard]] ManufacturedCase biharmonic_case();
[[nodiscard]] ManufacturedCase perturbed_case(double eps);
/// u = sin^3(pi x) sin^3(pi y), Delta^2 u = f, Delta u = 0 on the boundary, so
/// w = -Delta u, p = curl u and sigma = -grad^2 u hold exactly.
[[nodiscard]] ManufacturedCase hhj_case();
/// u = x^3 (1-x)^3 y^3 (1-y)^3 in H^3_0, -Delta^3 u = f.
[[nodiscard]] ManufacturedCase triharmonic_case();
/// Zero load with zero exact fields for every stage of `like`.
[[nodiscard]] ManufacturedCase zero_case(const ManufacturedCase& like);

/// Scalar jet of a separable function.
[[nodiscard]] FieldJet scalar_jet(const Separable& u);
/// Jet of curl u = (d2 u, -d1 u).
[[nodiscard]] FieldJet curl_jet(const Separable& u);

}  // namespace decouple
