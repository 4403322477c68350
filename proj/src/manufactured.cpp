#include "decouple/manufactured.hpp"

#include <cmath>
#include <numbers>

#include "decouple/error.hpp"

namespace decouple {

using std::numbers::pi;

Profile Profile::polynomial(std::vector<double> ascending) {
    Profile p;
    p.poly_ = std::move(ascending);
    return p;
}

Profile Profile::trig(std::vector<Mode> modes, double constant) {
    Profile p;
    p.poly_ = {constant};
    p.modes_ = std::move(modes);
    return p;
}

double Profile::derivative(int order, double t) const {
    double s = 0.0;
    // d^k/dt^k t^n = n!/(n-k)! t^(n-k), accumulated by Horner on the shifted coefficients
    for (std::size_t n = poly_.size(); n-- > static_cast<std::size_t>(order);) {
        double falling = 1.0;
        for (int i = 0; i < order; ++i) falling *= static_cast<double>(n - static_cast<std::size_t>(i));
        s = s * t + falling * poly_[n];
    }
    for (const auto& m : modes_) {
        const double w = m.j * pi;
        const double scale = std::pow(w, order);
        const double phase = w * t + order * pi / 2.0;
        s += scale * (m.sin_coeff * std::sin(phase) + m.cos_coeff * std::cos(phase));
    }
    return s;
}

const FieldJet& ManufacturedCase::field(const std::string& name) const {
    auto it = exact.find(name);
    if (it == exact.end()) {
        throw InvalidArgument("manufactured case '" + id + "' has no closed-form field '" + name + "'");
    }
    return it->second;
}

FieldJet scalar_jet(const Separable& u) {
    return {scalar_field([u](const Point& p) { return u.d(0, 0, p); }),
            vector_field([u](const Point& p) { return std::array<double, 2>{u.d(1, 0, p), u.d(0, 1, p)}; })};
}

FieldJet curl_jet(const Separable& u) {
    Field value = vector_field([u](const Point& p) { return std::array<double, 2>{u.d(0, 1, p), -u.d(1, 0, p)}; });
    Field grad{4, [u](const Point& p, std::span<double> out) {
                   out[0] = u.d(1, 1, p);
                   out[1] = u.d(0, 2, p);
                   out[2] = -u.d(2, 0, p);
                   out[3] = -u.d(1, 1, p);
               }};
    return {std::move(value), std::move(grad)};
}

namespace {

const Profile kSin = Profile::trig({{1, 1.0, 0.0}});
// sin^2(pi t) = 1/2 - cos(2 pi t)/2
const Profile kSin2 = Profile::trig({{2, 0.0, -0.5}}, 0.5);
// sin^3(pi t) = (3 sin(pi t) - sin(3 pi t))/4
const Profile kSin3 = Profile::trig({{1, 0.75, 0.0}, {3, -0.25, 0.0}});
// t^2 (1-t)^2
const Profile kBubble2 = Profile::polynomial({0.0, 0.0, 1.0, -2.0, 1.0});
// t^3 (1-t)^3
const Profile kBubble3 = Profile::polynomial({0.0, 0.0, 0.0, 1.0, -3.0, 3.0, -1.0});

double laplacian(const Separable& u, const Point& p) { return u.d(2, 0, p) + u.d(0, 2, p); }
double bilaplacian(const Separable& u, const Point& p) { return u.d(4, 0, p) + 2.0 * u.d(2, 2, p) + u.d(0, 4, p); }
double trilaplacian(const Separable& u, const Point& p) {
    return u.d(6, 0, p) + 3.0 * u.d(4, 2, p) + 3.0 * u.d(2, 4, p) + u.d(0, 6, p);
}

}  // namespace

ManufacturedCase poisson_sine_case() {
    const Separable u{kSin, kSin};
    ManufacturedCase c;
    c.id = "poisson_sine";
    c.regularity = "smooth, H^1_0";
    c.load = scalar_field([u](const Point& p) { return -laplacian(u, p); });
    c.exact.emplace("u", scalar_jet(u));
    return c;
}

ManufacturedCase stokes_bubble_case() {
    const Separable psi{kBubble2, kBubble2};
    const Separable pr{Profile::polynomial({-0.25, 0.0, 0.0, 1.0}), Profile::polynomial({1.0})};
    ManufacturedCase c;
    c.id = "stokes_bubble";
    c.regularity = "polynomial, velocity in H^1_0 and divergence-free, mean-zero pressure";
    c.load = vector_field([psi, pr](const Point& p) {
        return std::array<double, 2>{-(psi.d(2, 1, p) + psi.d(0, 3, p)) + pr.d(1, 0, p),
                                     psi.d(3, 0, p) + psi.d(1, 2, p) + pr.d(0, 1, p)};
    });
    c.exact.emplace("phi", curl_jet(psi));
    c.exact.emplace("p", scalar_jet(pr));
    return c;
}

ManufacturedCase biharmonic_case() {
    const Separable u{kSin2, kSin2};
    ManufacturedCase c;
    c.id = "biharmonic_sin2";
    c.regularity = "smooth, H^2_0";
    c.load = scalar_field([u](const Point& p) { return bilaplacian(u, p); });
    c.exact.emplace("u", scalar_jet(u));
    c.exact.emplace("phi", curl_jet(u));
    return c;
}

ManufacturedCase perturbed_case(double eps) {
    const Separable u{kSin2, kSin2};
    ManufacturedCase c;
    c.id = "perturbed_sin2";
    c.regularity = "smooth, H^2_0";
    c.load = scalar_field([u, e2 = eps * eps](const Point& p) { return e2 * bilaplacian(u, p) - laplacian(u, p); });
    c.exact.emplace("u", scalar_jet(u));
    c.exact.emplace("phi", curl_jet(u));
    return c;
}

ManufacturedCase hhj_case() {
    const Separable u{kSin3, kSin3};
    ManufacturedCase c;
    c.id = "hhj_sin3";
    c.regularity = "smooth, H^2_0 with Delta u = 0 on the boundary";
    c.load = scalar_field([u](const Point& p) { return bilaplacian(u, p); });
    c.exact.emplace("u", scalar_jet(u));
    c.exact.emplace("p", curl_jet(u));
    c.exact.emplace("w", FieldJet{scalar_field([u](const Point& p) { return -laplacian(u, p); }),
                                  vector_field([u](const Point& p) {
                                      return std::array<double, 2>{-(u.d(3, 0, p) + u.d(1, 2, p)),
                                                                   -(u.d(2, 1, p) + u.d(0, 3, p))};
                                  })});
    c.exact.emplace("sigma", FieldJet{tensor_field([u](const Point& p) {
                                          return std::array<double, 3>{-u.d(2, 0, p), -u.d(1, 1, p), -u.d(0, 2, p)};
                                      }),
                                      Field{6, [u](const Point& p, std::span<double> out) {
                                                out[0] = -u.d(3, 0, p);
                                                out[1] = -u.d(2, 1, p);
                                                out[2] = -u.d(2, 1, p);
                                                out[3] = -u.d(1, 2, p);
                                                out[4] = -u.d(1, 2, p);
                                                out[5] = -u.d(0, 3, p);
                                            }}});
    return c;
}

ManufacturedCase triharmonic_case() {
    const Separable u{kBubble3, kBubble3};
    ManufacturedCase c;
    c.id = "triharmonic_poly";
    c.regularity = "polynomial, H^3_0";
    c.load = scalar_field([u](const Point& p) { return -trilaplacian(u, p); });
    c.exact.emplace("u", scalar_jet(u));
    return c;
}

ManufacturedCase zero_case(const ManufacturedCase& like) {
    ManufacturedCase c;
    c.id = like.id + "_zero";
    c.regularity = like.regularity;
    c.load = Field{like.load.n_components, [](const Point&, std::span<double> out) {
                       for (auto& v : out) v = 0.0;
                   }};
    for (const auto& [name, jet] : like.exact) {
        auto zero = [](int n) {
            return Field{n, [](const Point&, std::span<double> out) {
                             for (auto& v : out) v = 0.0;
                         }};
        };
        c.exact.emplace(name, FieldJet{zero(jet.value.n_components), zero(jet.gradient.n_components)});
    }
    return c;
}

}  // namespace decouple
