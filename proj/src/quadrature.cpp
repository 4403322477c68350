#include "decouple/quadrature.hpp"

#include "decouple/error.hpp"

namespace decouple {

namespace {

// Orbit generators; weights here sum to 1 and are halved at the end.
void add_centroid(QuadratureRule& r, double w) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(w);
}

void add_orbit3(QuadratureRule& r, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    for (const auto& p : {std::array<double, 3>{b, a, a}, std::array<double, 3>{a, b, a}, std::array<double, 3>{a, a, b}}) {
        r.points.push_back(p);
        r.weights.push_back(w);
    }
}

void add_orbit6(QuadratureRule& r, double a, double b, double w) {
    const double c = 1.0 - a - b;
    for (const auto& p : {std::array<double, 3>{a, b, c}, std::array<double, 3>{a, c, b}, std::array<double, 3>{b, a, c},
                          std::array<double, 3>{b, c, a}, std::array<double, 3>{c, a, b}, std::array<double, 3>{c, b, a}}) {
        r.points.push_back(p);
        r.weights.push_back(w);
    }
}

QuadratureRule finish(QuadratureRule r, int degree) {
    for (auto& w : r.weights) w *= 0.5;
    r.degree = degree;
    return r;
}

// Dunavant's rules, digits polished by Newton iteration on the moment equations.
QuadratureRule make_rule(int degree) {
    QuadratureRule r;
    switch (degree) {
        case 1:
            add_centroid(r, 1.0);
            return finish(r, 1);
        case 2:
            add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
            return finish(r, 2);
        case 3:
        case 4:
            add_orbit3(r, 0.44594849091596488632, 0.2233815896780114657);
            add_orbit3(r, 0.09157621350977074346, 0.10995174365532186764);
            return finish(r, 4);
        case 5:
            add_centroid(r, 0.225);
            add_orbit3(r, 0.47014206410511508977, 0.13239415278850618074);
            add_orbit3(r, 0.1012865073234563388, 0.1259391805448271526);
            return finish(r, 5);
        case 6:
            add_orbit3(r, 0.24928674517091042129, 0.11678627572637936603);
            add_orbit3(r, 0.06308901449150222834, 0.050844906370206816921);
            add_orbit6(r, 0.053145049844816947353, 0.31035245103378440542, 0.082851075618373575194);
            return finish(r, 6);
        case 7:
        case 8:
            add_centroid(r, 0.14431560767778716825);
            add_orbit3(r, 0.45929258829272315603, 0.095091634267284624794);
            add_orbit3(r, 0.17056930775176020662, 0.10321737053471825028);
            add_orbit3(r, 0.050547228317030975458, 0.032458497623198080311);
            add_orbit6(r, 0.0083947774099576053372, 0.26311282963463811342, 0.027230314174434994265);
            return finish(r, 8);
        default:
            throw InvalidArgument("quadrature_rule: degree must be in [1, 8]");
    }
}

}  // namespace

const QuadratureRule& quadrature_rule(int degree) {
    if (degree < 1 || degree > kMaxQuadratureDegree) {
        throw InvalidArgument("quadrature_rule: degree must be in [1, 8]");
    }
    static const std::array<QuadratureRule, kMaxQuadratureDegree> rules = [] {
        std::array<QuadratureRule, kMaxQuadratureDegree> out;
        for (int d = 1; d <= kMaxQuadratureDegree; ++d) out[static_cast<std::size_t>(d - 1)] = make_rule(d);
        return out;
    }();
    return rules[static_cast<std::size_t>(degree - 1)];
}

}  // namespace decouple
