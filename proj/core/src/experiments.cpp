#include "sgiga/experiments.hpp"

#include <cmath>
#include <numbers>

namespace sgiga::bench {

namespace {

constexpr double kPi = std::numbers::pi;

Jet circle_jet(int region, const Vec2& x, double a0, double a1) {
    const Vec2 c(1.0 / std::sqrt(5.0), 1.0 / std::sqrt(3.0));
    const double r0 = 1.0 / std::sqrt(10.0);
    const double r04 = std::pow(r0, 4);
    const double X = x.x() - c.x();
    const double Y = x.y() - c.y();
    const double w = X * X - Y * Y;
    Jet j;
    if (region == 0) {
        const double A = 2.0 * a1 / ((a1 - a0) * r04);
        j.u = A * w;
        j.grad = {2.0 * A * X, -2.0 * A * Y};
        return j;
    }
    const double B = (a1 + a0) / ((a1 - a0) * r04);
    const double R2 = X * X + Y * Y;
    const double R4 = R2 * R2;
    const double R6 = R4 * R2;
    // B (X^2 - Y^2) + (X^2 - Y^2) / R^4; both terms harmonic.
    j.u = B * w + w / R4;
    j.grad = {2.0 * B * X + 2.0 * X / R4 - 4.0 * X * w / R6, -2.0 * B * Y - 2.0 * Y / R4 - 4.0 * Y * w / R6};
    return j;
}

Jet line_jet(int region, const Vec2& x, double a0, double a1) {
    const Vec2 c(1.0 + 1.0 / kPi, 1.0);
    const Vec2 d = x - c;
    const double r = d.norm();
    double theta = std::atan2(d.y(), d.x());
    if (theta > 0.0) theta -= 2.0 * kPi;
    const double psi = theta + 5.0 * kPi / 6.0;
    const double k = region == 0 ? a0 / a1 : 1.0;
    const double al = 4.0 / 3.0;
    const double ca = std::cos(al * psi);
    const double sa = std::sin(al * psi);
    Jet j;
    j.u = std::pow(r, al) * (ca + k * sa);
    const double dr = al * std::pow(r, al - 1.0) * (ca + k * sa);
    const double dpsi = al * std::pow(r, al - 1.0) * (-sa + k * ca);  // (1/r) d/dpsi
    const Vec2 er(std::cos(theta), std::sin(theta));
    const Vec2 et(-std::sin(theta), std::cos(theta));
    j.grad = dr * er + dpsi * et;
    const double xy = x.x() * x.y();
    j.u += std::sin(xy);
    j.grad += std::cos(xy) * Vec2(x.y(), x.x());
    j.laplacian = -x.squaredNorm() * std::sin(xy);
    return j;
}

Jet arc_jet(int region, const Vec2& p, double a0, double a1) {
    const double s = p.x();
    const double t = p.y();
    const double th0 = std::atan(2.0 * kPi * std::tan(kPi / 8.0));
    const double k = region == 0 ? a0 / a1 : 1.0;
    const double L = s * std::cos(th0) + t * std::sin(th0) + k * (t * std::cos(th0) - s * std::sin(th0));
    const double Ls = std::cos(th0) - k * std::sin(th0);
    const double Lt = std::sin(th0) + k * std::cos(th0);
    const double S = (s - 2.0) * (s - 1.0);
    const double Sd = 2.0 * s - 3.0;
    const double T = t * (t - 2.0 * kPi);
    const double Td = 2.0 * t - 2.0 * kPi;
    const double us = Sd * T * L + S * T * Ls;
    const double ut = S * Td * L + S * T * Lt;
    const double uss = 2.0 * T * L + 2.0 * Sd * T * Ls;
    const double utt = 2.0 * S * L + 2.0 * S * Td * Lt;
    Jet j;
    j.u = S * T * L;
    const Vec2 er(std::cos(t), std::sin(t));
    const Vec2 et(-std::sin(t), std::cos(t));
    j.grad = us * er + (ut / s) * et;
    j.laplacian = uss + us / s + utt / (s * s);
    return j;
}

Jet robustness_jet(int region, const Vec2& x, double a0, double a1, double delta) {
    const double a = region == 0 ? a0 : a1;
    Jet j;
    j.u = (x.y() - delta) / a + std::sin(x.x());
    j.grad = {std::cos(x.x()), 1.0 / a};
    j.laplacian = -std::sin(x.x());
    return j;
}

void derive_data(Experiment& ex) {
    auto& d = ex.data;
    d.a_pos = ex.omega0 == Side::Positive ? ex.a0 : ex.a1;
    d.a_neg = ex.omega0 == Side::Positive ? ex.a1 : ex.a0;
    auto exact = ex.exact;
    const double a0 = ex.a0;
    const double a1 = ex.a1;
    const Side omega0 = ex.omega0;
    const auto region = [omega0](Side s) { return s == omega0 ? 0 : 1; };
    const auto coef = [a0, a1](int r) { return r == 0 ? a0 : a1; };
    d.f = [exact, region, coef](Side s, const fem::Location& l) {
        const int r = region(s);
        return -coef(r) * exact(r, l).laplacian;
    };
    d.g = [exact, region, coef](Side s, const fem::Location& l, const Vec2& n) {
        const int r = region(s);
        return coef(r) * exact(r, l).grad.dot(n);
    };
    d.q = [exact, region, coef](const fem::Location& l, const Vec2& n) {
        const int rp = region(Side::Positive);
        const int rn = region(Side::Negative);
        return coef(rp) * exact(rp, l).grad.dot(n) - coef(rn) * exact(rn, l).grad.dot(n);
    };
    d.u = [exact, region](Side s, const fem::Location& l) { return exact(region(s), l).u; };
    d.grad_u = [exact, region](Side s, const fem::Location& l) { return exact(region(s), l).grad; };
}

}  // namespace

std::string_view experiment_name(ExperimentTag tag) {
    switch (tag) {
        case ExperimentTag::Line: return "line";
        case ExperimentTag::Circle: return "circle";
        case ExperimentTag::Arc: return "arc";
        case ExperimentTag::Robustness: return "robustness";
    }
    return "?";
}

std::optional<ExperimentTag> parse_experiment(std::string_view name) {
    for (auto t : {ExperimentTag::Line, ExperimentTag::Circle, ExperimentTag::Arc, ExperimentTag::Robustness})
        if (experiment_name(t) == name) return t;
    return std::nullopt;
}

std::pair<double, double> default_coefficients(ExperimentTag tag) {
    switch (tag) {
        case ExperimentTag::Line: return {20.0, 1.0};
        case ExperimentTag::Circle: return {10.0, 1.0};
        case ExperimentTag::Arc: return {20.0, 1.0};
        case ExperimentTag::Robustness: return {10.0, 1.0};
    }
    return {1.0, 1.0};
}

Experiment define_experiment(ExperimentTag tag, double a0, double a1, double delta) {
    if (!(a0 > 0.0) || !(a1 > 0.0)) throw InvalidArgument("define_experiment: coefficients must be positive");
    Experiment ex;
    ex.tag = tag;
    ex.a0 = a0;
    ex.a1 = a1;
    switch (tag) {
        case ExperimentTag::Circle: {
            if (a0 == a1) throw InvalidArgument("define_experiment: circle requires a0 != a1");
            const Vec2 c(1.0 / std::sqrt(5.0), 1.0 / std::sqrt(3.0));
            // Omega_0 is the disc; the exterior is the level-set positive side.
            ex.iface = std::make_shared<geom::CircleInterface>(c, 1.0 / std::sqrt(10.0),
                                                               geom::CircleInterface::PositiveSide::Outside);
            ex.omega0 = Side::Negative;
            ex.exact = [a0, a1](int r, const fem::Location& l) { return circle_jet(r, l.x, a0, a1); };
            break;
        }
        case ExperimentTag::Line: {
            const Vec2 c(1.0 + 1.0 / kPi, 1.0);
            const Vec2 dir(std::cos(kPi / 6.0), std::sin(kPi / 6.0));
            ex.iface = std::make_shared<geom::LineInterface>(geom::LineInterface::through(c - dir, c));
            ex.omega0 = Side::Positive;
            ex.exact = [a0, a1](int r, const fem::Location& l) { return line_jet(r, l.x, a0, a1); };
            break;
        }
        case ExperimentTag::Arc: {
            ex.domain = Box{{1.0, 0.0}, {2.0, 2.0 * kPi}};
            const double c = 2.0 * kPi * std::tan(kPi / 8.0);
            ex.iface = std::make_shared<geom::LineInterface>(geom::LineInterface::through({0.0, 0.0}, {1.0, c}));
            ex.omega0 = Side::Positive;
            ex.exact = [a0, a1](int r, const fem::Location& l) { return arc_jet(r, l.p, a0, a1); };
            ex.data.geometry = spline::GeometryMap::polar();
            break;
        }
        case ExperimentTag::Robustness: {
            if (!(delta > 0.0) || !(delta < 1.0)) throw InvalidArgument("define_experiment: delta must lie in (0, 1)");
            ex.delta = delta;
            // The enriched (positive) side is the strip below Gamma; Omega_0 lies above.
            ex.iface = std::make_shared<geom::LineInterface>(Vec2(0.0, delta), Vec2(0.0, -1.0));
            ex.omega0 = Side::Negative;
            ex.exact = [a0, a1, delta](int r, const fem::Location& l) {
                return robustness_jet(r, l.x, a0, a1, delta);
            };
            break;
        }
    }
    derive_data(ex);
    return ex;
}

}  // namespace sgiga::bench
