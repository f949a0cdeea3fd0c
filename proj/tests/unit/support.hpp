#pragma once

#include "sgiga/common.hpp"

#include <random>

namespace sgiga::test {

/// Fixed-seed generator so failures replay.
inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline Vec2 uniform_point(const Box& b) { return {uniform(b.lo.x(), b.hi.x()), uniform(b.lo.y(), b.hi.y())}; }

}  // namespace sgiga::test

#include "sgiga/splines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

namespace sgiga::test {

/// Max |sum c_k N_k - f| over a (n+1) x (n+1) lattice on element e, edges included.
inline double element_max_error(const spline::SplineSpace2D& space, std::span<const double> c,
                                const std::function<double(const Vec2&)>& f, int e, int n = 6) {
    const Box b = space.element_box(e);
    double worst = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const Vec2 p(b.lo.x() + b.width() * i / n, b.lo.y() + b.height() * j / n);
            const auto tb = space.eval(e, p);
            double v = 0.0;
            for (int r = 0; r < 9; ++r) v += c[static_cast<std::size_t>(tb.index[r])] * tb.value[r];
            worst = std::max(worst, std::abs(v - f(p)));
        }
    return worst;
}

}  // namespace sgiga::test
