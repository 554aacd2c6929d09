#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kwseq {

/// Default tolerance of the scalar minimiser: DBL_EPSILON^(1/4), about 1.22e-4.
inline const double default_scalar_tolerance = std::pow(std::numeric_limits<double>::epsilon(), 0.25);

struct ScalarMinimum {
    double x;
    double fx;
    int evaluations;
};

/// Brent's derivative-free minimiser on [lo, hi]: golden-section search
/// accelerated by successive parabolic interpolation. Never evaluates f at
/// the endpoints.
template <class F>
ScalarMinimum brent_minimize(F&& f, double lo, double hi, double tol = default_scalar_tolerance) {
    if (!(lo < hi)) {
        throw std::invalid_argument("brent_minimize requires lo < hi");
    }
    const double golden = (3.0 - std::sqrt(5.0)) * 0.5;
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());

    double a = lo;
    double b = hi;
    double v = a + golden * (b - a);
    double w = v;
    double x = v;
    double d = 0.0;
    double e = 0.0;
    double fx = f(x);
    double fv = fx;
    double fw = fx;
    const double tol3 = tol / 3.0;
    int evaluations = 1;

    for (;;) {
        const double xm = (a + b) * 0.5;
        const double tol1 = sqrt_eps * std::abs(x) + tol3;
        const double t2 = tol1 * 2.0;
        if (std::abs(x - xm) <= t2 - (b - a) * 0.5) break;

        double p = 0.0;
        double q = 0.0;
        double r = 0.0;
        if (std::abs(e) > tol1) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = (q - r) * 2.0;
            if (q > 0.0) {
                p = -p;
            } else {
                q = -q;
            }
            r = e;
            e = d;
        }

        double u;
        if (std::abs(p) >= std::abs(q * 0.5 * r) || p <= q * (a - x) || p >= q * (b - x)) {
            e = x < xm ? b - x : a - x;
            d = golden * e;
        } else {
            d = p / q;
            u = x + d;
            if (u - a < t2 || b - u < t2) {
                d = x >= xm ? -tol1 : tol1;
            }
        }

        if (std::abs(d) >= tol1) {
            u = x + d;
        } else if (d > 0.0) {
            u = x + tol1;
        } else {
            u = x - tol1;
        }

        const double fu = f(u);
        ++evaluations;

        if (fu <= fx) {
            if (u < x) {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x) {
                a = u;
            } else {
                b = u;
            }
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    return {x, fx, evaluations};
}

}  // namespace kwseq
