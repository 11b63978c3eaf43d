#ifndef SPRINGY_ROOTFIND_HPP
#define SPRINGY_ROOTFIND_HPP

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>

namespace springy {

// Brent's method on a bracketing interval [a,b] with f(a)*f(b) <= 0.
// Returns the root to absolute x-tolerance `tol`.
template <typename F>
double brent(F&& f, double a, double b, double fa, double fb, double tol,
             int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double eps = std::numeric_limits<double>::epsilon();
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic / secant step
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

template <typename F>
double brent(F&& f, double a, double b, double tol, int max_iter = 200) {
    return brent(f, a, b, f(a), f(b), tol, max_iter);
}

// First root of f in (a,b], located by scanning n equal subintervals for a
// sign change and refining with Brent. The sign at `a` may be supplied for
// the common case where f(a) is exactly zero but the relevant sign is known
// from a derivative.
template <typename F>
std::optional<double> first_root_scan(F&& f, double a, double b, int n,
                                      double tol, double f_a_sign) {
    if (!(b > a) || n < 1) return std::nullopt;
    const double dt = (b - a) / n;
    double t0 = a;
    double f0 = f_a_sign;
    for (int i = 1; i <= n; ++i) {
        const double t1 = (i == n) ? b : a + i * dt;
        const double f1 = f(t1);
        if (f0 == 0.0) {
            f0 = f1; // degenerate start; defer to next node
            t0 = t1;
            continue;
        }
        if ((f0 > 0.0) != (f1 > 0.0) || f1 == 0.0) {
            return brent(f, t0, t1, f0, f1, tol);
        }
        t0 = t1;
        f0 = f1;
    }
    return std::nullopt;
}

} // namespace springy

#endif
