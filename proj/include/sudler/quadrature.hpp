#pragma once

#include <cmath>
#include <functional>

#include "sudler/errors.hpp"

namespace sudler {

// Adaptive Simpson with the usual Richardson acceptance test.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 60) {
    struct Impl {
        F& f;
        int max_depth;
        double recurse(double a, double m, double b, double fa, double fm, double fb, double whole,
                       double tol, int depth) {
            double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            double flm = f(lm), frm = f(rm);
            double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            double delta = left + right - whole;
            if (depth >= max_depth || std::fabs(delta) <= 15.0 * tol)
                return left + right + delta / 15.0;
            return recurse(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
                   recurse(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        }
    };
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    Impl impl{f, max_depth};
    return impl.recurse(a, m, b, fa, fm, fb, whole, tol, 0);
}

// integral of log|2 sin(pi x)| over [0, t] for t in [0, 1].  The
// integrable log singularities at 0 and 1 are handled by splitting off
// log(2 pi x) (resp. the mirrored piece) whose antiderivative
// x (log(2 pi x) - 1) is closed form; the remainder log(sin(pi x)/(pi x))
// is smooth and goes to adaptive Simpson.
inline double integral_log2sin(double t, double tol) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("integral_log2sin: t must be in [0,1]");
    if (t == 0.0) return 0.0;

    auto smooth = [](double x) { // log(sin(pi x)/(pi x)), extended by 0 at x = 0
        if (x == 0.0) return 0.0;
        const double pi = 3.14159265358979323846;
        return std::log(std::sin(pi * x) / (pi * x));
    };
    auto closed = [](double x) { // antiderivative of log(2 pi x)
        if (x == 0.0) return 0.0;
        const double pi = 3.14159265358979323846;
        return x * (std::log(2.0 * pi * x) - 1.0);
    };
    const double cut = 0.0625;

    // mirrored tail near 1: integral_{1-a}^{1} log(2 sin pi x) dx
    //                      = integral_0^a log(2 sin pi u) du
    if (t > 1.0 - cut) {
        double head = integral_log2sin(1.0 - cut, 0.5 * tol);
        double tail_full = integral_log2sin(cut, 0.25 * tol);
        double tail_miss = integral_log2sin(1.0 - t, 0.25 * tol);
        return head + (tail_full - tail_miss);
    }
    if (t <= cut)
        return closed(t) + adaptive_simpson(smooth, 0.0, t, 0.5 * tol);
    double head = closed(cut) + adaptive_simpson(smooth, 0.0, cut, 0.5 * tol);
    const double pi = 3.14159265358979323846;
    auto direct = [pi](double x) { return std::log(2.0 * std::sin(pi * x)); };
    return head + adaptive_simpson(direct, cut, t, 0.5 * tol);
}

} // namespace sudler
