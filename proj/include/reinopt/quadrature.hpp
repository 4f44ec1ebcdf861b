#ifndef REINOPT_QUADRATURE_HPP
#define REINOPT_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "reinopt/errors.hpp"

namespace reinopt {

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
void gk15(const F& f, double a, double b, double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kKronrodNodes[i]);
        fv[14 - i] = f(c + h * kKronrodNodes[i]);
    }
    fv[7] = f(c);
    double kron = kKronrodWeights[7] * fv[7];
    double gauss = kGaussWeights[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        kron += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (fv[i] + fv[14 - i]);
    }
    value = kron * h;
    error = std::abs((kron - gauss) * h);
}

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

} // namespace detail

// Adaptive Gauss-Kronrod integration with relative tolerance. Throws
// QuadratureFailure when the interval budget is exhausted first.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-10,
                 std::size_t max_intervals = 4096) {
    if (a == b) return 0.0;
    std::priority_queue<detail::Interval> heap;
    detail::Interval root{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, root.value, root.error);
    heap.push(root);
    double total = root.value;
    double total_err = root.error;
    std::size_t n = 1;
    while (total_err > rel_tol * std::max(1e-300, std::abs(total))) {
        if (n >= max_intervals) {
            throw QuadratureFailure("adaptive quadrature: interval budget exhausted");
        }
        detail::Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        detail::Interval left{worst.a, mid, 0.0, 0.0};
        detail::Interval right{mid, worst.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.error);
        detail::gk15(f, right.a, right.b, right.value, right.error);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    return total;
}

} // namespace reinopt

#endif
