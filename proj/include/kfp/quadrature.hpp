#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "kfp/errors.hpp"

namespace kfp {

// Controls for every numerical integral in the library: truncation radii and
// node counts for the tensorized frequency quadrature, plus the tolerance and
// budget of the adaptive time integration.
struct QuadratureSpec {
    // frequency axes; 0 = derive the truncation interval from source decay
    double trunc_radius_xi = 0.0;
    double trunc_radius_eta = 0.0;
    double trunc_radius_zeta = 0.0;
    int nodes_xi = 24;
    int nodes_eta = 22;
    int nodes_zeta = 18;
    int nodes_time = 6;  // Gauss-Legendre nodes per time cell of the norm integrals

    double rel_tol = 1e-10;   // adaptive time-integration target
    int max_intervals = 20000;
    double tail_eps = 3e-5;   // Gaussian tail level used to pick truncation radii
                              // (enters the norm integrals squared)

    void validate() const;
};

// Gauss-Legendre rule on [-1,1]; cached per n, thread-safe.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

// One-dimensional quadrature grid (nodes with weights on some interval,
// possibly after a power substitution that absorbs |v|^alpha kinks at 0).
struct AxisGrid {
    std::vector<double> node;
    std::vector<double> weight;
};

AxisGrid axis_grid_plain(double lo, double hi, int n);

// Grid for an axis whose integrands carry |v|^(fractional) factors at v = 0.
// On each signed segment touching 0 the substitution v = s^power makes the
// factor analytic; away from 0 a plain rule is used.
AxisGrid axis_grid_power(double lo, double hi, int n, int power);

struct GkEstimate {
    std::complex<double> integral;
    double error;
};

// Gauss-Kronrod 7/15 on [a,b].
GkEstimate gk15(const std::function<std::complex<double>(double)>& f, double a, double b);

// Adaptive Gauss-Kronrod subdivision over the cells delimited by `cuts`
// (ascending, at least two entries). Mandatory splitting at every interior cut
// lets integrands with breakpoints (source profiles, coefficient pieces) stay
// piecewise-analytic. Throws ToleranceError when the interval budget runs out.
std::complex<double> integrate_cells(const std::function<std::complex<double>(double)>& f,
                                     const std::vector<double>& cuts, double rel_tol,
                                     int max_intervals);

namespace detail {

// Gauss-Kronrod 7-15 abscissae and weights (positive half).
inline constexpr double kK15Node[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kK15Weight[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kG7Weight[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkCell {
    double a, b;
    std::complex<double> integral;
    double error;
};

template <class F>
GkCell gk15_cell(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::complex<double> resk = 0.0, resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = half * kK15Node[i];
        const std::complex<double> v = (i == 7) ? f(mid) : f(mid - dx) + f(mid + dx);
        resk += kK15Weight[i] * v;
        if (i % 2 == 1) resg += kG7Weight[i / 2] * v;
    }
    return {a, b, half * resk, std::abs(half * (resk - resg))};
}

}  // namespace detail

// Inline-friendly variant of integrate_cells: accepts any callable, plus an
// absolute error floor so that integrals which are tiny on the caller's scale
// are not refined beyond usefulness.
template <class F>
std::complex<double> adaptive_cells(F&& f, const double* cuts, int ncuts, double rel_tol,
                                    double abs_tol, int max_intervals) {
    std::vector<detail::GkCell> active;
    active.reserve(16);
    std::complex<double> total = 0.0;
    double total_err = 0.0, total_mag = 0.0;
    for (int i = 0; i + 1 < ncuts; ++i) {
        if (!(cuts[i + 1] > cuts[i])) continue;
        active.push_back(detail::gk15_cell(f, cuts[i], cuts[i + 1]));
        total += active.back().integral;
        total_err += active.back().error;
        total_mag += std::abs(active.back().integral);
    }
    int used = static_cast<int>(active.size());
    while (total_err > std::max(rel_tol * std::max(total_mag, 1e-300), abs_tol)) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < active.size(); ++i)
            if (active[i].error > active[worst].error) worst = i;
        const detail::GkCell cur = active[worst];
        if (used + 2 > max_intervals)
            throw ToleranceError("adaptive_cells: interval budget exhausted");
        const double mid = 0.5 * (cur.a + cur.b);
        if (!(mid > cur.a && mid < cur.b)) break;
        detail::GkCell lhs = detail::gk15_cell(f, cur.a, mid);
        detail::GkCell rhs = detail::gk15_cell(f, mid, cur.b);
        used += 2;
        total += lhs.integral + rhs.integral - cur.integral;
        total_err += lhs.error + rhs.error - cur.error;
        total_mag += std::abs(lhs.integral) + std::abs(rhs.integral) - std::abs(cur.integral);
        active[worst] = lhs;
        active.push_back(rhs);
    }
    return total;
}

}  // namespace kfp
