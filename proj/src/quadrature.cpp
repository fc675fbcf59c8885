#include "kfp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace kfp {

void QuadratureSpec::validate() const {
    if (nodes_xi < 2 || nodes_eta < 2 || nodes_zeta < 2 || nodes_time < 2)
        throw std::invalid_argument("QuadratureSpec: node counts must be >= 2");
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw std::invalid_argument("QuadratureSpec: rel_tol must lie in (0,1)");
    if (max_intervals < 1) throw std::invalid_argument("QuadratureSpec: max_intervals must be positive");
    if (trunc_radius_xi < 0 || trunc_radius_eta < 0 || trunc_radius_zeta < 0)
        throw std::invalid_argument("QuadratureSpec: truncation radii must be >= 0");
}

namespace {

std::pair<std::vector<double>, std::vector<double>> compute_gl(int n) {
    // Newton iteration on Legendre polynomials, symmetric nodes.
    std::vector<double> x(n), w(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double xi = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * xi * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (xi * p0 - p1) / (xi * xi - 1.0);
            const double dx = p0 / pp;
            xi -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        x[i] = -xi;
        x[n - 1 - i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    return {std::move(x), std::move(w)};
}

}  // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
    return it->second;
}

AxisGrid axis_grid_plain(double lo, double hi, int n) {
    const auto& [gx, gw] = gauss_legendre(n);
    AxisGrid g;
    g.node.resize(n);
    g.weight.resize(n);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int i = 0; i < n; ++i) {
        g.node[i] = mid + half * gx[i];
        g.weight[i] = half * gw[i];
    }
    return g;
}

namespace {

// nodes for v in (0, len] under v = s^power, appended with sign
void append_power_segment(AxisGrid& g, double len, int n, int power, double sign) {
    if (len <= 0.0 || n <= 0) return;
    const auto& [gx, gw] = gauss_legendre(n);
    const double s_hi = std::pow(len, 1.0 / power);
    const double half = 0.5 * s_hi;
    for (int i = 0; i < n; ++i) {
        const double s = half + half * gx[i];
        const double jac = power * std::pow(s, power - 1);
        g.node.push_back(sign * std::pow(s, power));
        g.weight.push_back(half * gw[i] * jac);
    }
}

}  // namespace

AxisGrid axis_grid_power(double lo, double hi, int n, int power) {
    AxisGrid g;
    if (lo >= 0.0 || hi <= 0.0) return axis_grid_plain(lo, hi, n);
    // split evenly so that linearly rescaled problems visit linearly rescaled nodes
    const int half_n = n / 2;
    append_power_segment(g, -lo, half_n, power, -1.0);
    append_power_segment(g, hi, n - half_n, power, 1.0);
    return g;
}

GkEstimate gk15(const std::function<std::complex<double>(double)>& f, double a, double b) {
    const detail::GkCell r = detail::gk15_cell(f, a, b);
    return {r.integral, r.error};
}

std::complex<double> integrate_cells(const std::function<std::complex<double>(double)>& f,
                                     const std::vector<double>& cuts, double rel_tol,
                                     int max_intervals) {
    if (cuts.size() < 2) return 0.0;
    return adaptive_cells(f, cuts.data(), static_cast<int>(cuts.size()), rel_tol, 0.0,
                          max_intervals);
}

}  // namespace kfp
