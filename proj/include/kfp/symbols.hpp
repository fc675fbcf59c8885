#pragma once

#include <vector>

#include "kfp/geometry.hpp"

namespace kfp {

// Dual point (xi, eta, zeta) of the spatial Fourier transform.
struct FrequencyPoint {
    Vec xi, eta, zeta;

    FrequencyPoint() = default;
    FrequencyPoint(Vec xi_, Vec eta_, Vec zeta_);
    int dim() const { return static_cast<int>(xi.size()); }
    static FrequencyPoint zero(int d);
};

double max_abs_diff(const FrequencyPoint& a, const FrequencyPoint& b);

// Symmetric d x d matrix, dense row-major storage.
struct SymMatrix {
    int d = 1;
    std::vector<double> a;  // d*d entries

    SymMatrix() : a(1, 1.0) {}
    static SymMatrix identity(int d, double scale = 1.0);
    static SymMatrix scalar(double value) { return identity(1, value); }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * d + j]; }
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * d + j]; }
    double quad_form(const Vec& v) const;            // v^T a v
    double bilinear(const Vec& u, const Vec& v) const;  // u^T a v
    std::vector<double> eigenvalues() const;  // Jacobi sweep, ascending
};

// Piecewise-constant-in-time elliptic coefficient a(t). Pieces live between
// consecutive breakpoints; beyond the first/last breakpoint the nearest piece
// extends as a constant. Each piece must satisfy
//   delta |xi|^2 <= xi^T a xi <= delta^{-1} |xi|^2.
class CoefficientPath {
public:
    CoefficientPath(std::vector<double> breakpoints, std::vector<SymMatrix> pieces, double delta);
    static CoefficientPath constant(const SymMatrix& a, double delta);
    static CoefficientPath scalar_constant(double a, double delta);

    int dim() const { return pieces_.front().d; }
    double ellipticity() const { return delta_; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<SymMatrix>& pieces() const { return pieces_; }

    const SymMatrix& at(double t) const;

    // the path t -> a(s * t); realizes the coefficient of a dilated solution
    CoefficientPath time_rescaled(double s) const;

private:
    std::vector<double> breaks_;
    std::vector<SymMatrix> pieces_;
    double delta_;
};

// Frequency transported along the characteristic through (t, w), evaluated at
// time t': (xi + (t'-t) eta + ((t'-t)^2/2) zeta, eta + (t'-t) zeta, zeta).
FrequencyPoint characteristic(double t, double t_prime, const FrequencyPoint& w);

// Exact integral of xi(tau)^T a(tau) xi(tau) over [t_prime, t], where xi(tau)
// is the characteristic through (t, w). The integrand is a quartic polynomial
// on each coefficient piece and is integrated in closed form.
double dissipation(const CoefficientPath& a, double t_prime, double t, const FrequencyPoint& w);

enum class SymbolKind { xx, y13, z15, xy16, transport_weight };

// |xi|^2, |eta|^{2/3}, |zeta|^{2/5}, |xi||eta|^{1/3}, or 1. All four nontrivial
// symbols are homogeneous of degree 2 under (xi,eta,zeta) -> (k xi, k^3 eta, k^5 zeta).
double frac_power_symbol(SymbolKind kind, const FrequencyPoint& w);

// Magnitude of the interpolation multiplier |xi||eta|^{1/3} / (|xi|^2 + |eta|^{2/3});
// 0 at the origin, bounded by 1/2, invariant under (xi,eta) -> (k xi, k^3 eta).
double multiplier_m(const Vec& xi, const Vec& eta);

}  // namespace kfp
