#pragma once

#include <complex>
#include <vector>

#include "kfp/quadrature.hpp"
#include "kfp/symbols.hpp"

namespace kfp {

using Complex = std::complex<double>;

enum class TimeShape { indicator, smooth_bump };

// Compactly supported time factor. The smooth bump is the normalized
// polynomial (4 (t-s0)(s1-t) / (s1-s0)^2)^order, which keeps the family closed
// under the parabolic time rescaling t -> t / r^2.
struct TimeProfile {
    double s0 = -1.0;
    double s1 = 0.0;
    TimeShape shape = TimeShape::indicator;
    int order = 2;  // used by smooth_bump
    double amplitude = 1.0;

    double operator()(double t) const;
};

// One spatial axis of a packet: ((v-c)/sigma)^n exp(-(v-c)^2/(2 sigma^2)) exp(i m v).
// Its Fourier transform is known in closed form for n <= 4.
struct AxisFactor {
    double center = 0.0;
    double width = 1.0;   // sigma > 0
    int hermite = 0;      // monomial order n, capped at 4
    double modulation = 0.0;
};

struct SpatialPacket {
    std::vector<AxisFactor> x, y, z;  // one factor per coordinate axis

    int dim() const { return static_cast<int>(x.size()); }
    Complex fourier_factor(const FrequencyPoint& w) const;
    Complex physical_factor(const Vec& xv, const Vec& yv, const Vec& zv) const;
};

struct Packet {
    TimeProfile time;
    SpatialPacket space;
    Complex coeff = 1.0;
};

struct AxisInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct FrequencyBounds {
    std::vector<AxisInterval> xi, eta, zeta;
};

// Source family f(t,x,y,z): a finite sum of separable Gaussian-Hermite packets
// with compact time support. The spectral solver consumes its spatial Fourier
// transform F(t, xi, eta, zeta); the convention is g^(v) = int g e^{-i x.v} dx.
class TrialFunction {
public:
    TrialFunction() = default;
    explicit TrialFunction(std::vector<Packet> packets);

    int dim() const;
    bool empty() const { return packets_.empty(); }
    const std::vector<Packet>& packets() const { return packets_; }

    Complex f_hat(double t, const FrequencyPoint& w) const;
    Complex eval_physical(double t, const Vec& x, const Vec& y, const Vec& z) const;

    double time_support_lo() const;
    double time_support_hi() const;
    std::vector<double> time_breakpoints() const;  // sorted, unique

    // per-axis intervals outside which every packet transform is below
    // tail_eps relative to its peak
    FrequencyBounds frequency_bounds(double tail_eps) const;

    // the family X -> f(r^2 t, r x, r^3 y, r^5 z); amplitudes are untouched
    // (equation factors such as r^2 are the caller's business)
    TrialFunction dilated(double r) const;
    TrialFunction with_amplitude_factor(Complex factor) const;

private:
    std::vector<Packet> packets_;
};

// || f ||_{L^2} over the full support via Parseval, with the convention's
// (2 pi)^{-3d/2} normalization applied once.
double rhs_l2_norm(const TrialFunction& trial, double lambda, const QuadratureSpec& quad);

}  // namespace kfp
