#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace kfp {

using Vec = std::vector<double>;

// A point X = (t, x, y, z) of the phase space R^{1+3d}. The same type carries
// group elements: the composition below is the left-invariant operation of the
// transport-diffusion flow, and the anisotropic dilation scales (t,x,y,z) with
// exponents (2,1,3,5).
struct PhasePoint {
    double t = 0.0;
    Vec x, y, z;

    PhasePoint() = default;
    PhasePoint(double t_, Vec x_, Vec y_, Vec z_);

    int dim() const { return static_cast<int>(x.size()); }
    static PhasePoint zero(int d);
};

// (t0,x0,y0,z0) o (t,x,y,z) = (t+t0, x+x0, y+y0-t*x0, z+z0-t*y0+(t^2/2)*x0)
PhasePoint compose(const PhasePoint& g, const PhasePoint& h);
PhasePoint inverse(const PhasePoint& g);
PhasePoint dilate(double r, const PhasePoint& X);

// max-abs componentwise distance, used by the property tests
double max_abs_diff(const PhasePoint& a, const PhasePoint& b);

enum class CylinderKind {
    past,      // time window (t0 - r^2, t0)
    symmetric  // time window (t0 - r^2, t0 + r^2)
};

// Skewed cylinder Q_{r,R}(X0) (or its symmetric variant). The y- and z-windows
// follow the group translation of the center: the constraints are
//   |x - x0| < r,
//   |y - y0 + (t-t0) x0| < r^3,
//   |z - z0 + (t-t0) y0 - ((t-t0)^2/2) x0| < R^5.
struct Cylinder {
    PhasePoint center;
    double r = 1.0;
    double R = 1.0;
    CylinderKind kind = CylinderKind::past;

    Cylinder() = default;
    Cylinder(PhasePoint c, double r_, double R_, CylinderKind k = CylinderKind::past);
};

bool cylinder_contains(const Cylinder& Q, const PhasePoint& X);

// Euclidean d-ball volume; d in {1,2} (membership works for every d,
// closed-form volumes are only needed for these two).
double ball_volume(int d, double rho);
double cylinder_volume(const Cylinder& Q);

// Time slice D_R(X0, t): the spatial section of Q_R(X0) at time t.
struct SpatialSlice {
    PhasePoint center;
    double R = 1.0;
    double t = 0.0;
};

bool slice_contains(const SpatialSlice& D, const Vec& x, const Vec& y, const Vec& z);

// Coefficient field sampler a(t,x,y,z) used by the oscillation functional.
using CoefficientSampler = std::function<double(double, const Vec&, const Vec&, const Vec&)>;

struct OscillationSpec {
    int time_nodes = 16;      // Gauss-Legendre nodes over the time window
    int pair_samples = 4096;  // Monte Carlo pairs per time node
    std::uint64_t seed = 1;
};

// Mean spatial oscillation of a coefficient field over the cylinder: the double
// average of |a(t,w1) - a(t,w2)| over D x D, averaged over the time window.
// Plain Lebesgue averages, no normalizing constant.
double oscillation(const CoefficientSampler& a, const Cylinder& Q, const OscillationSpec& spec);

}  // namespace kfp
