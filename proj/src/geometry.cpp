#include "kfp/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kfp/quadrature.hpp"
#include "kfp/rng.hpp"

namespace kfp {

namespace {

void check_finite(const PhasePoint& X) {
    auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(X.t)) throw std::invalid_argument("PhasePoint: non-finite time component");
    for (double v : X.x)
        if (bad(v)) throw std::invalid_argument("PhasePoint: non-finite x component");
    for (double v : X.y)
        if (bad(v)) throw std::invalid_argument("PhasePoint: non-finite y component");
    for (double v : X.z)
        if (bad(v)) throw std::invalid_argument("PhasePoint: non-finite z component");
}

void check_dims(const PhasePoint& a, const PhasePoint& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("PhasePoint: dimension mismatch");
}

}  // namespace

PhasePoint::PhasePoint(double t_, Vec x_, Vec y_, Vec z_)
    : t(t_), x(std::move(x_)), y(std::move(y_)), z(std::move(z_)) {
    if (x.empty() || x.size() != y.size() || x.size() != z.size())
        throw std::invalid_argument("PhasePoint: x, y, z must share dimension d >= 1");
    check_finite(*this);
}

PhasePoint PhasePoint::zero(int d) {
    return PhasePoint(0.0, Vec(d, 0.0), Vec(d, 0.0), Vec(d, 0.0));
}

PhasePoint compose(const PhasePoint& g, const PhasePoint& h) {
    check_dims(g, h);
    const int d = g.dim();
    PhasePoint out = PhasePoint::zero(d);
    out.t = h.t + g.t;
    for (int i = 0; i < d; ++i) {
        out.x[i] = h.x[i] + g.x[i];
        out.y[i] = h.y[i] + g.y[i] - h.t * g.x[i];
        out.z[i] = h.z[i] + g.z[i] - h.t * g.y[i] + 0.5 * h.t * h.t * g.x[i];
    }
    return out;
}

PhasePoint inverse(const PhasePoint& g) {
    const int d = g.dim();
    PhasePoint out = PhasePoint::zero(d);
    out.t = -g.t;
    for (int i = 0; i < d; ++i) {
        out.x[i] = -g.x[i];
        out.y[i] = -g.y[i] - g.t * g.x[i];
        out.z[i] = -g.z[i] - g.t * g.y[i] - 0.5 * g.t * g.t * g.x[i];
    }
    return out;
}

PhasePoint dilate(double r, const PhasePoint& X) {
    if (!(r > 0.0)) throw std::invalid_argument("dilate: scaling parameter must be positive");
    const int d = X.dim();
    PhasePoint out = PhasePoint::zero(d);
    const double r2 = r * r, r3 = r2 * r, r5 = r3 * r2;
    out.t = r2 * X.t;
    for (int i = 0; i < d; ++i) {
        out.x[i] = r * X.x[i];
        out.y[i] = r3 * X.y[i];
        out.z[i] = r5 * X.z[i];
    }
    return out;
}

double max_abs_diff(const PhasePoint& a, const PhasePoint& b) {
    check_dims(a, b);
    double m = std::abs(a.t - b.t);
    for (int i = 0; i < a.dim(); ++i) {
        m = std::max(m, std::abs(a.x[i] - b.x[i]));
        m = std::max(m, std::abs(a.y[i] - b.y[i]));
        m = std::max(m, std::abs(a.z[i] - b.z[i]));
    }
    return m;
}

Cylinder::Cylinder(PhasePoint c, double r_, double R_, CylinderKind k)
    : center(std::move(c)), r(r_), R(R_), kind(k) {
    if (!(r > 0.0) || !(R > 0.0)) throw std::invalid_argument("Cylinder: radii must be positive");
}

namespace {

double norm2(const Vec& v, const Vec& c, const Vec& shift) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double dvi = v[i] - c[i] + shift[i];
        s += dvi * dvi;
    }
    return std::sqrt(s);
}

}  // namespace

bool cylinder_contains(const Cylinder& Q, const PhasePoint& X) {
    check_dims(Q.center, X);
    const int d = X.dim();
    const double dt = X.t - Q.center.t;
    const double r2 = Q.r * Q.r;
    if (Q.kind == CylinderKind::past) {
        if (!(dt > -r2 && dt < 0.0)) return false;
    } else {
        if (!(std::abs(dt) < r2)) return false;
    }
    Vec zero(d, 0.0), yshift(d), zshift(d);
    for (int i = 0; i < d; ++i) {
        yshift[i] = dt * Q.center.x[i];
        zshift[i] = dt * Q.center.y[i] - 0.5 * dt * dt * Q.center.x[i];
    }
    if (!(norm2(X.x, Q.center.x, zero) < Q.r)) return false;
    if (!(norm2(X.y, Q.center.y, yshift) < Q.r * Q.r * Q.r)) return false;
    const double R5 = std::pow(Q.R, 5);
    return norm2(X.z, Q.center.z, zshift) < R5;
}

double ball_volume(int d, double rho) {
    switch (d) {
        case 1: return 2.0 * rho;
        case 2: return std::numbers::pi * rho * rho;
        default:
            throw std::invalid_argument("ball_volume: closed forms provided for d in {1,2} only");
    }
}

double cylinder_volume(const Cylinder& Q) {
    const int d = Q.center.dim();
    const double height = (Q.kind == CylinderKind::past) ? Q.r * Q.r : 2.0 * Q.r * Q.r;
    return height * ball_volume(d, Q.r) * ball_volume(d, std::pow(Q.r, 3)) *
           ball_volume(d, std::pow(Q.R, 5));
}

bool slice_contains(const SpatialSlice& D, const Vec& x, const Vec& y, const Vec& z) {
    const int d = D.center.dim();
    if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d ||
        static_cast<int>(z.size()) != d)
        throw std::invalid_argument("slice_contains: dimension mismatch");
    const double dt = D.t - D.center.t;
    Vec zero(d, 0.0), yshift(d), zshift(d);
    for (int i = 0; i < d; ++i) {
        yshift[i] = dt * D.center.x[i];
        zshift[i] = dt * D.center.y[i] - 0.5 * dt * dt * D.center.x[i];
    }
    return norm2(x, D.center.x, zero) < D.R && norm2(y, D.center.y, yshift) < std::pow(D.R, 3) &&
           norm2(z, D.center.z, zshift) < std::pow(D.R, 5);
}

namespace {

// uniform point in the d-ball of radius rho (rejection; d <= 3 in practice)
Vec sample_ball(Rng& rng, int d, double rho) {
    Vec v(d);
    for (;;) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            v[i] = rng.uniform(-1.0, 1.0);
            s += v[i] * v[i];
        }
        if (s < 1.0) break;
    }
    for (int i = 0; i < d; ++i) v[i] *= rho;
    return v;
}

}  // namespace

double oscillation(const CoefficientSampler& a, const Cylinder& Q, const OscillationSpec& spec) {
    if (spec.time_nodes < 1 || spec.pair_samples < 1)
        throw std::invalid_argument("oscillation: node counts must be positive");
    const int d = Q.center.dim();
    const double t0 = Q.center.t;
    const double r3 = std::pow(Q.r, 3), R5 = std::pow(Q.R, 5);
    const AxisGrid tg = axis_grid_plain(t0 - Q.r * Q.r, t0, spec.time_nodes);
    const double window = Q.r * Q.r;

    Rng rng(spec.seed);
    double acc = 0.0;
    Vec x1(d), y1(d), z1(d), x2(d), y2(d), z2(d);
    for (std::size_t k = 0; k < tg.node.size(); ++k) {
        const double t = tg.node[k];
        const double dt = t - t0;
        double mean = 0.0;
        for (int s = 0; s < spec.pair_samples; ++s) {
            // sample the skewed slice: shift the ball samples by the transported center
            for (int pair = 0; pair < 2; ++pair) {
                Vec bx = sample_ball(rng, d, Q.r);
                Vec by = sample_ball(rng, d, r3);
                Vec bz = sample_ball(rng, d, R5);
                Vec& x = pair ? x2 : x1;
                Vec& y = pair ? y2 : y1;
                Vec& z = pair ? z2 : z1;
                for (int i = 0; i < d; ++i) {
                    x[i] = Q.center.x[i] + bx[i];
                    y[i] = Q.center.y[i] - dt * Q.center.x[i] + by[i];
                    z[i] = Q.center.z[i] - dt * Q.center.y[i] + 0.5 * dt * dt * Q.center.x[i] + bz[i];
                }
            }
            mean += std::abs(a(t, x1, y1, z1) - a(t, x2, y2, z2));
        }
        acc += tg.weight[k] * (mean / spec.pair_samples);
    }
    return acc / window;
}

}  // namespace kfp
