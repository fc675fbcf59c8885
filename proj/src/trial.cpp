#include "kfp/trial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace kfp {

namespace {

constexpr int kMaxHermite = 4;
const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

// probabilists' Hermite polynomial He_n
double hermite_he(int n, double s) {
    double h0 = 1.0, h1 = s;
    if (n == 0) return h0;
    if (n == 1) return h1;
    for (int k = 1; k < n; ++k) {
        const double h2 = s * h1 - k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

// i^{-n} cycle used by the transform of s^n e^{-s^2/2}
Complex minus_i_pow(int n) {
    switch (n & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

void validate_axis(const AxisFactor& a) {
    if (!(a.width > 0.0)) throw std::invalid_argument("AxisFactor: width must be positive");
    if (a.hermite < 0 || a.hermite > kMaxHermite)
        throw std::invalid_argument("AxisFactor: hermite order must lie in [0,4]");
}

// transform of ((u)/sigma)^n e^{-u^2/(2 sigma^2)}:
//   sigma sqrt(2 pi) (-i)^n He_n(sigma v) e^{-(sigma v)^2 / 2}
Complex centered_transform(const AxisFactor& a, double v) {
    const double sv = a.width * v;
    return a.width * kSqrt2Pi * minus_i_pow(a.hermite) * hermite_he(a.hermite, sv) *
           std::exp(-0.5 * sv * sv);
}

Complex axis_transform(const AxisFactor& a, double v) {
    const double vs = v - a.modulation;
    const Complex phase = std::exp(Complex(0.0, -a.center * vs));
    return phase * centered_transform(a, vs);
}

Complex axis_physical(const AxisFactor& a, double u) {
    const double s = (u - a.center) / a.width;
    const double mono = std::pow(s, a.hermite);
    return mono * std::exp(-0.5 * s * s) * std::exp(Complex(0.0, a.modulation * u));
}

AxisInterval axis_bound(const AxisFactor& a, double tail_eps) {
    // e^{-(sigma (v-m))^2/2} < eps  for |v-m| > W / sigma; the Hermite factor
    // only shifts the effective tail by O(sqrt(n)).
    const double W =
        std::sqrt(std::max(2.0 * std::log(1.0 / tail_eps), 1.0)) + 1.0 + 0.5 * a.hermite;
    return {a.modulation - W / a.width, a.modulation + W / a.width};
}

void merge(AxisInterval& acc, const AxisInterval& b) {
    acc.lo = std::min(acc.lo, b.lo);
    acc.hi = std::max(acc.hi, b.hi);
}

}  // namespace

double TimeProfile::operator()(double t) const {
    if (t <= s0 || t >= s1) return 0.0;
    if (shape == TimeShape::indicator) return amplitude;
    const double half = 0.5 * (s1 - s0);
    const double u = (t - s0) * (s1 - t) / (half * half);
    double p = 1.0;
    for (int k = 0; k < order; ++k) p *= u;
    return amplitude * p;
}

Complex SpatialPacket::fourier_factor(const FrequencyPoint& w) const {
    Complex prod = 1.0;
    for (int i = 0; i < dim(); ++i) {
        prod *= axis_transform(x[i], w.xi[i]);
        prod *= axis_transform(y[i], w.eta[i]);
        prod *= axis_transform(z[i], w.zeta[i]);
    }
    return prod;
}

Complex SpatialPacket::physical_factor(const Vec& xv, const Vec& yv, const Vec& zv) const {
    Complex prod = 1.0;
    for (int i = 0; i < dim(); ++i) {
        prod *= axis_physical(x[i], xv[i]);
        prod *= axis_physical(y[i], yv[i]);
        prod *= axis_physical(z[i], zv[i]);
    }
    return prod;
}

TrialFunction::TrialFunction(std::vector<Packet> packets) : packets_(std::move(packets)) {
    if (packets_.empty()) throw std::invalid_argument("TrialFunction: needs at least one packet");
    const int d = packets_.front().space.dim();
    for (const Packet& p : packets_) {
        if (p.space.dim() != d || static_cast<int>(p.space.y.size()) != d ||
            static_cast<int>(p.space.z.size()) != d)
            throw std::invalid_argument("TrialFunction: packet dimension mismatch");
        if (!(p.time.s0 < p.time.s1))
            throw std::invalid_argument("TrialFunction: time support must satisfy s0 < s1");
        for (const auto* axes : {&p.space.x, &p.space.y, &p.space.z})
            for (const AxisFactor& a : *axes) validate_axis(a);
    }
}

int TrialFunction::dim() const {
    return packets_.empty() ? 0 : packets_.front().space.dim();
}

Complex TrialFunction::f_hat(double t, const FrequencyPoint& w) const {
    Complex sum = 0.0;
    for (const Packet& p : packets_) {
        const double tp = p.time(t);
        if (tp != 0.0) sum += p.coeff * tp * p.space.fourier_factor(w);
    }
    return sum;
}

Complex TrialFunction::eval_physical(double t, const Vec& x, const Vec& y, const Vec& z) const {
    Complex sum = 0.0;
    for (const Packet& p : packets_) {
        const double tp = p.time(t);
        if (tp != 0.0) sum += p.coeff * tp * p.space.physical_factor(x, y, z);
    }
    return sum;
}

double TrialFunction::time_support_lo() const {
    double lo = packets_.front().time.s0;
    for (const Packet& p : packets_) lo = std::min(lo, p.time.s0);
    return lo;
}

double TrialFunction::time_support_hi() const {
    double hi = packets_.front().time.s1;
    for (const Packet& p : packets_) hi = std::max(hi, p.time.s1);
    return hi;
}

std::vector<double> TrialFunction::time_breakpoints() const {
    std::set<double> cuts;
    for (const Packet& p : packets_) {
        cuts.insert(p.time.s0);
        cuts.insert(p.time.s1);
    }
    return {cuts.begin(), cuts.end()};
}

FrequencyBounds TrialFunction::frequency_bounds(double tail_eps) const {
    const int d = dim();
    FrequencyBounds b;
    b.xi.resize(d);
    b.eta.resize(d);
    b.zeta.resize(d);
    for (int i = 0; i < d; ++i) {
        b.xi[i] = axis_bound(packets_.front().space.x[i], tail_eps);
        b.eta[i] = axis_bound(packets_.front().space.y[i], tail_eps);
        b.zeta[i] = axis_bound(packets_.front().space.z[i], tail_eps);
        for (const Packet& p : packets_) {
            merge(b.xi[i], axis_bound(p.space.x[i], tail_eps));
            merge(b.eta[i], axis_bound(p.space.y[i], tail_eps));
            merge(b.zeta[i], axis_bound(p.space.z[i], tail_eps));
        }
    }
    return b;
}

TrialFunction TrialFunction::dilated(double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("dilated: scaling parameter must be positive");
    std::vector<Packet> out = packets_;
    const double r2 = r * r, r3 = r2 * r, r5 = r3 * r2;
    for (Packet& p : out) {
        p.time.s0 /= r2;
        p.time.s1 /= r2;
        auto rescale = [](std::vector<AxisFactor>& axes, double k) {
            for (AxisFactor& a : axes) {
                a.center /= k;
                a.width /= k;
                a.modulation *= k;
            }
        };
        rescale(p.space.x, r);
        rescale(p.space.y, r3);
        rescale(p.space.z, r5);
    }
    return TrialFunction(std::move(out));
}

TrialFunction TrialFunction::with_amplitude_factor(Complex factor) const {
    std::vector<Packet> out = packets_;
    for (Packet& p : out) p.coeff *= factor;
    return TrialFunction(std::move(out));
}

double rhs_l2_norm(const TrialFunction& trial, double /*lambda*/, const QuadratureSpec& quad) {
    quad.validate();
    const int d = trial.dim();
    const FrequencyBounds fb = trial.frequency_bounds(quad.tail_eps);

    std::vector<AxisGrid> grids;
    grids.reserve(3 * d);
    for (int i = 0; i < d; ++i) {
        AxisInterval iv = fb.xi[i];
        if (quad.trunc_radius_xi > 0) iv = {-quad.trunc_radius_xi, quad.trunc_radius_xi};
        grids.push_back(axis_grid_plain(iv.lo, iv.hi, quad.nodes_xi));
    }
    for (int i = 0; i < d; ++i) {
        AxisInterval iv = fb.eta[i];
        if (quad.trunc_radius_eta > 0) iv = {-quad.trunc_radius_eta, quad.trunc_radius_eta};
        grids.push_back(axis_grid_plain(iv.lo, iv.hi, quad.nodes_eta));
    }
    for (int i = 0; i < d; ++i) {
        AxisInterval iv = fb.zeta[i];
        if (quad.trunc_radius_zeta > 0) iv = {-quad.trunc_radius_zeta, quad.trunc_radius_zeta};
        grids.push_back(axis_grid_plain(iv.lo, iv.hi, quad.nodes_zeta));
    }

    // time cells between profile breakpoints
    const std::vector<double> cuts = trial.time_breakpoints();
    std::vector<double> tn, tw;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const AxisGrid tg = axis_grid_plain(cuts[c], cuts[c + 1], quad.nodes_time);
        tn.insert(tn.end(), tg.node.begin(), tg.node.end());
        tw.insert(tw.end(), tg.weight.begin(), tg.weight.end());
    }

    const int naxes = 3 * d;
    std::vector<std::size_t> idx(naxes, 0);
    FrequencyPoint w = FrequencyPoint::zero(d);
    double total = 0.0;
    for (;;) {
        double fw = 1.0;
        for (int a = 0; a < naxes; ++a) fw *= grids[a].weight[idx[a]];
        for (int i = 0; i < d; ++i) {
            w.xi[i] = grids[i].node[idx[i]];
            w.eta[i] = grids[d + i].node[idx[d + i]];
            w.zeta[i] = grids[2 * d + i].node[idx[2 * d + i]];
        }
        double tsum = 0.0;
        for (std::size_t k = 0; k < tn.size(); ++k) {
            const Complex F = trial.f_hat(tn[k], w);
            tsum += tw[k] * std::norm(F);
        }
        total += fw * tsum;
        int a = 0;
        while (a < naxes && ++idx[a] == grids[a].node.size()) idx[a++] = 0;
        if (a == naxes) break;
    }
    const double scale = std::pow(2.0 * std::numbers::pi, -1.5 * d);
    return scale * std::sqrt(std::max(total, 0.0));
}

}  // namespace kfp
