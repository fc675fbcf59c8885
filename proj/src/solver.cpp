#include "kfp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kfp {

SpectralSolution::SpectralSolution(CoefficientPath a, double lambda_, TrialFunction f,
                                   QuadratureSpec q)
    : coefficients(std::move(a)), lambda(lambda_), source(std::move(f)), time_quadrature(q) {
    if (lambda < 0.0) throw std::invalid_argument("SpectralSolution: lambda must be >= 0");
    if (source.empty()) throw std::invalid_argument("SpectralSolution: source must be nonempty");
    if (coefficients.dim() != source.dim())
        throw std::invalid_argument("SpectralSolution: coefficient/source dimension mismatch");
    time_quadrature.validate();
}

std::complex<double> solve_hat(const SpectralSolution& sol, double t, const FrequencyPoint& w) {
    return DuhamelEvaluator(sol)(t, w);
}

namespace {

// Fourier factor of one spatial axis, scalar arguments: transform of
// ((u-c)/sigma)^n e^{-(u-c)^2/(2 sigma^2)} e^{i m u} evaluated at v.
inline std::complex<double> axis_hat(const AxisFactor& a, double v) {
    static const double sqrt2pi = std::sqrt(2.0 * std::numbers::pi);
    const double vs = v - a.modulation;
    const double sv = a.width * vs;
    if (std::abs(sv) > 10.0) return 0.0;  // below 4e-22 of the peak
    double he;
    switch (a.hermite) {
        case 0: he = 1.0; break;
        case 1: he = sv; break;
        case 2: he = sv * sv - 1.0; break;
        case 3: he = sv * (sv * sv - 3.0); break;
        default: he = sv * sv * (sv * sv - 6.0) + 3.0; break;
    }
    const double mag = a.width * sqrt2pi * he * std::exp(-0.5 * sv * sv);
    std::complex<double> out;
    switch (a.hermite & 3) {  // (-i)^n
        case 0: out = {mag, 0.0}; break;
        case 1: out = {0.0, -mag}; break;
        case 2: out = {-mag, 0.0}; break;
        default: out = {0.0, mag}; break;
    }
    if (a.center != 0.0) out *= std::exp(std::complex<double>(0.0, -a.center * vs));
    return out;
}

inline double bump_profile(double t, double s0, double s1, int order, bool bump,
                           double amplitude) {
    if (t <= s0 || t >= s1) return 0.0;
    if (!bump) return amplitude;
    const double half = 0.5 * (s1 - s0);
    const double u = (t - s0) * (s1 - t) / (half * half);
    double p = 1.0;
    for (int k = 0; k < order; ++k) p *= u;
    return amplitude * p;
}

}  // namespace

DuhamelEvaluator::DuhamelEvaluator(const SpectralSolution& sol) : sol_(&sol) {
    support_lo_ = sol.source.time_support_lo();
    support_hi_ = sol.source.time_support_hi();
    cuts_ = sol.source.time_breakpoints();
    for (double b : sol.coefficients.breakpoints()) cuts_.push_back(b);
    std::sort(cuts_.begin(), cuts_.end());
    cuts_.erase(std::unique(cuts_.begin(), cuts_.end()), cuts_.end());

    scalar_ = sol.source.dim() == 1;
    if (!scalar_) return;
    for (const Packet& p : sol.source.packets()) {
        FlatPacket fp;
        fp.s0 = p.time.s0;
        fp.s1 = p.time.s1;
        fp.amplitude = p.time.amplitude;
        fp.order = p.time.order;
        fp.bump = p.time.shape == TimeShape::smooth_bump;
        fp.ax = p.space.x[0];
        fp.ay = p.space.y[0];
        fp.az = p.space.z[0];
        fp.coeff = p.coeff;
        packets1_.push_back(fp);
    }
    const auto& breaks = sol.coefficients.breakpoints();
    for (std::size_t k = 1; k + 1 < breaks.size(); ++k) coeff_cuts_.push_back(breaks[k]);
    for (const SymMatrix& m : sol.coefficients.pieces()) coeff_vals_.push_back(m(0, 0));
}

std::complex<double> DuhamelEvaluator::operator()(double t, const FrequencyPoint& w,
                                                  double abs_tol) const {
    if (scalar_) return eval_scalar(t, w.xi[0], w.eta[0], w.zeta[0], abs_tol);

    const double lo = support_lo_;
    const double hi = std::min(t, support_hi_);
    if (!(hi > lo)) return 0.0;
    double cuts[64];
    int nc = 0;
    cuts[nc++] = lo;
    for (double b : cuts_)
        if (b > lo && b < hi && nc < 62) cuts[nc++] = b;
    cuts[nc++] = hi;
    const auto integrand = [&](double tp) -> std::complex<double> {
        const double damping =
            sol_->lambda * (t - tp) + dissipation(sol_->coefficients, tp, t, w);
        return std::exp(-damping) * sol_->source.f_hat(tp, characteristic(t, tp, w));
    };
    return adaptive_cells(integrand, cuts, nc, sol_->time_quadrature.rel_tol, abs_tol,
                          sol_->time_quadrature.max_intervals);
}

std::complex<double> DuhamelEvaluator::eval_scalar(double t, double xi, double eta, double zeta,
                                                   double abs_tol) const {
    const double lo = support_lo_;
    const double hi = std::min(t, support_hi_);
    if (!(hi > lo)) return 0.0;
    double cuts[64];
    int nc = 0;
    cuts[nc++] = lo;
    for (double b : cuts_)
        if (b > lo && b < hi && nc < 62) cuts[nc++] = b;
    cuts[nc++] = hi;

    // quartic dissipation coefficients anchored at t:
    //   |xi(s)|^2 = A + 2B s + C s^2 + D s^3 + (E/4) s^4,  s = tau - t
    const double A = xi * xi, B = xi * eta, C = eta * eta + xi * zeta, D = eta * zeta,
                 E = zeta * zeta;
    const auto antideriv = [&](double s) {
        return s * (A + s * (B + s * (C / 3.0 + s * (D / 4.0 + s * (E / 20.0)))));
    };
    const double lambda = sol_->lambda;
    const int npieces = static_cast<int>(coeff_vals_.size());

    const auto integrand = [&](double tp) -> std::complex<double> {
        // piecewise closed-form dissipation over [tp, t]: piece k ends at
        // interior cut k (the last piece extends to t)
        double damping = lambda * (t - tp);
        double pos = tp;
        double prev_F = antideriv(tp - t);
        for (int k = 0; k < npieces; ++k) {
            const double seg_end = (k + 1 < npieces) ? std::min(coeff_cuts_[k], t) : t;
            if (seg_end > pos) {
                const double Fc = antideriv(seg_end - t);
                damping += coeff_vals_[k] * (Fc - prev_F);
                prev_F = Fc;
                pos = seg_end;
            }
            if (pos >= t) break;
        }
        if (damping > 50.0) return 0.0;  // e^{-50} of any source scale
        const double s = tp - t;
        const double xi_p = xi + s * (eta + 0.5 * s * zeta);
        const double eta_p = eta + s * zeta;
        std::complex<double> F = 0.0;
        for (const FlatPacket& p : packets1_) {
            const double prof = bump_profile(tp, p.s0, p.s1, p.order, p.bump, p.amplitude);
            if (prof == 0.0) continue;
            F += p.coeff * prof * axis_hat(p.ax, xi_p) * axis_hat(p.ay, eta_p) *
                 axis_hat(p.az, zeta);
        }
        return std::exp(-damping) * F;
    };
    return adaptive_cells(integrand, cuts, nc, sol_->time_quadrature.rel_tol, abs_tol,
                          sol_->time_quadrature.max_intervals);
}

double residual_check(const SpectralSolution& sol, double t, const FrequencyPoint& w,
                      const ResidualSteps& h) {
    if (!(h.t > 0.0 && h.xi > 0.0 && h.eta > 0.0))
        throw std::invalid_argument("residual_check: step sizes must be positive");
    const int d = w.dim();

    const std::complex<double> U = solve_hat(sol, t, w);
    const std::complex<double> F = sol.source.f_hat(t, w);

    const std::complex<double> Ut =
        (solve_hat(sol, t + h.t, w) - solve_hat(sol, t - h.t, w)) / (2.0 * h.t);

    std::complex<double> transport = 0.0;
    FrequencyPoint wp = w;
    for (int i = 0; i < d; ++i) {
        if (w.eta[i] != 0.0) {
            wp.xi[i] = w.xi[i] + h.xi;
            const std::complex<double> up = solve_hat(sol, t, wp);
            wp.xi[i] = w.xi[i] - h.xi;
            const std::complex<double> um = solve_hat(sol, t, wp);
            wp.xi[i] = w.xi[i];
            transport += w.eta[i] * (up - um) / (2.0 * h.xi);
        }
        if (w.zeta[i] != 0.0) {
            wp.eta[i] = w.eta[i] + h.eta;
            const std::complex<double> up = solve_hat(sol, t, wp);
            wp.eta[i] = w.eta[i] - h.eta;
            const std::complex<double> um = solve_hat(sol, t, wp);
            wp.eta[i] = w.eta[i];
            transport += w.zeta[i] * (up - um) / (2.0 * h.eta);
        }
    }

    const double quad = sol.coefficients.at(t).quad_form(w.xi);
    const std::complex<double> residual = Ut + (quad + sol.lambda) * U + transport - F;
    const double floor = 1e-30;
    return std::abs(residual) / std::max({std::abs(F), std::abs(U), floor});
}

std::complex<double> homogeneous_hat(const CoefficientPath& a, const InitialHat& initial_hat,
                                     double t0, double t, const FrequencyPoint& w) {
    if (t < t0) throw std::invalid_argument("homogeneous_hat: requires t >= t0");
    return std::exp(-dissipation(a, t0, t, w)) * initial_hat(characteristic(t, t0, w));
}

}  // namespace kfp
