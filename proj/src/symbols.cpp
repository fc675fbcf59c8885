#include "kfp/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kfp {

FrequencyPoint::FrequencyPoint(Vec xi_, Vec eta_, Vec zeta_)
    : xi(std::move(xi_)), eta(std::move(eta_)), zeta(std::move(zeta_)) {
    if (xi.empty() || xi.size() != eta.size() || xi.size() != zeta.size())
        throw std::invalid_argument("FrequencyPoint: xi, eta, zeta must share dimension d >= 1");
    for (const Vec* v : {&xi, &eta, &zeta})
        for (double c : *v)
            if (!std::isfinite(c)) throw std::invalid_argument("FrequencyPoint: non-finite component");
}

FrequencyPoint FrequencyPoint::zero(int d) {
    return FrequencyPoint(Vec(d, 0.0), Vec(d, 0.0), Vec(d, 0.0));
}

double max_abs_diff(const FrequencyPoint& a, const FrequencyPoint& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("FrequencyPoint: dimension mismatch");
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        m = std::max(m, std::abs(a.xi[i] - b.xi[i]));
        m = std::max(m, std::abs(a.eta[i] - b.eta[i]));
        m = std::max(m, std::abs(a.zeta[i] - b.zeta[i]));
    }
    return m;
}

SymMatrix SymMatrix::identity(int d, double scale) {
    SymMatrix m;
    m.d = d;
    m.a.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) m.at(i, i) = scale;
    return m;
}

double SymMatrix::quad_form(const Vec& v) const { return bilinear(v, v); }

double SymMatrix::bilinear(const Vec& u, const Vec& v) const {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += (*this)(i, j) * u[i] * v[j];
    return s;
}

std::vector<double> SymMatrix::eigenvalues() const {
    // cyclic Jacobi; matrices here are tiny (d <= 3 in practice)
    std::vector<double> m = a;
    const int n = d;
    auto at = [&](int i, int j) -> double& { return m[static_cast<std::size_t>(i) * n + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(at(p, q)) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * at(p, q), at(q, q) - at(p, p));
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

CoefficientPath::CoefficientPath(std::vector<double> breakpoints, std::vector<SymMatrix> pieces,
                                 double delta)
    : breaks_(std::move(breakpoints)), pieces_(std::move(pieces)), delta_(delta) {
    if (pieces_.empty()) throw std::invalid_argument("CoefficientPath: needs at least one piece");
    if (breaks_.size() != pieces_.size() + 1)
        throw std::invalid_argument("CoefficientPath: breakpoints must number pieces + 1");
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
        if (!(breaks_[i] < breaks_[i + 1]))
            throw std::invalid_argument("CoefficientPath: breakpoints must increase strictly");
    if (!(delta_ > 0.0 && delta_ < 1.0))
        throw std::invalid_argument("CoefficientPath: ellipticity delta must lie in (0,1)");
    const int d = pieces_.front().d;
    for (const SymMatrix& p : pieces_) {
        if (p.d != d) throw std::invalid_argument("CoefficientPath: piece dimension mismatch");
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                if (std::abs(p(i, j) - p(j, i)) > 1e-14)
                    throw std::invalid_argument("CoefficientPath: pieces must be symmetric");
        const std::vector<double> ev = p.eigenvalues();
        if (ev.front() < delta_ - 1e-12 || ev.back() > 1.0 / delta_ + 1e-12)
            throw std::invalid_argument("CoefficientPath: piece violates the ellipticity bounds");
    }
}

CoefficientPath CoefficientPath::constant(const SymMatrix& a, double delta) {
    return CoefficientPath({0.0, 1.0}, {a}, delta);
}

CoefficientPath CoefficientPath::scalar_constant(double a, double delta) {
    return constant(SymMatrix::scalar(a), delta);
}

const SymMatrix& CoefficientPath::at(double t) const {
    if (t < breaks_.front()) return pieces_.front();
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k)
        if (t < breaks_[k + 1]) return pieces_[k];
    return pieces_.back();
}

CoefficientPath CoefficientPath::time_rescaled(double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("time_rescaled: factor must be positive");
    std::vector<double> b(breaks_.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = breaks_[i] / s;
    return CoefficientPath(std::move(b), pieces_, delta_);
}

FrequencyPoint characteristic(double t, double t_prime, const FrequencyPoint& w) {
    const double s = t_prime - t;
    const int d = w.dim();
    FrequencyPoint out = FrequencyPoint::zero(d);
    for (int i = 0; i < d; ++i) {
        out.xi[i] = w.xi[i] + s * w.eta[i] + 0.5 * s * s * w.zeta[i];
        out.eta[i] = w.eta[i] + s * w.zeta[i];
        out.zeta[i] = w.zeta[i];
    }
    return out;
}

namespace {

// integral over s in [s0,s1] of the quartic
//   A + 2B s + C s^2 + D s^3 + (E/4) s^4
// where the coefficients come from xi(s) = xi + s eta + (s^2/2) zeta.
double quartic_piece(const SymMatrix& a, const FrequencyPoint& w, double s0, double s1) {
    const double A = a.quad_form(w.xi);
    const double B = a.bilinear(w.xi, w.eta);
    const double C = a.quad_form(w.eta) + a.bilinear(w.xi, w.zeta);
    const double D = a.bilinear(w.eta, w.zeta);
    const double E = a.quad_form(w.zeta);
    auto F = [&](double s) {
        return s * (A + s * (B + s * (C / 3.0 + s * (D / 4.0 + s * (E / 20.0)))));
    };
    return F(s1) - F(s0);
}

}  // namespace

double dissipation(const CoefficientPath& a, double t_prime, double t, const FrequencyPoint& w) {
    if (t_prime > t) throw std::invalid_argument("dissipation: requires t_prime <= t");
    if (a.dim() != w.dim()) throw std::invalid_argument("dissipation: dimension mismatch");
    std::vector<double> cuts{t_prime};
    for (double bk : a.breakpoints())
        if (bk > t_prime && bk < t) cuts.push_back(bk);
    cuts.push_back(t);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const SymMatrix& piece = a.at(0.5 * (cuts[i] + cuts[i + 1]));
        acc += quartic_piece(piece, w, cuts[i] - t, cuts[i + 1] - t);
    }
    return acc;
}

namespace {

double norm(const Vec& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

}  // namespace

double frac_power_symbol(SymbolKind kind, const FrequencyPoint& w) {
    switch (kind) {
        case SymbolKind::xx: {
            const double n = norm(w.xi);
            return n * n;
        }
        case SymbolKind::y13: return std::pow(norm(w.eta), 2.0 / 3.0);
        case SymbolKind::z15: return std::pow(norm(w.zeta), 2.0 / 5.0);
        case SymbolKind::xy16: return norm(w.xi) * std::cbrt(norm(w.eta));
        case SymbolKind::transport_weight: return 1.0;
    }
    throw std::invalid_argument("frac_power_symbol: unknown kind");
}

double multiplier_m(const Vec& xi, const Vec& eta) {
    const double nx = norm(xi);
    const double ne13 = std::cbrt(norm(eta));
    const double den = nx * nx + ne13 * ne13;
    if (den == 0.0) return 0.0;  // continuous limit along both axes
    return nx * ne13 / den;
}

}  // namespace kfp
