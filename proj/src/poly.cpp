#include "kfp/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kfp/errors.hpp"

namespace kfp {

Rational rat_pow(const Rational& base, int exp) {
    if (exp < 0) throw std::invalid_argument("rat_pow: negative exponent");
    Rational acc(1);
    Rational b = base;
    int e = exp;
    while (e > 0) {
        if (e & 1) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

Polynomial::Polynomial(int d) : d_(d) {
    if (d < 1) throw std::invalid_argument("Polynomial: dimension must be >= 1");
}

Polynomial Polynomial::constant(int d, const Rational& c) {
    Polynomial p(d);
    p.add_term(Exponents(1 + 3 * d, 0), c);
    return p;
}

int Polynomial::var_index(Var v, int index) const {
    if (index < 0 || (v != Var::t && index >= d_))
        throw std::invalid_argument("Polynomial: variable index out of range");
    switch (v) {
        case Var::t: return 0;
        case Var::x: return 1 + index;
        case Var::y: return 1 + d_ + index;
        case Var::z: return 1 + 2 * d_ + index;
    }
    throw std::invalid_argument("Polynomial: unknown variable");
}

Polynomial Polynomial::variable(int d, Var v, int index) {
    Polynomial p(d);
    Exponents e(1 + 3 * d, 0);
    e[p.var_index(v, index)] = 1;
    p.add_term(e, Rational(1));
    return p;
}

Polynomial Polynomial::monomial(int d, const Exponents& e, const Rational& c) {
    Polynomial p(d);
    if (static_cast<int>(e.size()) != 1 + 3 * d)
        throw std::invalid_argument("Polynomial: exponent vector has wrong length");
    p.add_term(e, c);
    return p;
}

void Polynomial::add_term(const Exponents& e, const Rational& c) {
    if (sgn(c) == 0) return;
    for (int k : e)
        if (k < 0) throw std::invalid_argument("Polynomial: negative exponent");
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
    } else {
        it->second += c;
        if (sgn(it->second) == 0) terms_.erase(it);
    }
}

int Polynomial::weighted_degree(const Exponents& e, int d) {
    int w = 2 * e[0];
    for (int i = 0; i < d; ++i) w += e[1 + i] + 3 * e[1 + d + i] + 5 * e[1 + 2 * d + i];
    return w;
}

int Polynomial::weighted_degree() const {
    int w = -1;
    for (const auto& [e, c] : terms_) w = std::max(w, weighted_degree(e, d_));
    return w;
}

Polynomial Polynomial::operator-() const {
    Polynomial p(d_);
    for (const auto& [e, c] : terms_) p.terms_.emplace(e, -c);
    return p;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    if (d_ != o.d_) throw std::invalid_argument("Polynomial: dimension mismatch");
    Polynomial p = *this;
    for (const auto& [e, c] : o.terms_) p.add_term(e, c);
    return p;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (d_ != o.d_) throw std::invalid_argument("Polynomial: dimension mismatch");
    Polynomial p(d_);
    Exponents e(nvars());
    for (const auto& [ea, ca] : terms_)
        for (const auto& [eb, cb] : o.terms_) {
            for (int i = 0; i < nvars(); ++i) e[i] = ea[i] + eb[i];
            p.add_term(e, ca * cb);
        }
    return p;
}

Polynomial Polynomial::scaled(const Rational& c) const {
    Polynomial p(d_);
    if (sgn(c) == 0) return p;
    for (const auto& [e, coef] : terms_) p.terms_.emplace(e, coef * c);
    return p;
}

bool Polynomial::operator==(const Polynomial& o) const {
    return d_ == o.d_ && terms_ == o.terms_;
}

Polynomial Polynomial::derivative(Var v, int index) const {
    const int vi = var_index(v, index);
    Polynomial p(d_);
    for (const auto& [e, c] : terms_) {
        if (e[vi] == 0) continue;
        Exponents de = e;
        de[vi] -= 1;
        p.add_term(de, c * e[vi]);
    }
    return p;
}

Polynomial Polynomial::substitute(const std::vector<Polynomial>& images) const {
    if (static_cast<int>(images.size()) != nvars())
        throw std::invalid_argument("substitute: one image per variable required");
    // per-variable power tables up to the maximal exponent encountered
    std::vector<int> max_exp(nvars(), 0);
    for (const auto& [e, c] : terms_)
        for (int i = 0; i < nvars(); ++i) max_exp[i] = std::max(max_exp[i], e[i]);
    std::vector<std::vector<Polynomial>> powers(nvars());
    for (int i = 0; i < nvars(); ++i) {
        powers[i].push_back(Polynomial::constant(d_, 1));
        for (int k = 1; k <= max_exp[i]; ++k) powers[i].push_back(powers[i].back() * images[i]);
    }
    Polynomial acc(d_);
    for (const auto& [e, c] : terms_) {
        Polynomial term = Polynomial::constant(d_, c);
        for (int i = 0; i < nvars(); ++i)
            if (e[i] > 0) term = term * powers[i][e[i]];
        acc = acc + term;
    }
    return acc;
}

Polynomial Polynomial::eval_at_t(const Rational& t) const {
    Polynomial p(d_);
    for (const auto& [e, c] : terms_) {
        Exponents e0 = e;
        e0[0] = 0;
        p.add_term(e0, c * rat_pow(t, e[0]));
    }
    return p;
}

double Polynomial::eval_double(double t, const Vec& x, const Vec& y, const Vec& z) const {
    double acc = 0.0;
    for (const auto& [e, c] : terms_) {
        double v = c.get_d();
        for (int k = 0; k < e[0]; ++k) v *= t;
        for (int i = 0; i < d_; ++i) {
            for (int k = 0; k < e[1 + i]; ++k) v *= x[i];
            for (int k = 0; k < e[1 + d_ + i]; ++k) v *= y[i];
            for (int k = 0; k < e[1 + 2 * d_ + i]; ++k) v *= z[i];
        }
        acc += v;
    }
    return acc;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    const char* names[4] = {"t", "x", "y", "z"};
    for (const auto& [e, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c.get_str();
        for (int i = 0; i < nvars(); ++i) {
            if (e[i] == 0) continue;
            int group = 0, idx = 0;
            if (i == 0) {
                group = 0;
            } else if (i <= d_) {
                group = 1;
                idx = i - 1;
            } else if (i <= 2 * d_) {
                group = 2;
                idx = i - 1 - d_;
            } else {
                group = 3;
                idx = i - 1 - 2 * d_;
            }
            os << "*" << names[group];
            if (d_ > 1 && group > 0) os << (idx + 1);
            if (e[i] > 1) os << "^" << e[i];
        }
    }
    return os.str();
}

RatMatrix RatMatrix::identity(int d, const Rational& scale) {
    RatMatrix m;
    m.d = d;
    m.a.assign(static_cast<std::size_t>(d) * d, Rational(0));
    for (int i = 0; i < d; ++i) m.at(i, i) = scale;
    return m;
}

Polynomial apply_P0(const Polynomial& u, const RatMatrix& a) {
    const int d = u.dim();
    if (a.d != d) throw std::invalid_argument("apply_P0: coefficient dimension mismatch");
    Polynomial out = u.derivative(Var::t);
    for (int i = 0; i < d; ++i) {
        out = out - Polynomial::variable(d, Var::x, i) * u.derivative(Var::y, i);
        out = out - Polynomial::variable(d, Var::y, i) * u.derivative(Var::z, i);
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (sgn(a(i, j)) == 0) continue;
            out = out - u.derivative(Var::x, i).derivative(Var::x, j).scaled(a(i, j));
        }
    return out;
}

RatCoefficientPath RatCoefficientPath::constant(const RatMatrix& a, const Rational& t0,
                                                const Rational& t1) {
    RatCoefficientPath p;
    p.breakpoints = {t0, t1};
    p.pieces = {a};
    return p;
}

const RatMatrix& RatCoefficientPath::at(const Rational& t) const {
    if (pieces.empty()) throw std::invalid_argument("RatCoefficientPath: empty");
    if (t < breakpoints.front()) return pieces.front();
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k)
        if (t < breakpoints[k + 1]) return pieces[k];
    return pieces.back();
}

const Polynomial& PiecewiseSolution::piece_at(const Rational& t) const {
    if (pieces.empty()) throw std::invalid_argument("PiecewiseSolution: empty");
    if (t < breakpoints.front()) return pieces.front();
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k)
        if (t < breakpoints[k + 1]) return pieces[k];
    return pieces.back();
}

PiecewiseSolution PiecewiseSolution::single(Polynomial u, RatMatrix a, const Rational& t0,
                                            const Rational& t1) {
    PiecewiseSolution s;
    s.breakpoints = {t0, t1};
    s.pieces = {std::move(u)};
    s.coefficients = {std::move(a)};
    return s;
}

namespace {

Polynomial apply_generator(const Polynomial& u, const RatMatrix& a) {
    const int d = u.dim();
    Polynomial out(d);
    for (int i = 0; i < d; ++i) {
        out = out + Polynomial::variable(d, Var::x, i) * u.derivative(Var::y, i);
        out = out + Polynomial::variable(d, Var::y, i) * u.derivative(Var::z, i);
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (sgn(a(i, j)) != 0)
                out = out + u.derivative(Var::x, i).derivative(Var::x, j).scaled(a(i, j));
    return out;
}

}  // namespace

PiecewiseSolution evolve(const Polynomial& g, const RatCoefficientPath& path,
                         const Rational& t_start, const Rational& t_end) {
    if (!(t_start < t_end)) throw std::invalid_argument("evolve: t_start must precede t_end");
    const int d = g.dim();
    for (const auto& [e, c] : g.terms())
        if (e[0] != 0) throw std::invalid_argument("evolve: initial data must not involve t");

    std::vector<Rational> cuts{t_start};
    for (const Rational& b : path.breakpoints)
        if (b > t_start && b < t_end) cuts.push_back(b);
    cuts.push_back(t_end);
    std::sort(cuts.begin(), cuts.end());

    PiecewiseSolution sol;
    sol.breakpoints = cuts;
    Polynomial state = g;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const Rational mid = (cuts[k] + cuts[k + 1]) / 2;
        const RatMatrix& ak = path.at(mid);
        // u_k(t) = sum_n ((t - c_k)^n / n!) A^n state; terminates because the
        // generator drops the weighted degree by 2 every application
        Polynomial tshift =
            Polynomial::variable(d, Var::t) - Polynomial::constant(d, cuts[k]);
        Polynomial piece(d);
        Polynomial an = state;   // A^n state
        Polynomial tpow = Polynomial::constant(d, 1);
        Rational inv_fact(1);
        for (int n = 0; !an.is_zero(); ++n) {
            if (n > 0) {
                tpow = tpow * tshift;
                inv_fact /= n;
            }
            piece = piece + (tpow * an).scaled(inv_fact);
            an = apply_generator(an, ak);
        }
        sol.pieces.push_back(piece);
        sol.coefficients.push_back(ak);
        state = piece.eval_at_t(cuts[k + 1]);
    }
    return sol;
}

double ExactValue::to_double() const {
    double v = q.get_d();
    for (int k = 0; k < pi_power; ++k) v *= std::numbers::pi;
    return v;
}

ExactValue& ExactValue::operator+=(const ExactValue& o) {
    if (sgn(o.q) == 0) return *this;
    if (sgn(q) == 0) {
        *this = o;
        return *this;
    }
    if (pi_power != o.pi_power)
        throw std::invalid_argument("ExactValue: adding incompatible pi powers");
    q += o.q;
    return *this;
}

ExactValue ExactValue::operator*(const ExactValue& o) const {
    if (sgn(q) == 0 || sgn(o.q) == 0) return {};
    return {q * o.q, pi_power + o.pi_power};
}

namespace {

Rational double_factorial(int n) {
    // (-1)!! = 1 by convention
    Rational acc(1);
    for (int k = n; k >= 2; k -= 2) acc *= k;
    return acc;
}

// int over the d-ball of radius rho of prod u_i^{p_i}; d in {1,2}
ExactValue ball_moment(int d, const std::vector<int>& p, const Rational& rho) {
    for (int pi : p)
        if (pi % 2 != 0) return {};
    if (d == 1) {
        const int k = p[0];
        return {Rational(2) * rat_pow(rho, k + 1) / (k + 1), 0};
    }
    if (d == 2) {
        const int pk = p[0], qk = p[1];
        const Rational w = Rational(2) * double_factorial(pk - 1) * double_factorial(qk - 1) /
                           double_factorial(pk + qk);
        return {rat_pow(rho, pk + qk + 2) / (pk + qk + 2) * w, 1};
    }
    throw std::invalid_argument("ball_moment: closed forms provided for d in {1,2} only");
}

Rational time_moment(int k, const Rational& t0, const Rational& t1) {
    return (rat_pow(t1, k + 1) - rat_pow(t0, k + 1)) / (k + 1);
}

}  // namespace

ExactValue box_integral(const Polynomial& u, const Rational& t0, const Rational& t1,
                        const Rational& r, const Rational& R) {
    const int d = u.dim();
    const Rational ry = rat_pow(r, 3);
    const Rational rz = rat_pow(R, 5);
    ExactValue acc;
    std::vector<int> px(d), py(d), pz(d);
    for (const auto& [e, c] : u.terms()) {
        for (int i = 0; i < d; ++i) {
            px[i] = e[1 + i];
            py[i] = e[1 + d + i];
            pz[i] = e[1 + 2 * d + i];
        }
        const ExactValue bx = ball_moment(d, px, r);
        if (sgn(bx.q) == 0) continue;
        const ExactValue by = ball_moment(d, py, ry);
        if (sgn(by.q) == 0) continue;
        const ExactValue bz = ball_moment(d, pz, rz);
        if (sgn(bz.q) == 0) continue;
        ExactValue term = bx * by * bz;
        term.q *= c * time_moment(e[0], t0, t1);
        acc += term;
    }
    return acc;
}

ExactValue cylinder_integral(const Polynomial& u, const Rational& r, const Rational& R) {
    return box_integral(u, -r * r, Rational(0), r, R);
}

ExactValue cylinder_integral(const PiecewiseSolution& u, const Rational& r, const Rational& R) {
    const Rational lo = -r * r, hi = 0;
    ExactValue acc;
    for (std::size_t k = 0; k < u.pieces.size(); ++k) {
        const Rational a = std::max(u.breakpoints[k], lo);
        const Rational b = std::min(u.breakpoints[k + 1], hi);
        if (a < b) acc += box_integral(u.pieces[k], a, b, r, R);
    }
    // constant extension outside the covered span
    if (u.breakpoints.front() > lo)
        acc += box_integral(u.pieces.front(), lo, std::min(u.breakpoints.front(), hi), r, R);
    if (u.breakpoints.back() < hi)
        acc += box_integral(u.pieces.back(), std::max(u.breakpoints.back(), lo), hi, r, R);
    return acc;
}

Polynomial left_translate(const Polynomial& u, const Rational& t0, const std::vector<Rational>& x0,
                          const std::vector<Rational>& y0, const std::vector<Rational>& z0) {
    const int d = u.dim();
    if (static_cast<int>(x0.size()) != d || static_cast<int>(y0.size()) != d ||
        static_cast<int>(z0.size()) != d)
        throw std::invalid_argument("left_translate: center dimension mismatch");
    const Polynomial t = Polynomial::variable(d, Var::t);
    std::vector<Polynomial> images;
    images.reserve(1 + 3 * d);
    images.push_back(t + Polynomial::constant(d, t0));
    for (int i = 0; i < d; ++i)
        images.push_back(Polynomial::variable(d, Var::x, i) + Polynomial::constant(d, x0[i]));
    for (int i = 0; i < d; ++i)
        images.push_back(Polynomial::variable(d, Var::y, i) + Polynomial::constant(d, y0[i]) -
                         t.scaled(x0[i]));
    for (int i = 0; i < d; ++i)
        images.push_back(Polynomial::variable(d, Var::z, i) + Polynomial::constant(d, z0[i]) -
                         t.scaled(y0[i]) + (t * t).scaled(x0[i] / 2));
    return u.substitute(images);
}

Polynomial dilate_poly(const Polynomial& u, const Rational& r) {
    Polynomial out(u.dim());
    for (const auto& [e, c] : u.terms())
        out.add_term(e, c * rat_pow(r, Polynomial::weighted_degree(e, u.dim())));
    return out;
}

PoincareResult poincare_ratio(const PiecewiseSolution& u) {
    if (u.pieces.empty()) throw std::invalid_argument("poincare_ratio: empty solution");
    const int d = u.dim();
    if (!(u.breakpoints.front() <= Rational(-4) && u.breakpoints.back() >= Rational(0)))
        throw std::invalid_argument("poincare_ratio: solution must cover the time span of Q_2");
    for (std::size_t k = 0; k < u.pieces.size(); ++k)
        if (!apply_P0(u.pieces[k], u.coefficients[k]).is_zero())
            throw std::invalid_argument("poincare_ratio: input does not solve P_0 u = 0");

    auto squared = [&](auto&& deriv_of) {
        PiecewiseSolution sq;
        sq.breakpoints = u.breakpoints;
        sq.coefficients = u.coefficients;
        for (const Polynomial& p : u.pieces) {
            Polynomial dp = deriv_of(p);
            sq.pieces.push_back(dp * dp);
        }
        return sq;
    };

    PoincareResult res;
    res.num2 = cylinder_integral(squared([](const Polynomial& p) { return p; }), 2, 2);
    res.den_small2 = cylinder_integral(squared([](const Polynomial& p) { return p; }), 1, 1);
    for (int i = 0; i < d; ++i)
        res.den_dz2 += cylinder_integral(
            squared([i](const Polynomial& p) { return p.derivative(Var::z, i); }), 2, 2);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            res.den_dxx2 += cylinder_integral(
                squared([i, j](const Polynomial& p) {
                    return p.derivative(Var::x, i).derivative(Var::x, j);
                }),
                2, 2);

    const double num = std::sqrt(res.num2.to_double());
    const double den = std::sqrt(res.den_small2.to_double()) + std::sqrt(res.den_dz2.to_double()) +
                       std::sqrt(res.den_dxx2.to_double());
    if (den == 0.0) {
        if (num > 0.0)
            throw InvariantError("poincare_ratio: denominator vanished with nonzero numerator");
        throw UndefinedRatioError("poincare_ratio: 0/0");
    }
    res.ratio = num / den;
    return res;
}

MomentMatrix kernel_moment_matrix(int d) {
    if (d != 1 && d != 2)
        throw std::invalid_argument("kernel_moment_matrix: implemented for d in {1,2}");
    const Polynomial one = Polynomial::constant(d, 1);
    const Polynomial t = Polynomial::variable(d, Var::t);

    std::vector<Polynomial> basis{one};
    std::vector<std::string> basis_names{"1"};
    std::vector<Polynomial> weights{one};
    std::vector<std::string> functional_names{"int"};
    for (int i = 0; i < d; ++i) {
        basis.push_back(Polynomial::variable(d, Var::x, i));
        basis_names.push_back(d == 1 ? "x" : "x" + std::to_string(i + 1));
        weights.push_back(Polynomial::variable(d, Var::x, i));
        functional_names.push_back(d == 1 ? "int x" : "int x" + std::to_string(i + 1));
    }
    for (int i = 0; i < d; ++i) {
        basis.push_back(Polynomial::variable(d, Var::y, i) +
                        t * Polynomial::variable(d, Var::x, i));
        basis_names.push_back(d == 1 ? "y+t*x" : "y" + std::to_string(i + 1) + "+t*x" +
                                                     std::to_string(i + 1));
        weights.push_back(Polynomial::variable(d, Var::y, i));
        functional_names.push_back(d == 1 ? "int y" : "int y" + std::to_string(i + 1));
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            basis.push_back(Polynomial::variable(d, Var::x, i) * Polynomial::variable(d, Var::y, j) -
                            Polynomial::variable(d, Var::x, j) * Polynomial::variable(d, Var::y, i));
            basis_names.push_back("x" + std::to_string(i + 1) + "y" + std::to_string(j + 1) +
                                  "-x" + std::to_string(j + 1) + "y" + std::to_string(i + 1));
            weights.push_back(Polynomial::variable(d, Var::x, i) *
                              Polynomial::variable(d, Var::y, j));
            functional_names.push_back("int x" + std::to_string(i + 1) + "y" +
                                       std::to_string(j + 1));
        }

    const int n = static_cast<int>(basis.size());
    MomentMatrix mm;
    mm.d = d;
    mm.basis_names = basis_names;
    mm.functional_names = functional_names;
    mm.entry_pi_power = (d == 2) ? 3 : 0;
    mm.entries.assign(n, std::vector<Rational>(n, Rational(0)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const ExactValue v = cylinder_integral(weights[i] * basis[j], 1, 1);
            if (sgn(v.q) != 0 && v.pi_power != mm.entry_pi_power)
                throw InvariantError("kernel_moment_matrix: inconsistent pi powers");
            mm.entries[i][j] = v.q;
        }

    // plain Gaussian elimination over the rationals
    std::vector<std::vector<Rational>> m = mm.entries;
    Rational det(1);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int row = col; row < n; ++row)
            if (sgn(m[row][col]) != 0) {
                pivot = row;
                break;
            }
        if (pivot < 0) {
            det = 0;
            break;
        }
        if (pivot != col) {
            std::swap(m[pivot], m[col]);
            det = -det;
        }
        det *= m[col][col];
        for (int row = col + 1; row < n; ++row) {
            if (sgn(m[row][col]) == 0) continue;
            const Rational f = m[row][col] / m[col][col];
            for (int c2 = col; c2 < n; ++c2) m[row][c2] -= f * m[col][c2];
        }
    }
    mm.det = det;
    mm.det_pi_power = mm.entry_pi_power * n;
    return mm;
}

namespace {

// all compositions of `total` into `parts` nonneg integers, with multiplicity
// total! / prod(alpha_i!)
void enumerate_multi(int total, int parts, std::vector<int>& cur, int pos,
                     const std::function<void(const std::vector<int>&, double)>& emit) {
    if (pos == parts - 1) {
        cur[pos] = total;
        int nsum = 0;
        for (int i = 0; i < parts; ++i) nsum += cur[i];
        double logm = std::lgamma(nsum + 1.0);
        for (int i = 0; i < parts; ++i) logm -= std::lgamma(cur[i] + 1.0);
        emit(cur, std::exp(logm));
        return;
    }
    for (int k = 0; k <= total; ++k) {
        cur[pos] = k;
        enumerate_multi(total - k, parts, cur, pos + 1, emit);
    }
}

}  // namespace

double interior_ratio(const Polynomial& u, const RatMatrix& a, int m, int l, int k,
                      const Rational& R, int grid_n) {
    const int d = u.dim();
    if (u.is_zero()) throw UndefinedRatioError("interior_ratio: zero solution");
    if (!apply_P0(u, a).is_zero())
        throw std::invalid_argument("interior_ratio: input does not solve P_0 u = 0");
    if (!(R > Rational(1, 2) && R < Rational(1)))
        throw std::invalid_argument("interior_ratio: R must lie in (1/2, 1)");
    if (grid_n < 2) throw std::invalid_argument("interior_ratio: grid_n must be >= 2");

    // exact derivative tensor entries with multinomial multiplicities
    struct Entry {
        Polynomial p;
        double mult;
    };
    std::vector<Entry> entries;
    std::vector<int> ax(d), ay(d), az(d);
    enumerate_multi(m, d, ax, 0, [&](const std::vector<int>& ex, double mx) {
        enumerate_multi(l, d, ay, 0, [&](const std::vector<int>& ey, double my) {
            enumerate_multi(k, d, az, 0, [&](const std::vector<int>& ez, double mz) {
                Polynomial p = u;
                for (int i = 0; i < d; ++i) {
                    for (int c = 0; c < ex[i]; ++c) p = p.derivative(Var::x, i);
                    for (int c = 0; c < ey[i]; ++c) p = p.derivative(Var::y, i);
                    for (int c = 0; c < ez[i]; ++c) p = p.derivative(Var::z, i);
                }
                entries.push_back({std::move(p), mx * my * mz});
            });
        });
    });

    std::vector<Entry> dt_entries;
    dt_entries.reserve(entries.size());
    for (const Entry& e : entries) dt_entries.push_back({e.p.derivative(Var::t), e.mult});

    // dense sample grid over Q_{1/2}
    auto axis_nodes = [&](double lo, double hi) {
        std::vector<double> v(grid_n);
        for (int i = 0; i < grid_n; ++i) v[i] = lo + (hi - lo) * (i + 0.5) / grid_n;
        return v;
    };
    const std::vector<double> tn = axis_nodes(-0.25, 0.0);
    const std::vector<double> xn = axis_nodes(-0.5, 0.5);
    const std::vector<double> yn = axis_nodes(-0.125, 0.125);
    const std::vector<double> zn = axis_nodes(-0.03125, 0.03125);

    double sup1 = 0.0, sup2 = 0.0;
    Vec xv(d, 0.0), yv(d, 0.0), zv(d, 0.0);
    if (d != 1)
        throw std::invalid_argument("interior_ratio: sampling grid implemented for d = 1");
    for (double tt : tn)
        for (double xx : xn)
            for (double yy : yn)
                for (double zz : zn) {
                    xv[0] = xx;
                    yv[0] = yy;
                    zv[0] = zz;
                    double s1 = 0.0, s2 = 0.0;
                    for (std::size_t i = 0; i < entries.size(); ++i) {
                        const double v1 = entries[i].p.eval_double(tt, xv, yv, zv);
                        const double v2 = dt_entries[i].p.eval_double(tt, xv, yv, zv);
                        s1 += entries[i].mult * v1 * v1;
                        s2 += entries[i].mult * v2 * v2;
                    }
                    sup1 = std::max(sup1, std::sqrt(s1));
                    sup2 = std::max(sup2, std::sqrt(s2));
                }

    const ExactValue den2 = cylinder_integral(u * u, R, R);
    const double den = std::sqrt(den2.to_double());
    if (den == 0.0) throw InvariantError("interior_ratio: denominator vanished");
    return (sup1 + sup2) / den;
}

double scaling_conjugation_check(const Polynomial& u, const RatMatrix& a, const Rational& r,
                                 const Rational& t0, const std::vector<Rational>& x0,
                                 const std::vector<Rational>& y0, const std::vector<Rational>& z0,
                                 int grid_n) {
    const int d = u.dim();
    if (static_cast<int>(x0.size()) != d || static_cast<int>(y0.size()) != d ||
        static_cast<int>(z0.size()) != d)
        throw std::invalid_argument("scaling_conjugation_check: center dimension mismatch");
    if (sgn(r) <= 0) throw std::invalid_argument("scaling_conjugation_check: r must be positive");

    const Rational r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r5 = r4 * r;
    const Polynomial t = Polynomial::variable(d, Var::t);

    // tilde X = (t0 + r^2 t, x0 + r x, y0 + r^3 y - r^2 t x0,
    //            z0 + r^5 z - r^2 t y0 + (r^4 t^2 / 2) x0)
    std::vector<Polynomial> images;
    images.push_back(t.scaled(r2) + Polynomial::constant(d, t0));
    for (int i = 0; i < d; ++i)
        images.push_back(Polynomial::variable(d, Var::x, i).scaled(r) +
                         Polynomial::constant(d, x0[i]));
    for (int i = 0; i < d; ++i)
        images.push_back(Polynomial::variable(d, Var::y, i).scaled(r3) +
                         Polynomial::constant(d, y0[i]) - t.scaled(r2 * x0[i]));
    for (int i = 0; i < d; ++i)
        images.push_back(Polynomial::variable(d, Var::z, i).scaled(r5) +
                         Polynomial::constant(d, z0[i]) - t.scaled(r2 * y0[i]) +
                         (t * t).scaled(r4 * x0[i] / 2));

    const Polynomial u_tilde = u.substitute(images);
    const Polynomial lhs = apply_P0(u_tilde, a);
    const Polynomial rhs = apply_P0(u, a).substitute(images).scaled(r2);
    const Polynomial diff = lhs - rhs;
    if (diff.is_zero()) return 0.0;

    double worst = 0.0;
    std::vector<double> nodes(grid_n);
    for (int i = 0; i < grid_n; ++i) nodes[i] = -1.0 + 2.0 * i / (grid_n - 1);
    // sample every variable over [-1,1]^{1+3d}
    const int nv = 1 + 3 * d;
    std::vector<int> idx(nv, 0);
    Vec xv(d), yv(d), zv(d);
    for (;;) {
        const double tt = nodes[idx[0]];
        for (int i = 0; i < d; ++i) {
            xv[i] = nodes[idx[1 + i]];
            yv[i] = nodes[idx[1 + d + i]];
            zv[i] = nodes[idx[1 + 2 * d + i]];
        }
        worst = std::max(worst, std::abs(diff.eval_double(tt, xv, yv, zv)));
        int a2 = 0;
        while (a2 < nv && ++idx[a2] == grid_n) idx[a2++] = 0;
        if (a2 == nv) break;
    }
    return worst;
}

}  // namespace kfp
