#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

#include "kfp/geometry.hpp"

namespace kfp {

using Rational = mpq_class;

Rational rat_pow(const Rational& base, int exp);

enum class Var { t, x, y, z };

// Multivariate polynomial in (t, x_1..x_d, y_1..y_d, z_1..z_d) with exact
// rational coefficients. Variable index layout: 0 = t, 1..d = x, d+1..2d = y,
// 2d+1..3d = z. The anisotropic weighted degree counts t twice, x once,
// y three times and z five times; the evolution generator below lowers it by
// exactly 2, which is what makes the exponential flow terminate.
class Polynomial {
public:
    using Exponents = std::vector<int>;

    explicit Polynomial(int d);
    static Polynomial constant(int d, const Rational& c);
    static Polynomial variable(int d, Var v, int index = 0);
    static Polynomial monomial(int d, const Exponents& e, const Rational& c);

    int dim() const { return d_; }
    int nvars() const { return 1 + 3 * d_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::map<Exponents, Rational>& terms() const { return terms_; }

    int weighted_degree() const;  // -1 for the zero polynomial
    static int weighted_degree(const Exponents& e, int d);

    Polynomial operator-() const;
    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial scaled(const Rational& c) const;
    bool operator==(const Polynomial& o) const;

    Polynomial derivative(Var v, int index = 0) const;
    Polynomial substitute(const std::vector<Polynomial>& images) const;
    Polynomial eval_at_t(const Rational& t) const;  // partial evaluation, kt -> 0

    double eval_double(double t, const Vec& x, const Vec& y, const Vec& z) const;

    std::string to_string() const;

    void add_term(const Exponents& e, const Rational& c);
    int var_index(Var v, int index) const;

private:
    int d_;
    std::map<Exponents, Rational> terms_;
};

// Symmetric d x d rational matrix.
struct RatMatrix {
    int d = 1;
    std::vector<Rational> a;  // row-major

    RatMatrix() : a(1, Rational(1)) {}
    static RatMatrix identity(int d, const Rational& scale = Rational(1));
    const Rational& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * d + j]; }
    Rational& at(int i, int j) { return a[static_cast<std::size_t>(i) * d + j]; }
};

// P_0 u = d_t u - x.grad_y u - y.grad_z u - a^{ij} d_{x_i x_j} u, exact.
Polynomial apply_P0(const Polynomial& u, const RatMatrix& a);

// Piecewise-constant rational coefficient path (exact mirror of the floating
// CoefficientPath, used where integrals must stay rational).
struct RatCoefficientPath {
    std::vector<Rational> breakpoints;  // size pieces + 1
    std::vector<RatMatrix> pieces;

    static RatCoefficientPath constant(const RatMatrix& a, const Rational& t0, const Rational& t1);
    const RatMatrix& at(const Rational& t) const;
};

// Solution of P_0 u = 0 assembled piece by piece: u is a polynomial on each
// coefficient interval, glued continuously at the breakpoints.
struct PiecewiseSolution {
    std::vector<Rational> breakpoints;
    std::vector<Polynomial> pieces;
    std::vector<RatMatrix> coefficients;  // matching pieces

    int dim() const { return pieces.empty() ? 0 : pieces.front().dim(); }
    const Polynomial& piece_at(const Rational& t) const;
    static PiecewiseSolution single(Polynomial u, RatMatrix a, const Rational& t0,
                                    const Rational& t1);
};

// Forward flow u(t) = e^{(t - t_k) A_k} ... g with A_k = x.grad_y + y.grad_z +
// a_k^{ij} d_{x_i x_j}. The generator lowers the weighted degree by 2, so each
// exponential is a terminating sum; the result satisfies apply_P0 = 0 exactly
// on every piece and matches g at t_start.
PiecewiseSolution evolve(const Polynomial& g, const RatCoefficientPath& path,
                         const Rational& t_start, const Rational& t_end);

// Exact value q * pi^pi_power (d = 2 ball moments carry one pi per ball).
struct ExactValue {
    Rational q = 0;
    int pi_power = 0;

    double to_double() const;
    ExactValue& operator+=(const ExactValue& o);
    ExactValue operator*(const ExactValue& o) const;
};

// int over the centered box (t0,t1) x B_r x B_{r^3} x B_{R^5}, exact. d in {1,2}.
ExactValue box_integral(const Polynomial& u, const Rational& t0, const Rational& t1,
                        const Rational& r, const Rational& R);

// int over Q_{r,R} = (-r^2, 0) x B_r x B_{r^3} x B_{R^5} (center 0; general
// centers reduce to this by the group translation helper below).
ExactValue cylinder_integral(const Polynomial& u, const Rational& r, const Rational& R);
ExactValue cylinder_integral(const PiecewiseSolution& u, const Rational& r, const Rational& R);

// u(X0 o X) as a polynomial: maps solutions to solutions and polynomials to
// polynomials, so integrals over translated cylinders reduce to centered ones.
Polynomial left_translate(const Polynomial& u, const Rational& t0, const std::vector<Rational>& x0,
                          const std::vector<Rational>& y0, const std::vector<Rational>& z0);

// u(delta_r X): scales each monomial by r^{weighted degree}.
Polynomial dilate_poly(const Polynomial& u, const Rational& r);

struct PoincareResult {
    ExactValue num2;       // ||u||^2 over Q_2
    ExactValue den_small2; // ||u||^2 over Q_1
    ExactValue den_dz2;    // ||grad_z u||^2 over Q_2
    ExactValue den_dxx2;   // ||grad_x^2 u||^2 over Q_2
    double ratio = 0.0;
};

// ||u||_{Q_2} / (||u||_{Q_1} + ||grad_z u||_{Q_2} + ||grad_x^2 u||_{Q_2}) with
// exact integrals; the only floating step is the final square roots.
PoincareResult poincare_ratio(const PiecewiseSolution& u);

struct MomentMatrix {
    int d = 1;
    std::vector<std::string> basis_names;
    std::vector<std::string> functional_names;
    std::vector<std::vector<Rational>> entries;  // rational parts
    int entry_pi_power = 0;                      // every nonzero entry shares it
    Rational det = 0;                            // det of the rational parts
    int det_pi_power = 0;
};

// Gram-type matrix of the kernel family {1, x_i, y_i + t x_i, x_i y_j - x_j y_i}
// against the moment functionals {1, x_i, y_i, x_i y_j} over Q_1. A nonzero
// determinant certifies that the moment conditions pin the family to zero.
MomentMatrix kernel_moment_matrix(int d);

// sup-norm interior estimate diagnostic: numerator samples the derivative
// magnitudes over Q_{1/2} on a dense grid (derivatives exact, sup approximate),
// denominator is the exact ||u||_{L^2(Q_R)}.
double interior_ratio(const Polynomial& u, const RatMatrix& a, int m, int l, int k,
                      const Rational& R, int grid_n = 9);

// max over a sample grid of |P(u o tilde)(X) - r^2 (P u)(tilde X)| where tilde
// is the translated dilation by (r, X0); exact zero up to rounding.
double scaling_conjugation_check(const Polynomial& u, const RatMatrix& a, const Rational& r,
                                 const Rational& t0, const std::vector<Rational>& x0,
                                 const std::vector<Rational>& y0, const std::vector<Rational>& z0,
                                 int grid_n = 5);

}  // namespace kfp
