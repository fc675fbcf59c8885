#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kfp/errors.hpp"
#include "kfp/geometry.hpp"
#include "kfp/poly.hpp"
#include "kfp/rng.hpp"

using namespace kfp;

namespace {

Polynomial var(Var v, int d = 1, int i = 0) { return Polynomial::variable(d, v, i); }

RatCoefficientPath corpus_path() {
    // delta, 1, delta^{-1} pieces with delta = 1/2 over the Q_2 time span
    RatCoefficientPath p;
    p.breakpoints = {Rational(-4), Rational(-2), Rational(-1), Rational(0)};
    p.pieces = {RatMatrix::identity(1, Rational(1, 2)), RatMatrix::identity(1, Rational(1)),
                RatMatrix::identity(1, Rational(2))};
    return p;
}

}  // namespace

TEST_CASE("polynomial arithmetic and degrees") {
    const Polynomial t = var(Var::t), x = var(Var::x), y = var(Var::y), z = var(Var::z);
    const Polynomial p = (x + y) * (x + y);
    CHECK(p.term_count() == 3);
    CHECK(p.weighted_degree() == 6);  // y^2 carries weight 6
    CHECK((p - x * x - y * y - x * y - x * y).is_zero());
    CHECK((t * z).weighted_degree() == 7);
    CHECK(Polynomial(1).weighted_degree() == -1);

    const Polynomial q = x * x * y - z;
    CHECK(q.eval_double(0.0, {2.0}, {3.0}, {5.0}) == doctest::Approx(7.0));
    CHECK(q.derivative(Var::x).derivative(Var::x) == Polynomial::constant(1, 2) * y);
    CHECK(q.eval_at_t(Rational(3)) == q);  // no t dependence
}

TEST_CASE("apply_P0") {
    const RatMatrix a = RatMatrix::identity(1);
    const Polynomial t = var(Var::t), x = var(Var::x), y = var(Var::y), z = var(Var::z);
    CHECK(apply_P0(Polynomial::constant(1, Rational(5)), a).is_zero());
    CHECK(apply_P0(y + t * x, a).is_zero());
    CHECK(apply_P0(x * x, a) == Polynomial::constant(1, Rational(-2)));
    CHECK(apply_P0(x * x + t + t, a).is_zero());
    CHECK(apply_P0(z + t * y + (t * t).scaled(Rational(1, 2)) * x, a).is_zero());
}

TEST_CASE("evolve pins") {
    const RatCoefficientPath one = RatCoefficientPath::constant(RatMatrix::identity(1),
                                                                Rational(-1), Rational(1));
    const Polynomial t = var(Var::t), x = var(Var::x), y = var(Var::y), z = var(Var::z);

    // g = y: u = y + (t - t0) x
    const PiecewiseSolution uy = evolve(y, one, Rational(-1), Rational(1));
    CHECK(uy.pieces.size() == 1);
    CHECK(uy.pieces[0] == y + (t + Polynomial::constant(1, Rational(1))) * x);

    // g = z: u = z + (t - t0) y + ((t - t0)^2 / 2) x
    const PiecewiseSolution uz = evolve(z, one, Rational(0), Rational(1));
    CHECK(uz.pieces[0] == z + t * y + (t * t).scaled(Rational(1, 2)) * x);

    // g = x^2: u = x^2 + 2 (t - t0)
    const PiecewiseSolution ux2 = evolve(x * x, one, Rational(0), Rational(1));
    CHECK(ux2.pieces[0] == x * x + t + t);

    CHECK_THROWS_AS(evolve(t * x, one, Rational(0), Rational(1)), std::invalid_argument);
    CHECK_THROWS_AS(evolve(x, one, Rational(1), Rational(0)), std::invalid_argument);
}

TEST_CASE("evolve solves the equation exactly on every piece") {
    const RatCoefficientPath path = corpus_path();
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        // random initial polynomial of weighted degree <= 12
        Polynomial g(1);
        const int picks = rng.uniform_int(1, 5);
        for (int p = 0; p < picks; ++p) {
            const int bz = rng.uniform_int(0, 2);
            const int by = rng.uniform_int(0, (12 - 5 * bz) / 3);
            const int bx = rng.uniform_int(0, 12 - 5 * bz - 3 * by);
            g = g + Polynomial::monomial(1, {0, bx, by, bz},
                                          Rational(rng.uniform_int(-9, 9), rng.uniform_int(1, 4)));
        }
        if (g.is_zero()) continue;
        const PiecewiseSolution u = evolve(g, path, Rational(-4), Rational(0));
        CHECK(u.pieces.size() == 3);
        for (std::size_t k = 0; k < u.pieces.size(); ++k)
            CHECK(apply_P0(u.pieces[k], u.coefficients[k]).is_zero());
        // continuity at the breakpoints
        for (std::size_t k = 0; k + 1 < u.pieces.size(); ++k)
            CHECK((u.pieces[k].eval_at_t(u.breakpoints[k + 1]) -
                   u.pieces[k + 1].eval_at_t(u.breakpoints[k + 1]))
                      .is_zero());
        // initial data
        CHECK((u.pieces[0].eval_at_t(Rational(-4)) - g).is_zero());
        // the flow generator drops weighted degree by 2 per application, so
        // the evolved degree never exceeds the initial one
        CHECK(u.pieces.back().weighted_degree() <= g.weighted_degree());
    }
}

TEST_CASE("cylinder integrals") {
    const Polynomial t = var(Var::t), x = var(Var::x);
    CHECK(cylinder_integral(Polynomial::constant(1, Rational(1)), 1, 1).q == Rational(8));
    CHECK(sgn(cylinder_integral(x, 1, 1).q) == 0);
    CHECK(cylinder_integral(t * x * x, 1, 1).q == Rational(-4, 3));
    // d = 2: the unit cylinder has measure pi^3
    const ExactValue v2 = cylinder_integral(Polynomial::constant(2, Rational(1)), 1, 1);
    CHECK(v2.q == Rational(1));
    CHECK(v2.pi_power == 3);
    CHECK(v2.to_double() == doctest::Approx(std::pow(std::numbers::pi, 3)));
}

TEST_CASE("poincare ratio exact pins") {
    const RatCoefficientPath path = corpus_path();

    // u == 1: ratio = sqrt(|Q_2| / |Q_1|) = 2^{5.5}, squared ratio exactly 2^{11}
    {
        const PiecewiseSolution u =
            evolve(Polynomial::constant(1, Rational(1)), path, Rational(-4), Rational(0));
        const PoincareResult pr = poincare_ratio(u);
        CHECK(pr.num2.q / pr.den_small2.q == Rational(2048));
        CHECK(sgn(pr.den_dz2.q) == 0);
        CHECK(sgn(pr.den_dxx2.q) == 0);
        CHECK(pr.ratio == doctest::Approx(std::pow(2.0, 5.5)).epsilon(1e-14));
    }

    // u = y + t x: squared ratio 131072, ratio 2^{8.5}
    {
        const Polynomial g = var(Var::y) - Polynomial::constant(1, Rational(4)) * var(Var::x);
        // evolve from -4 gives y + (t+4)x - 4x = y + tx
        const PiecewiseSolution u = evolve(g, path, Rational(-4), Rational(0));
        CHECK(u.pieces[0] == var(Var::y) + var(Var::t) * var(Var::x));
        const PoincareResult pr = poincare_ratio(u);
        CHECK(pr.num2.q == Rational(4194304, 9));
        CHECK(pr.den_small2.q == Rational(32, 9));
        CHECK(pr.num2.q / pr.den_small2.q == Rational(131072));
        CHECK(pr.ratio == doctest::Approx(362.03867196751236).epsilon(1e-12));
    }

    // u = z + t y + t^2 x / 2
    {
        const Polynomial t = var(Var::t), x = var(Var::x), y = var(Var::y), z = var(Var::z);
        const Polynomial u0 = z + t * y + (t * t).scaled(Rational(1, 2)) * x;
        const PiecewiseSolution u = PiecewiseSolution::single(u0, RatMatrix::identity(1),
                                                              Rational(-4), Rational(0));
        const PoincareResult pr = poincare_ratio(u);
        CHECK(pr.num2.q == Rational(348127232, 45));
        CHECK(pr.den_small2.q == Rational(166, 45));
        CHECK(pr.den_dz2.q == Rational(16384));
        CHECK(pr.ratio == doctest::Approx(21.408417392473837).epsilon(1e-12));
    }

    // g = x^2 evolved through the piecewise path
    {
        const Polynomial x = var(Var::x);
        const PiecewiseSolution u = evolve(x * x, path, Rational(-4), Rational(0));
        const PoincareResult pr = poincare_ratio(u);
        CHECK(pr.num2.q == Rational(5619712, 15));
        CHECK(pr.den_small2.q == Rational(4984, 15));
        CHECK(pr.den_dxx2.q == Rational(65536));
        CHECK(pr.ratio == doctest::Approx(2.2320263306726282).epsilon(1e-12));
    }
}

TEST_CASE("poincare ratio rejects non-solutions and 0/0") {
    const Polynomial x = var(Var::x);
    const PiecewiseSolution bad = PiecewiseSolution::single(x * x, RatMatrix::identity(1),
                                                            Rational(-4), Rational(0));
    CHECK_THROWS_AS(poincare_ratio(bad), std::invalid_argument);

    const PiecewiseSolution zero = PiecewiseSolution::single(Polynomial(1),
                                                             RatMatrix::identity(1), Rational(-4),
                                                             Rational(0));
    CHECK_THROWS_AS(poincare_ratio(zero), UndefinedRatioError);

    // a solution valid on too small a span is refused
    const PiecewiseSolution narrow = PiecewiseSolution::single(
        Polynomial::constant(1, Rational(1)), RatMatrix::identity(1), Rational(-1), Rational(0));
    CHECK_THROWS_AS(poincare_ratio(narrow), std::invalid_argument);
}

TEST_CASE("kernel moment matrix") {
    const MomentMatrix m1 = kernel_moment_matrix(1);
    CHECK(m1.entries[0][0] == Rational(8));
    CHECK(m1.entries[1][1] == Rational(8, 3));
    CHECK(m1.entries[1][2] == Rational(-4, 3));
    CHECK(m1.entries[2][2] == Rational(8, 3));
    CHECK(m1.entries[2][1] == Rational(0));
    CHECK(m1.det == Rational(512, 9));
    CHECK(m1.det_pi_power == 0);

    const MomentMatrix m2 = kernel_moment_matrix(2);
    CHECK(m2.entries.size() == 6);
    CHECK(m2.det == Rational(1, 4096));
    CHECK(m2.det_pi_power == 18);
    CHECK(sgn(m2.det) != 0);

    // scaling sanity: the same moments over Q_2 scale the determinant by a
    // positive factor (rational oracle at r = 2, d = 1)
    const Polynomial t = var(Var::t), x = var(Var::x), y = var(Var::y);
    const Polynomial basis[3] = {Polynomial::constant(1, Rational(1)), x, y + t * x};
    const Polynomial weights[3] = {Polynomial::constant(1, Rational(1)), x, y};
    Rational q2[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q2[i][j] = cylinder_integral(weights[i] * basis[j], 2, 2).q;
    const Rational det2 = q2[0][0] * (q2[1][1] * q2[2][2] - q2[1][2] * q2[2][1]) -
                          q2[0][1] * (q2[1][0] * q2[2][2] - q2[1][2] * q2[2][0]) +
                          q2[0][2] * (q2[1][0] * q2[2][1] - q2[1][1] * q2[2][0]);
    CHECK(sgn(det2) == sgn(m1.det));
    CHECK(sgn(det2 / m1.det) > 0);
}

TEST_CASE("interior estimate diagnostics") {
    const RatMatrix a = RatMatrix::identity(1);
    // u == 1, order (0,0,0): ratio = (8 R^{11})^{-1/2}
    const Rational R(3, 4);
    const double got = interior_ratio(Polynomial::constant(1, Rational(1)), a, 0, 0, 0, R);
    const double want = 1.0 / std::sqrt(8.0 * std::pow(0.75, 11));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));

    // derivative order beyond the degree gives a zero numerator
    CHECK(interior_ratio(Polynomial::constant(1, Rational(1)), a, 3, 0, 0, R) == 0.0);

    // u = y + t x, order (1,0,0): numerator = sup |t| + sup |1| over the grid
    const Polynomial u = var(Var::y) + var(Var::t) * var(Var::x);
    const int grid_n = 9;
    const double got2 = interior_ratio(u, a, 1, 0, 0, R, grid_n);
    const double sup_t = 0.25 - 0.25 * 0.5 / grid_n;  // innermost cell-centered node
    const ExactValue den2 = cylinder_integral(u * u, R, R);
    const double want2 = (sup_t + 1.0) / std::sqrt(den2.to_double());
    CHECK(got2 == doctest::Approx(want2).epsilon(1e-12));

    CHECK_THROWS_AS(interior_ratio(Polynomial(1), a, 0, 0, 0, R), UndefinedRatioError);
    CHECK_THROWS_AS(interior_ratio(var(Var::x) * var(Var::x), a, 0, 0, 0, R),
                    std::invalid_argument);
    CHECK_THROWS_AS(interior_ratio(u, a, 0, 0, 0, Rational(2)), std::invalid_argument);
}

TEST_CASE("dilation covariance of solutions") {
    const RatMatrix a = RatMatrix::identity(1);
    const RatCoefficientPath one =
        RatCoefficientPath::constant(a, Rational(-1), Rational(1));
    const Polynomial x = var(Var::x), z = var(Var::z);
    for (const Polynomial& g : {x * x, z, x * x * x}) {
        const Polynomial u = evolve(g, one, Rational(0), Rational(1)).pieces.front();
        REQUIRE(apply_P0(u, a).is_zero());
        const Polynomial ud = dilate_poly(u, Rational(3, 2));
        // P (u o delta_r) = r^2 (P u) o delta_r = 0 for constant coefficients
        CHECK(apply_P0(ud, a).is_zero());
    }
}

TEST_CASE("left translation realizes the group action") {
    const Polynomial t = var(Var::t), x = var(Var::x), y = var(Var::y), z = var(Var::z);
    const Polynomial u = z * x + y * y - t * x * x;
    const Rational t0(1, 2);
    const std::vector<Rational> x0{Rational(-1)}, y0{Rational(2)}, z0{Rational(1, 3)};
    const Polynomial v = left_translate(u, t0, x0, y0, z0);
    const PhasePoint X0(0.5, {-1.0}, {2.0}, {1.0 / 3.0});
    Rng rng(77);
    for (int i = 0; i < 50; ++i) {
        const PhasePoint X(rng.uniform(-1, 1), {rng.uniform(-1, 1)}, {rng.uniform(-1, 1)},
                           {rng.uniform(-1, 1)});
        const PhasePoint GX = compose(X0, X);
        const double direct = u.eval_double(GX.t, GX.x, GX.y, GX.z);
        const double translated = v.eval_double(X.t, X.x, X.y, X.z);
        CHECK(translated == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("scaling conjugation is an exact operator identity") {
    const RatMatrix a = RatMatrix::identity(1);
    const Polynomial t = var(Var::t), x = var(Var::x), y = var(Var::y), z = var(Var::z);
    const std::vector<Rational> zero{Rational(0)};

    // homogeneous solution: both sides vanish identically
    const Polynomial sol = z + t * y + (t * t).scaled(Rational(1, 2)) * x;
    CHECK(scaling_conjugation_check(sol, a, Rational(1, 2), Rational(0), zero, zero, zero) == 0.0);

    // u = x^2 with r = 1 and X0 = 0: the identity transformation
    CHECK(scaling_conjugation_check(x * x, a, Rational(1), Rational(0), zero, zero, zero) == 0.0);

    // non-solutions satisfy the conjugation law too; residual stays at rounding
    const std::vector<Rational> x0{Rational(1)}, y0{Rational(-2)}, z0{Rational(1, 2)};
    for (const Rational& r : {Rational(1, 2), Rational(2), Rational(3)}) {
        const double res =
            scaling_conjugation_check(x * x * y + z * x, a, r, Rational(-1), x0, y0, z0);
        CHECK(res <= 1e-12);
    }
}
