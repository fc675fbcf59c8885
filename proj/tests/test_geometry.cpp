#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kfp/geometry.hpp"
#include "kfp/rng.hpp"

using namespace kfp;

namespace {

PhasePoint rand_point(Rng& rng, int d, double span = 1.5) {
    PhasePoint p = PhasePoint::zero(d);
    p.t = rng.uniform(-span, span);
    for (int i = 0; i < d; ++i) {
        p.x[i] = rng.uniform(-span, span);
        p.y[i] = rng.uniform(-span, span);
        p.z[i] = rng.uniform(-span, span);
    }
    return p;
}

}  // namespace

TEST_CASE("group composition and identity") {
    const PhasePoint e = PhasePoint::zero(1);
    const PhasePoint X(0.7, {-0.3}, {1.2}, {0.4});
    CHECK(max_abs_diff(compose(e, X), X) == 0.0);
    CHECK(max_abs_diff(compose(X, e), X) == 0.0);

    // (1,1,0,0) o (1,0,0,0) = (2, 1, -1, 1/2)
    const PhasePoint g(1.0, {1.0}, {0.0}, {0.0});
    const PhasePoint h(1.0, {0.0}, {0.0}, {0.0});
    const PhasePoint gh = compose(g, h);
    CHECK(gh.t == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(gh.x[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gh.y[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(gh.z[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("group inverse") {
    CHECK(max_abs_diff(inverse(PhasePoint::zero(2)), PhasePoint::zero(2)) == 0.0);

    // inverse((1,1,0,0)) = (-1,-1,-1,-1/2), solved from the component equations
    const PhasePoint g(1.0, {1.0}, {0.0}, {0.0});
    const PhasePoint gi = inverse(g);
    CHECK(gi.t == -1.0);
    CHECK(gi.x[0] == -1.0);
    CHECK(gi.y[0] == -1.0);
    CHECK(gi.z[0] == -0.5);

    Rng rng(11);
    for (int d : {1, 2, 3}) {
        for (int i = 0; i < 100; ++i) {
            const PhasePoint a = rand_point(rng, d);
            CHECK(max_abs_diff(compose(a, inverse(a)), PhasePoint::zero(d)) <= 1e-12);
            CHECK(max_abs_diff(compose(inverse(a), a), PhasePoint::zero(d)) <= 1e-12);
        }
    }
}

TEST_CASE("group associativity over random triples") {
    Rng rng(17);
    double worst = 0.0;
    for (int d : {1, 2, 3})
        for (int i = 0; i < 400; ++i) {
            const PhasePoint a = rand_point(rng, d);
            const PhasePoint b = rand_point(rng, d);
            const PhasePoint c = rand_point(rng, d);
            worst = std::max(worst,
                             max_abs_diff(compose(compose(a, b), c), compose(a, compose(b, c))));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("anisotropic dilation") {
    const PhasePoint X(1.0, {1.0}, {1.0}, {1.0});
    CHECK(max_abs_diff(dilate(1.0, X), X) == 0.0);
    const PhasePoint Y = dilate(2.0, X);
    CHECK(Y.t == 4.0);
    CHECK(Y.x[0] == 2.0);
    CHECK(Y.y[0] == 8.0);
    CHECK(Y.z[0] == 32.0);

    Rng rng(23);
    for (double r : {0.5, 3.0}) {
        const PhasePoint Z = rand_point(rng, 2);
        CHECK(max_abs_diff(dilate(r, dilate(1.0 / r, Z)), Z) <= 1e-14);
    }
    CHECK_THROWS_AS(dilate(0.0, X), std::invalid_argument);
    CHECK_THROWS_AS(dilate(-2.0, X), std::invalid_argument);
}

TEST_CASE("dilation is a group automorphism") {
    Rng rng(31);
    double worst = 0.0;
    for (int d : {1, 2, 3})
        for (int i = 0; i < 400; ++i) {
            const PhasePoint a = rand_point(rng, d);
            const PhasePoint b = rand_point(rng, d);
            const double r = rng.uniform(0.4, 2.0);
            worst = std::max(
                worst, max_abs_diff(dilate(r, compose(a, b)), compose(dilate(r, a), dilate(r, b))));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("cylinder membership") {
    const Cylinder q(PhasePoint::zero(1), 1.0, 1.0);
    CHECK(cylinder_contains(q, PhasePoint(-0.5, {0.0}, {0.0}, {0.0})));
    CHECK_FALSE(cylinder_contains(q, PhasePoint(-0.5, {0.0}, {0.0}, {1.5})));
    // past kind excludes t >= t0
    CHECK_FALSE(cylinder_contains(q, PhasePoint(0.0, {0.0}, {0.0}, {0.0})));
    CHECK_FALSE(cylinder_contains(q, PhasePoint(0.5, {0.0}, {0.0}, {0.0})));
    const Cylinder qs(PhasePoint::zero(1), 1.0, 1.0, CylinderKind::symmetric);
    CHECK(cylinder_contains(qs, PhasePoint(0.5, {0.0}, {0.0}, {0.0})));

    // skew: center (0,1,0,0), point (-0.5, 1, 0.4, 0): |y - y0 + (t-t0) x0| = |0.4 - 0.5| < 1
    const Cylinder qc(PhasePoint(0.0, {1.0}, {0.0}, {0.0}), 1.0, 1.0);
    CHECK(cylinder_contains(qc, PhasePoint(-0.5, {1.0}, {0.4}, {0.0})));
    // a y offset that lands outside the transported window fails
    CHECK_FALSE(cylinder_contains(qc, PhasePoint(-0.5, {1.0}, {1.6}, {0.0})));
}

TEST_CASE("cylinder membership is dilation covariant") {
    Rng rng(41);
    for (int i = 0; i < 500; ++i) {
        const int d = 1 + static_cast<int>(rng.next() % 3);
        const double r = rng.uniform(0.3, 2.0), R = rng.uniform(0.3, 2.0);
        const double s = rng.uniform(0.3, 3.0);
        const PhasePoint X = rand_point(rng, d, 2.0);
        const Cylinder q0(PhasePoint::zero(d), r, R);
        const Cylinder q1(PhasePoint::zero(d), s * r, s * R);
        CHECK(cylinder_contains(q0, X) == cylinder_contains(q1, dilate(s, X)));
    }
}

TEST_CASE("cylinder volume") {
    CHECK(cylinder_volume(Cylinder(PhasePoint::zero(1), 1.0, 1.0)) == doctest::Approx(8.0));
    CHECK(cylinder_volume(Cylinder(PhasePoint::zero(1), 2.0, 2.0)) == doctest::Approx(16384.0));
    CHECK(cylinder_volume(Cylinder(PhasePoint::zero(2), 1.0, 1.0)) ==
          doctest::Approx(std::pow(std::numbers::pi, 3)));
    // |Q_{sr,sR}| / |Q_{r,R}| = s^{2+9d} at r = R; exact for dyadic s
    for (int d : {1, 2}) {
        const double v1 = cylinder_volume(Cylinder(PhasePoint::zero(d), 1.0, 1.0));
        const double v2 = cylinder_volume(Cylinder(PhasePoint::zero(d), 2.0, 2.0));
        CHECK(v2 / v1 == std::pow(2.0, 2 + 9 * d));
    }
    CHECK_THROWS_AS(cylinder_volume(Cylinder(PhasePoint::zero(3), 1.0, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("spatial slice membership") {
    SpatialSlice D;
    D.center = PhasePoint(0.0, {1.0}, {0.0}, {0.0});
    D.R = 1.0;
    D.t = -0.5;
    // same skew structure as the cylinder section at fixed time
    CHECK(slice_contains(D, {1.0}, {0.4}, {0.0}));
    CHECK_FALSE(slice_contains(D, {2.5}, {0.0}, {0.0}));
}

TEST_CASE("oscillation functional") {
    OscillationSpec spec;
    spec.seed = 99;
    const Cylinder q(PhasePoint::zero(1), 1.0, 1.0);

    const double c = oscillation(
        [](double, const Vec&, const Vec&, const Vec&) { return 3.25; }, q, spec);
    CHECK(c == 0.0);

    const double tc = oscillation(
        [](double t, const Vec&, const Vec&, const Vec&) { return std::cos(t); }, q, spec);
    CHECK(tc == 0.0);

    // sign(x): two equal half volumes, |a1 - a2| = 2 with probability 1/2
    const double s = oscillation(
        [](double, const Vec& x, const Vec&, const Vec&) { return x[0] > 0 ? 1.0 : -1.0; }, q,
        spec);
    CHECK(std::abs(s - 1.0) <= 0.05);
}

TEST_CASE("usage errors") {
    CHECK_THROWS_AS(PhasePoint(0.0, {1.0}, {1.0, 2.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(compose(PhasePoint::zero(1), PhasePoint::zero(2)), std::invalid_argument);
    CHECK_THROWS_AS(Cylinder(PhasePoint::zero(1), 0.0, 1.0), std::invalid_argument);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(PhasePoint(inf, {0.0}, {0.0}, {0.0}), std::invalid_argument);
}
