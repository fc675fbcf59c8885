#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kfp/quadrature.hpp"
#include "kfp/trial.hpp"

using namespace kfp;

namespace {

TrialFunction unit_gaussian(double amplitude = 1.0) {
    Packet p;
    p.time = {-1.0, 0.0, TimeShape::indicator, 2, amplitude};
    p.space.x = {AxisFactor{}};
    p.space.y = {AxisFactor{}};
    p.space.z = {AxisFactor{}};
    return TrialFunction({p});
}

QuadratureSpec fine_spec() {
    QuadratureSpec q;
    q.nodes_xi = 32;
    q.nodes_eta = 28;
    q.nodes_zeta = 24;
    q.nodes_time = 10;
    q.tail_eps = 1e-6;
    return q;
}

}  // namespace

TEST_CASE("transform values") {
    const TrialFunction f = unit_gaussian();
    // outside the time support
    CHECK(f.f_hat(-2.0, FrequencyPoint::zero(1)) == Complex(0.0, 0.0));
    CHECK(f.f_hat(0.5, FrequencyPoint::zero(1)) == Complex(0.0, 0.0));
    // Gaussian integral at the origin: (2 pi)^{3/2}
    const Complex v = f.f_hat(-0.5, FrequencyPoint::zero(1));
    CHECK(v.real() == doctest::Approx(std::pow(2.0 * std::numbers::pi, 1.5)).epsilon(1e-14));
    CHECK(v.imag() == doctest::Approx(0.0));
}

TEST_CASE("hermite order one transform") {
    // x e^{-x^2/2} along x: factor -i sqrt(2 pi) xi e^{-xi^2/2}
    Packet p;
    p.time = {-1.0, 0.0, TimeShape::indicator, 2, 1.0};
    p.space.x = {AxisFactor{0.0, 1.0, 1, 0.0}};
    p.space.y = {AxisFactor{}};
    p.space.z = {AxisFactor{}};
    const TrialFunction f({p});
    const double xi = 0.8;
    const Complex got = f.f_hat(-0.5, FrequencyPoint({xi}, {0.0}, {0.0}));
    const double g0 = std::sqrt(2.0 * std::numbers::pi);
    const Complex want = Complex(0.0, -1.0) * g0 * xi * std::exp(-0.5 * xi * xi) * g0 * g0;
    CHECK(std::abs(got - want) <= 1e-12 * std::abs(want));
}

TEST_CASE("linearity in packet coefficients") {
    Packet p1, p2;
    p1.time = {-1.0, 0.0, TimeShape::indicator, 2, 1.0};
    p1.space.x = {AxisFactor{0.3, 1.1, 1, 0.7}};
    p1.space.y = {AxisFactor{}};
    p1.space.z = {AxisFactor{}};
    p2 = p1;
    p2.space.x[0].center = -0.4;
    p2.coeff = Complex(0.5, -2.0);
    const TrialFunction fa({p1});
    const TrialFunction fb({p2});
    const TrialFunction fab({p1, p2});
    const FrequencyPoint w({0.4}, {-0.2}, {1.3});
    const Complex sum = fa.f_hat(-0.3, w) + fb.f_hat(-0.3, w);
    CHECK(std::abs(fab.f_hat(-0.3, w) - sum) <= 1e-14 * std::max(1.0, std::abs(sum)));
}

TEST_CASE("rhs L2 norm of the unit Gaussian") {
    // ||f||^2 = 1 * pi^{3/2}, so ||f|| = pi^{3/4}
    const double got = rhs_l2_norm(unit_gaussian(), 1.0, fine_spec());
    CHECK(got == doctest::Approx(std::pow(std::numbers::pi, 0.75)).epsilon(2e-6));
}

TEST_CASE("rhs norm homogeneity and time orthogonality") {
    const QuadratureSpec q = fine_spec();
    const double n1 = rhs_l2_norm(unit_gaussian(1.0), 0.0, q);
    const double n2 = rhs_l2_norm(unit_gaussian(2.0), 0.0, q);
    CHECK(n2 == doctest::Approx(2.0 * n1).epsilon(1e-12));

    // disjoint time supports add in square
    Packet a, b;
    a.time = {-1.0, -0.6, TimeShape::indicator, 2, 1.0};
    a.space.x = {AxisFactor{0.2, 1.0, 1, 0.0}};
    a.space.y = {AxisFactor{}};
    a.space.z = {AxisFactor{}};
    b = a;
    b.time = {-0.5, -0.1, TimeShape::smooth_bump, 2, 1.3};
    b.space.x[0].center = -0.3;
    const double na = rhs_l2_norm(TrialFunction({a}), 0.0, q);
    const double nb = rhs_l2_norm(TrialFunction({b}), 0.0, q);
    const double nab = rhs_l2_norm(TrialFunction({a, b}), 0.0, q);
    CHECK(nab * nab == doctest::Approx(na * na + nb * nb).epsilon(1e-10));
}

TEST_CASE("Parseval agrees with physical-space quadrature") {
    Packet p;
    p.time = {-0.9, -0.2, TimeShape::indicator, 2, 1.0};
    p.space.x = {AxisFactor{0.3, 1.2, 0, 0.0}};
    p.space.y = {AxisFactor{-0.2, 0.9, 0, 0.0}};
    p.space.z = {AxisFactor{0.1, 1.0, 0, 0.0}};
    const TrialFunction f({p});

    // direct |f|^2 integral: time factor x product of Gaussian integrals
    const auto& [gx, gw] = gauss_legendre(48);
    auto axis_sq = [&](const AxisFactor& a) {
        double acc = 0.0;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            const double u = a.center + 8.0 * a.width * gx[i];
            const double s = (u - a.center) / a.width;
            const double g = std::exp(-0.5 * s * s);
            acc += 8.0 * a.width * gw[i] * g * g;
        }
        return acc;
    };
    const double direct2 =
        0.7 * axis_sq(p.space.x[0]) * axis_sq(p.space.y[0]) * axis_sq(p.space.z[0]);
    const double parseval = rhs_l2_norm(f, 0.0, fine_spec());
    CHECK(parseval == doctest::Approx(std::sqrt(direct2)).epsilon(1e-6));
}

TEST_CASE("physical evaluation matches the packet formula") {
    Packet p;
    p.time = {-1.0, 0.0, TimeShape::smooth_bump, 3, 2.0};
    p.space.x = {AxisFactor{0.5, 1.5, 2, 1.0}};
    p.space.y = {AxisFactor{}};
    p.space.z = {AxisFactor{}};
    const TrialFunction f({p});
    const double t = -0.4, x = 0.8, y = -0.1, z = 0.3;
    const double half = 0.5;
    const double prof = 2.0 * std::pow((t + 1.0) * (0.0 - t) / (half * half), 3);
    const double sx = (x - 0.5) / 1.5;
    const Complex fx = sx * sx * std::exp(-0.5 * sx * sx) * std::exp(Complex(0.0, 1.0 * x));
    const Complex fy = std::exp(Complex(-0.5 * y * y, 0.0));
    const Complex fz = std::exp(Complex(-0.5 * z * z, 0.0));
    const Complex want = prof * fx * fy * fz;
    CHECK(std::abs(f.eval_physical(t, {x}, {y}, {z}) - want) <= 1e-14 * std::abs(want));
}

TEST_CASE("dilation of the trial family") {
    Packet p;
    p.time = {-0.8, -0.2, TimeShape::indicator, 2, 1.0};
    p.space.x = {AxisFactor{0.4, 1.1, 1, 0.6}};
    p.space.y = {AxisFactor{-0.1, 0.9, 0, -0.4}};
    p.space.z = {AxisFactor{0.2, 1.3, 2, 0.8}};
    const TrialFunction f({p});

    const TrialFunction f1 = f.dilated(1.0);
    CHECK(f1.packets()[0].time.s0 == p.time.s0);
    CHECK(f1.packets()[0].space.x[0].width == p.space.x[0].width);

    const double r = 2.0;
    const TrialFunction fr = f.dilated(r);
    CHECK(fr.packets()[0].time.s0 == doctest::Approx(p.time.s0 / (r * r)));
    CHECK(fr.packets()[0].space.x[0].width == doctest::Approx(p.space.x[0].width / r));
    CHECK(fr.packets()[0].space.y[0].width == doctest::Approx(p.space.y[0].width / (r * r * r)));
    CHECK(fr.packets()[0].space.z[0].width == doctest::Approx(p.space.z[0].width / std::pow(r, 5)));
    CHECK(fr.packets()[0].space.x[0].modulation == doctest::Approx(p.space.x[0].modulation * r));

    // pointwise identity f_r(X) = f(delta_r X)
    const double t = -0.1, x = 0.3, y = -0.05, z = 0.01;
    const Complex lhs = fr.eval_physical(t, {x}, {y}, {z});
    const Complex rhs =
        f.eval_physical(r * r * t, {r * x}, {r * r * r * y}, {std::pow(r, 5) * z});
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(rhs)));

    // || f o delta_r || = r^{-(2+9d)/2} || f ||
    const QuadratureSpec q = fine_spec();
    const double base = rhs_l2_norm(f, 0.0, q);
    const double scaled = rhs_l2_norm(fr, 0.0, q);
    CHECK(scaled == doctest::Approx(std::pow(r, -5.5) * base).epsilon(1e-8));
}

TEST_CASE("validation") {
    Packet p;
    p.time = {0.0, -1.0, TimeShape::indicator, 2, 1.0};  // reversed support
    p.space.x = {AxisFactor{}};
    p.space.y = {AxisFactor{}};
    p.space.z = {AxisFactor{}};
    CHECK_THROWS_AS(TrialFunction({p}), std::invalid_argument);
    p.time = {-1.0, 0.0, TimeShape::indicator, 2, 1.0};
    p.space.x[0].width = -1.0;
    CHECK_THROWS_AS(TrialFunction({p}), std::invalid_argument);
    p.space.x[0].width = 1.0;
    p.space.x[0].hermite = 7;
    CHECK_THROWS_AS(TrialFunction({p}), std::invalid_argument);
    CHECK_THROWS_AS(TrialFunction(std::vector<Packet>{}), std::invalid_argument);
}
