#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kfp/errors.hpp"
#include "kfp/norms.hpp"

using namespace kfp;

namespace {

TrialFunction unit_gaussian(Complex coeff = 1.0) {
    Packet p;
    p.time = {-1.0, 0.0, TimeShape::indicator, 2, 1.0};
    p.space.x = {AxisFactor{}};
    p.space.y = {AxisFactor{}};
    p.space.z = {AxisFactor{}};
    p.coeff = coeff;
    return TrialFunction({p});
}

CoefficientPath unit_path() { return CoefficientPath::scalar_constant(1.0, 0.5); }

QuadratureSpec default_spec() {
    QuadratureSpec q;
    q.rel_tol = 1e-9;
    return q;
}

}  // namespace

TEST_CASE("zero source gives the zero vector and an undefined ratio") {
    const SpectralSolution sol(unit_path(), 1.0, unit_gaussian(0.0), default_spec());
    const SeminormVector v = seminorms(sol, default_spec());
    CHECK(v.lambda_u == 0.0);
    CHECK(v.grad_x2 == 0.0);
    CHECK(v.transport == 0.0);
    CHECK(v.rhs == 0.0);
    CHECK_THROWS_AS(estimate_ratio(v), UndefinedRatioError);
}

TEST_CASE("amplitude homogeneity") {
    const QuadratureSpec q = default_spec();
    const SeminormVector v1 = seminorms(SpectralSolution(unit_path(), 1.0, unit_gaussian(), q), q);
    const SeminormVector v2 =
        seminorms(SpectralSolution(unit_path(), 1.0, unit_gaussian(2.0), q), q);
    for (auto [a, b] : {std::pair{v1.lambda_u, v2.lambda_u},
                        {v1.sqrtlambda_grad_x, v2.sqrtlambda_grad_x},
                        {v1.grad_x2, v2.grad_x2},
                        {v1.frac_y13, v2.frac_y13},
                        {v1.frac_z15, v2.frac_z15},
                        {v1.mixed_xy16, v2.mixed_xy16},
                        {v1.transport, v2.transport},
                        {v1.rhs, v2.rhs}}) {
        CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-10));
    }
    CHECK(estimate_ratio(v1) == doctest::Approx(estimate_ratio(v2)).epsilon(1e-10));
}

TEST_CASE("lambda = 0 keeps the ratio finite with vanishing lambda entries") {
    const QuadratureSpec q = default_spec();
    const SeminormVector v = seminorms(SpectralSolution(unit_path(), 0.0, unit_gaussian(), q), q);
    CHECK(v.lambda_u == 0.0);
    CHECK(v.sqrtlambda_grad_x == 0.0);
    CHECK(v.grad_x2 > 0.0);
    CHECK(std::isfinite(estimate_ratio(v)));
}

TEST_CASE("a source concentrated near |xi| = k sees grad_x2 / lambda_u near k^2") {
    Packet p;
    p.time = {-1.0, 0.0, TimeShape::indicator, 2, 1.0};
    p.space.x = {AxisFactor{0.0, 2.0, 0, 8.0}};  // wide in x => tight around xi = 8
    p.space.y = {AxisFactor{}};
    p.space.z = {AxisFactor{}};
    const TrialFunction f({p});
    QuadratureSpec q = default_spec();
    const double lambda = 1.0;
    const SeminormVector v = seminorms(SpectralSolution(unit_path(), lambda, f, q), q);
    const double k2 = 64.0;
    CHECK(v.grad_x2 / v.lambda_u == doctest::Approx(k2 / lambda).epsilon(0.2));
}

TEST_CASE("determinism of the seminorm engine") {
    const QuadratureSpec q = default_spec();
    const SeminormVector a = seminorms(SpectralSolution(unit_path(), 1.0, unit_gaussian(), q), q);
    const SeminormVector b = seminorms(SpectralSolution(unit_path(), 1.0, unit_gaussian(), q), q);
    CHECK(a.transport == b.transport);
    CHECK(a.rhs == b.rhs);
    CHECK(estimate_ratio(a) == estimate_ratio(b));
}

TEST_CASE("scale invariance of the seminorm vector and the ratio") {
    Packet p;
    p.time = {-0.9, -0.1, TimeShape::smooth_bump, 2, 1.0};
    p.space.x = {AxisFactor{0.2, 1.1, 1, 0.8}};
    p.space.y = {AxisFactor{-0.1, 1.0, 0, -0.5}};
    p.space.z = {AxisFactor{0.0, 1.2, 2, 0.3}};
    const TrialFunction f({p});
    const CoefficientPath a({-1.0, -0.4, 0.0}, {SymMatrix::scalar(0.7), SymMatrix::scalar(1.3)},
                            0.5);
    const QuadratureSpec q = default_spec();

    const ScaleCheckResult r1 = scale_invariance_check(f, a, 1.0, 1.0, q);
    CHECK(r1.max_entry_deviation == doctest::Approx(0.0));
    CHECK(r1.expected_factor == doctest::Approx(1.0));

    for (double r : {0.5, 2.0, 4.0}) {
        const ScaleCheckResult res = scale_invariance_check(f, a, 1.0, r, q);
        CHECK(res.expected_factor ==
              doctest::Approx(r * r * std::pow(r, -5.5)).epsilon(1e-14));
        CHECK(res.max_entry_deviation <= 1e-5);
        CHECK(res.ratio_deviation <= 1e-5);
    }
    // d = 1, r = 2: the common factor is 2^{-7/2}
    const ScaleCheckResult res2 = scale_invariance_check(f, a, 1.0, 2.0, q);
    CHECK(res2.expected_factor == doctest::Approx(std::pow(2.0, -3.5)).epsilon(1e-14));
}

TEST_CASE("interpolation bound transfers exactly to the quadrature") {
    const QuadratureSpec q = default_spec();
    Packet p;
    p.time = {-1.0, 0.0, TimeShape::indicator, 2, 1.0};
    p.space.x = {AxisFactor{0.1, 1.0, 1, 1.2}};
    p.space.y = {AxisFactor{0.0, 0.95, 2, -0.7}};
    p.space.z = {AxisFactor{-0.2, 1.1, 0, 0.4}};
    for (double lambda : {0.0, 1.0, 10.0}) {
        const SeminormVector v =
            seminorms(SpectralSolution(unit_path(), lambda, TrialFunction({p}), q), q);
        CHECK(v.mixed_xy16 <= 0.5 * (v.grad_x2 + v.frac_y13) + 1e-8);
    }
}

TEST_CASE("Parseval cross-check of lambda_u against physical-space quadrature") {
    // single Gaussian source, lambda = 1: ||u|| from the inverse transform of U
    // on a physical grid must match the engine's lambda_u
    QuadratureSpec q;
    q.nodes_xi = 56;
    q.nodes_eta = 48;
    q.nodes_zeta = 40;
    q.nodes_time = 12;
    q.rel_tol = 1e-12;
    q.tail_eps = 1e-9;
    const TrialFunction f = unit_gaussian();
    const SpectralSolution sol(unit_path(), 1.0, f, q);
    const SeminormVector v = seminorms(sol, q);

    // frequency boxes: the source spectrum is +-5, eta widens by the zeta
    // drift over the unit time span, xi by the eta and zeta drifts
    auto make_axis = [](double rad, int n) {
        const auto& [gx, gw] = gauss_legendre(n);
        std::pair<std::vector<double>, std::vector<double>> a;
        for (int i = 0; i < n; ++i) {
            a.first.push_back(rad * gx[i]);
            a.second.push_back(rad * gw[i]);
        }
        return a;
    };
    // frequency node counts resolve the e^{i x xi} oscillation over the
    // physical box: at least L * x_max / 2 nodes plus a convergence margin
    const auto [xin, xiw] = make_axis(17.5, 170);
    const auto [etn, etw] = make_axis(10.0, 100);
    const auto [ztn, ztw] = make_axis(5.0, 64);
    // early time slabs keep u as narrow as the source, so the physical grid
    // must resolve width-0.7 bumps over the whole box
    const auto [pxn, pxw] = make_axis(6.0, 24);
    const auto [pyn, pyw] = make_axis(6.5, 26);
    const auto [pzn, pzw] = make_axis(7.0, 28);
    const int ntt = 8;
    const auto& [tx, tw] = gauss_legendre(ntt);
    const DuhamelEvaluator U_of(sol);

    const std::size_t nxi = xin.size(), net = etn.size(), nzt = ztn.size();
    const std::size_t npx = pxn.size(), npy = pyn.size(), npz = pzn.size();
    std::vector<Complex> ucache(nxi * net * nzt);
    std::vector<Complex> c1(nxi * net * npz), c2(nxi * npy * npz);

    double norm2 = 0.0;
    FrequencyPoint w = FrequencyPoint::zero(1);
    for (int k = 0; k < ntt; ++k) {
        const double t = -0.5 + 0.5 * tx[k];
        for (std::size_t i = 0; i < nxi; ++i)
            for (std::size_t j = 0; j < net; ++j)
                for (std::size_t l = 0; l < nzt; ++l) {
                    w.xi[0] = xin[i];
                    w.eta[0] = etn[j];
                    w.zeta[0] = ztn[l];
                    ucache[(i * net + j) * nzt + l] = U_of(t, w, 1e-13);
                }
        // separable inverse transform: contract zeta, then eta, then xi
        for (std::size_t i = 0; i < nxi; ++i)
            for (std::size_t j = 0; j < net; ++j)
                for (std::size_t c = 0; c < npz; ++c) {
                    Complex acc = 0.0;
                    for (std::size_t l = 0; l < nzt; ++l)
                        acc += ztw[l] * ucache[(i * net + j) * nzt + l] *
                               std::exp(Complex(0.0, pzn[c] * ztn[l]));
                    c1[(i * net + j) * npz + c] = acc;
                }
        for (std::size_t i = 0; i < nxi; ++i)
            for (std::size_t b = 0; b < npy; ++b)
                for (std::size_t c = 0; c < npz; ++c) {
                    Complex acc = 0.0;
                    for (std::size_t j = 0; j < net; ++j)
                        acc += etw[j] * c1[(i * net + j) * npz + c] *
                               std::exp(Complex(0.0, pyn[b] * etn[j]));
                    c2[(i * npy + b) * npz + c] = acc;
                }
        double slab = 0.0;
        for (std::size_t a = 0; a < npx; ++a)
            for (std::size_t b = 0; b < npy; ++b)
                for (std::size_t c = 0; c < npz; ++c) {
                    Complex u = 0.0;
                    for (std::size_t i = 0; i < nxi; ++i)
                        u += xiw[i] * c2[(i * npy + b) * npz + c] *
                             std::exp(Complex(0.0, pxn[a] * xin[i]));
                    u *= std::pow(2.0 * std::numbers::pi, -3.0);
                    slab += pxw[a] * pyw[b] * pzw[c] * std::norm(u);
                }
        norm2 += 0.5 * tw[k] * slab;
    }
    const double physical = std::sqrt(norm2);
    CHECK(v.lambda_u == doctest::Approx(physical).epsilon(1e-4));
}

TEST_CASE("constant_search bookkeeping") {
    TrialFamilySpec fam;
    fam.hermite_max = 1;
    const CoefficientPath a = unit_path();
    QuadratureSpec q;
    q.nodes_xi = 14;
    q.nodes_eta = 12;
    q.nodes_zeta = 10;
    q.nodes_time = 5;
    q.rel_tol = 1e-7;
    const std::vector<double> lg = {0.0, 1.0};

    const EstimateReport r1 = constant_search(fam, a, lg, 1, 404, q);
    CHECK(r1.trials.size() == lg.size());
    CHECK(r1.max_ratio > 0.0);
    double expect = 0.0;
    for (const TrialResult& tr : r1.trials) {
        CHECK(tr.sem.finite());
        CHECK(std::isfinite(tr.ratio));
        expect = std::max(expect, tr.ratio);
    }
    CHECK(r1.max_ratio == expect);

    // prefix property: a larger budget replays the shorter run verbatim and
    // the running maximum never decreases
    const EstimateReport r6 = constant_search(fam, a, lg, 6, 404, q);
    const EstimateReport r12 = constant_search(fam, a, lg, 12, 404, q);
    for (std::size_t i = 0; i < r6.trials.size(); ++i) {
        CHECK(r6.trials[i].ratio == r12.trials[i].ratio);
        CHECK(r6.trials[i].params == r12.trials[i].params);
    }
    CHECK(r12.max_ratio >= r6.max_ratio);

    // worker count cannot change the report
    const EstimateReport r6j = constant_search(fam, a, lg, 6, 404, q, 4);
    for (std::size_t i = 0; i < r6.trials.size(); ++i)
        CHECK(r6.trials[i].ratio == r6j.trials[i].ratio);
}
