#pragma once

#include <complex>
#include <functional>

#include "kfp/quadrature.hpp"
#include "kfp/symbols.hpp"
#include "kfp/trial.hpp"

namespace kfp {

// The Fourier-side solution U(t, xi, eta, zeta) of
//   dU/dt + a(t) xi.xi U + eta.grad_xi U + zeta.grad_eta U + lambda U = F,
// evaluated lazily through the explicit characteristics representation
//   U(t,.) = int_{-inf}^{t} e^{-lambda (t-t')} e^{-D(t',t)} F(t', transported w) dt'.
// Nothing is gridded: U is a pure function of (t, w).
struct SpectralSolution {
    CoefficientPath coefficients;
    double lambda = 0.0;
    TrialFunction source;
    QuadratureSpec time_quadrature;

    SpectralSolution(CoefficientPath a, double lambda_, TrialFunction f, QuadratureSpec q);
};

std::complex<double> solve_hat(const SpectralSolution& sol, double t, const FrequencyPoint& w);

// Reusable evaluation context for U: pre-merged breakpoints and, at d = 1,
// flattened scalar packet/coefficient data. One instance serves any number of
// (t, w) queries, which is what the norm quadrature needs. abs_tol (when
// positive) relaxes the time integration where U is negligible on the
// caller's scale.
class DuhamelEvaluator {
public:
    explicit DuhamelEvaluator(const SpectralSolution& sol);

    std::complex<double> operator()(double t, const FrequencyPoint& w, double abs_tol = 0.0) const;

private:
    std::complex<double> eval_scalar(double t, double xi, double eta, double zeta,
                                     double abs_tol) const;

    const SpectralSolution* sol_;
    std::vector<double> cuts_;  // merged source/coefficient breakpoints, ascending
    double support_lo_ = 0.0, support_hi_ = 0.0;
    bool scalar_ = false;

    struct FlatPacket {
        double s0, s1, amplitude;
        int order;
        bool bump;
        AxisFactor ax, ay, az;
        Complex coeff;
    };
    std::vector<FlatPacket> packets1_;
    std::vector<double> coeff_cuts_;  // interior coefficient breakpoints
    std::vector<double> coeff_vals_;  // piece values, one more than interior cuts
};

struct ResidualSteps {
    double t = 1e-3;
    double xi = 1e-3;
    double eta = 1e-3;
};

// Central finite differences of the transformed equation at (t, w); returns
// |residual| relative to max(|F|, |U|, floor). The caller keeps t away from
// coefficient and profile breakpoints so the derivatives exist classically.
double residual_check(const SpectralSolution& sol, double t, const FrequencyPoint& w,
                      const ResidualSteps& h);

using InitialHat = std::function<std::complex<double>(const FrequencyPoint&)>;

// Source-free propagation from Fourier data at time t0:
//   exp(-D(t0,t)) initial_hat(transported w).
std::complex<double> homogeneous_hat(const CoefficientPath& a, const InitialHat& initial_hat,
                                     double t0, double t, const FrequencyPoint& w);

}  // namespace kfp
