#include "kfp/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "kfp/parallel.hpp"
#include "kfp/rng.hpp"

namespace kfp {

double SeminormVector::lhs_sum() const {
    return lambda_u + sqrtlambda_grad_x + grad_x2 + frac_y13 + frac_z15 + mixed_xy16 + transport;
}

bool SeminormVector::finite() const {
    for (double v : {lambda_u, sqrtlambda_grad_x, grad_x2, frac_y13, frac_z15, mixed_xy16,
                     transport, rhs})
        if (!std::isfinite(v) || v < 0.0) return false;
    return true;
}

namespace {

constexpr double kTimeHorizon = 0.0;  // norms run over (-inf, 0) x R^{3d}

// Axis grid for a source box [core_lo, core_hi] flanked by transport-drift
// wings. The bump of the integrand lives in the core; the wings carry the
// transported tail of |U|^2 and get a fixed share of nodes. For axes whose
// norm weights carry a fractional |v|^alpha factor (power > 1), a thin
// segment around v = 0 takes the power substitution that absorbs the kink;
// everywhere else plain Gauss-Legendre resolves the analytic bump. Every cut
// is linear in the inputs, so linearly rescaled problems integrate on
// linearly rescaled nodes with identical node counts.
AxisGrid norm_axis(double core_lo, double core_hi, double wing, int n, int power) {
    const double width = core_hi - core_lo;
    struct Seg {
        double a, b;
        bool kink;
    };
    std::vector<Seg> segs;
    const double lo = core_lo - wing, hi = core_hi + wing;
    const bool wings = wing > 0.05 * width;
    // thin enough that the smooth part of the integrand is locally constant
    // there; the substitution then integrates the |v|^alpha factor exactly
    double kink = 0.0;
    if (power > 1 && lo < 0.0 && hi > 0.0)
        kink = std::min({width / 200.0, 0.9 * (-lo), 0.9 * hi});
    // assemble: [lo, core_lo] | [core_lo, -k] | [-k, k] | [k, core_hi] | [core_hi, hi]
    std::vector<double> cuts{lo};
    auto push = [&](double c) {
        if (c > cuts.back() + 1e-13 * width && c < hi - 1e-13 * width) cuts.push_back(c);
    };
    if (wings) push(core_lo);
    if (kink > 0.0) {
        push(-kink);
        push(kink);
    }
    if (wings) push(core_hi);
    cuts.push_back(hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        segs.push_back({cuts[i], cuts[i + 1], kink > 0.0 && cuts[i] <= -0.5 * kink &&
                                                  cuts[i + 1] >= 0.5 * kink});

    // node allocation: kink segment a small fixed share, wings a fixed share,
    // the rest split over the core proportionally to length
    std::vector<int> alloc(segs.size(), 0);
    int used = 0;
    double core_len = 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const bool is_wing = wings && (i == 0 || i + 1 == segs.size());
        if (segs[i].kink) {
            alloc[i] = std::max(4, n / 6);
            used += alloc[i];
        } else if (is_wing) {
            alloc[i] = std::max(3, n / 5);
            used += alloc[i];
        } else {
            core_len += segs[i].b - segs[i].a;
        }
    }
    const int rest = std::max(n - used, 4);
    int assigned = 0;
    int last_core = -1;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const bool is_wing = wings && (i == 0 || i + 1 == segs.size());
        if (segs[i].kink || is_wing) continue;
        alloc[i] = std::max(3, static_cast<int>(rest * (segs[i].b - segs[i].a) / core_len));
        assigned += alloc[i];
        last_core = static_cast<int>(i);
    }
    if (last_core >= 0 && assigned < rest) alloc[last_core] += rest - assigned;

    AxisGrid g;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const AxisGrid part = segs[i].kink ? axis_grid_power(segs[i].a, segs[i].b, alloc[i], power)
                                           : axis_grid_plain(segs[i].a, segs[i].b, alloc[i]);
        g.node.insert(g.node.end(), part.node.begin(), part.node.end());
        g.weight.insert(g.weight.end(), part.weight.begin(), part.weight.end());
    }
    return g;
}

std::pair<std::vector<double>, std::vector<double>> time_nodes(const SpectralSolution& sol,
                                                               int nodes_per_cell) {
    std::vector<double> tn, tw;
    const double lo = sol.source.time_support_lo();
    if (lo >= kTimeHorizon) return {tn, tw};
    std::set<double> cuts{lo, kTimeHorizon};
    for (double b : sol.source.time_breakpoints())
        if (b > lo && b < kTimeHorizon) cuts.insert(b);
    for (double b : sol.coefficients.breakpoints())
        if (b > lo && b < kTimeHorizon) cuts.insert(b);
    std::vector<double> cv(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cv.size(); ++c) {
        const AxisGrid tg = axis_grid_plain(cv[c], cv[c + 1], nodes_per_cell);
        tn.insert(tn.end(), tg.node.begin(), tg.node.end());
        tw.insert(tw.end(), tg.weight.begin(), tg.weight.end());
    }
    return {tn, tw};
}

double vec_norm(const Vec& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

}  // namespace

SeminormVector seminorms(const SpectralSolution& sol, const QuadratureSpec& quad) {
    quad.validate();
    const int d = sol.source.dim();
    const FrequencyBounds src = sol.source.frequency_bounds(quad.tail_eps);
    const auto [tnode, tweight] = time_nodes(sol, quad.nodes_time);
    SeminormVector out;
    if (tnode.empty()) return out;  // source starts at or after the horizon

    const DuhamelEvaluator U_of(sol);
    const double tspan = kTimeHorizon - sol.source.time_support_lo();
    const std::size_t nt = tnode.size();
    std::vector<std::complex<double>> Fv(nt);

    // zeta grids are fixed; eta grids pick up the zeta drift; xi grids pick up
    // the (eta, zeta) drift. Each level is rebuilt per outer node.
    std::vector<AxisGrid> zeta_grids(d), eta_grids(d), xi_grids(d);
    for (int i = 0; i < d; ++i) {
        AxisInterval iv = src.zeta[i];
        if (quad.trunc_radius_zeta > 0) iv = {-quad.trunc_radius_zeta, quad.trunc_radius_zeta};
        zeta_grids[i] = norm_axis(iv.lo, iv.hi, 0.0, quad.nodes_zeta, 5);
    }

    FrequencyPoint w = FrequencyPoint::zero(d);
    std::vector<std::size_t> iz(d, 0), ie(d, 0), ix(d, 0);
    double S_u = 0, S_x2 = 0, S_x4 = 0, S_y = 0, S_z = 0, S_mix = 0, S_tr = 0, S_rhs = 0;

    for (;;) {  // zeta odometer
        double zw = 1.0;
        for (int i = 0; i < d; ++i) {
            w.zeta[i] = zeta_grids[i].node[iz[i]];
            zw *= zeta_grids[i].weight[iz[i]];
        }
        const double zeta45 = std::pow(vec_norm(w.zeta), 4.0 / 5.0);
        for (int i = 0; i < d; ++i) {
            AxisInterval iv = src.eta[i];
            if (quad.trunc_radius_eta > 0) iv = {-quad.trunc_radius_eta, quad.trunc_radius_eta};
            eta_grids[i] =
                norm_axis(iv.lo, iv.hi, tspan * std::abs(w.zeta[i]), quad.nodes_eta, 3);
            ie[i] = 0;
        }

        for (;;) {  // eta odometer
            double ew = zw;
            for (int i = 0; i < d; ++i) {
                w.eta[i] = eta_grids[i].node[ie[i]];
                ew *= eta_grids[i].weight[ie[i]];
            }
            const double eta23 = std::pow(vec_norm(w.eta), 2.0 / 3.0);
            for (int i = 0; i < d; ++i) {
                AxisInterval iv = src.xi[i];
                if (quad.trunc_radius_xi > 0) iv = {-quad.trunc_radius_xi, quad.trunc_radius_xi};
                const double drift =
                    tspan * std::abs(w.eta[i]) + 0.5 * tspan * tspan * std::abs(w.zeta[i]);
                xi_grids[i] = norm_axis(iv.lo, iv.hi, drift, quad.nodes_xi, 1);
                ix[i] = 0;
            }

            for (;;) {  // xi odometer
                double fw = ew;
                for (int i = 0; i < d; ++i) {
                    w.xi[i] = xi_grids[i].node[ix[i]];
                    fw *= xi_grids[i].weight[ix[i]];
                }
                const double nxi = vec_norm(w.xi);
                const double xi2 = nxi * nxi;

                // |U(t,.)| <= Fmax * tspan along this frequency line, which
                // caps how precisely the Duhamel integrals are worth resolving
                double fmax = 0.0;
                for (std::size_t k = 0; k < nt; ++k) {
                    Fv[k] = sol.source.f_hat(tnode[k], w);
                    fmax = std::max(fmax, std::abs(Fv[k]));
                }
                const double abs_tol = quad.rel_tol * fmax * std::max(tspan, 1e-3);

                for (std::size_t k = 0; k < nt; ++k) {
                    const double t = tnode[k];
                    const std::complex<double> U = U_of(t, w, abs_tol);
                    const std::complex<double> F = Fv[k];
                    const double u2 = std::norm(U);
                    const double qf = sol.coefficients.at(t).quad_form(w.xi);
                    const std::complex<double> tr = F - (qf + sol.lambda) * U;
                    const double q = fw * tweight[k];
                    S_u += q * u2;
                    S_x2 += q * xi2 * u2;
                    S_x4 += q * xi2 * xi2 * u2;
                    S_y += q * eta23 * eta23 * u2;
                    S_z += q * zeta45 * u2;
                    S_mix += q * xi2 * eta23 * u2;
                    S_tr += q * std::norm(tr);
                    S_rhs += q * std::norm(F);
                }
                int i = 0;
                while (i < d && ++ix[i] == xi_grids[i].node.size()) ix[i++] = 0;
                if (i == d) break;
            }
            int i = 0;
            while (i < d && ++ie[i] == eta_grids[i].node.size()) ie[i++] = 0;
            if (i == d) break;
        }
        int a = 0;
        while (a < d && ++iz[a] == zeta_grids[a].node.size()) iz[a++] = 0;
        if (a == d) break;
    }

    const double scale = std::pow(2.0 * std::numbers::pi, -1.5 * d);
    auto root = [&](double s) { return scale * std::sqrt(std::max(s, 0.0)); };
    out.lambda_u = sol.lambda * root(S_u);
    out.sqrtlambda_grad_x = std::sqrt(sol.lambda) * root(S_x2);
    out.grad_x2 = root(S_x4);
    out.frac_y13 = root(S_y);
    out.frac_z15 = root(S_z);
    out.mixed_xy16 = root(S_mix);
    out.transport = root(S_tr);
    out.rhs = root(S_rhs);
    return out;
}

double estimate_ratio(const SeminormVector& v) {
    if (!(v.rhs > 0.0)) throw UndefinedRatioError("estimate_ratio: rhs vanishes");
    return v.lhs_sum() / v.rhs;
}

SeminormVector seminorms_dilated(const TrialFunction& trial, const CoefficientPath& a,
                                 double lambda, double r, const QuadratureSpec& quad) {
    if (!(r > 0.0)) throw std::invalid_argument("seminorms_dilated: r must be positive");
    const TrialFunction scaled_trial = trial.dilated(r).with_amplitude_factor(r * r);
    const CoefficientPath scaled_a = a.time_rescaled(r * r);
    return seminorms(SpectralSolution(scaled_a, r * r * lambda, scaled_trial, quad), quad);
}

double seminorm_scale_deviation(const SeminormVector& base, const SeminormVector& scaled,
                                double factor) {
    const double eb[8] = {base.lambda_u, base.sqrtlambda_grad_x, base.grad_x2,  base.frac_y13,
                          base.frac_z15, base.mixed_xy16,        base.transport, base.rhs};
    const double es[8] = {scaled.lambda_u, scaled.sqrtlambda_grad_x, scaled.grad_x2,
                          scaled.frac_y13, scaled.frac_z15,          scaled.mixed_xy16,
                          scaled.transport, scaled.rhs};
    double dev = 0.0;
    for (int i = 0; i < 8; ++i) {
        if (eb[i] == 0.0 && es[i] == 0.0) continue;  // lambda = 0 entries vanish on both sides
        const double expect = factor * eb[i];
        dev = std::max(dev, std::abs(es[i] - expect) / std::max(std::abs(expect), 1e-300));
    }
    return dev;
}

ScaleCheckResult scale_invariance_check(const TrialFunction& trial, const CoefficientPath& a,
                                        double lambda, double r, const QuadratureSpec& quad) {
    if (!(r > 0.0)) throw std::invalid_argument("scale_invariance_check: r must be positive");
    const int d = trial.dim();

    ScaleCheckResult res;
    res.base = seminorms(SpectralSolution(a, lambda, trial, quad), quad);
    res.scaled = seminorms_dilated(trial, a, lambda, r, quad);
    res.expected_factor = r * r * std::pow(r, -0.5 * (2.0 + 9.0 * d));
    res.max_entry_deviation = seminorm_scale_deviation(res.base, res.scaled, res.expected_factor);
    const double r0 = estimate_ratio(res.base);
    const double r1 = estimate_ratio(res.scaled);
    res.ratio_deviation = std::abs(r1 - r0) / std::max(std::abs(r0), 1e-300);
    return res;
}

void TrialFamilySpec::validate() const {
    if (dimension < 1) throw std::invalid_argument("TrialFamilySpec: dimension must be >= 1");
    if (packets < 1) throw std::invalid_argument("TrialFamilySpec: packets must be >= 1");
    if (!(support_start_min < support_start_max && support_start_max < 0.0))
        throw std::invalid_argument("TrialFamilySpec: support start range must precede the horizon");
    if (!(min_duration > 0.0) || !(width_min > 0.0) || !(width_min <= width_max))
        throw std::invalid_argument("TrialFamilySpec: invalid duration/width ranges");
    if (hermite_max < 0 || hermite_max > 4)
        throw std::invalid_argument("TrialFamilySpec: hermite_max must lie in [0,4]");
    if (bump_orders.empty())
        throw std::invalid_argument("TrialFamilySpec: bump_orders must be nonempty");
}

namespace {

struct SampledTrial {
    std::vector<double> params;
    std::vector<int> shapes;
};

// layout: per packet [s0, s1, then per axis group x,y,z and coordinate:
// center, width, modulation]
SampledTrial sample_family(const TrialFamilySpec& fam, Rng& rng) {
    SampledTrial s;
    for (int p = 0; p < fam.packets; ++p) {
        const double s0 = rng.uniform(fam.support_start_min, fam.support_start_max);
        const double s1 = rng.uniform(s0 + fam.min_duration, 0.0);
        s.params.push_back(s0);
        s.params.push_back(s1);
        s.shapes.push_back(fam.bump_orders[rng.uniform_int(0, static_cast<int>(fam.bump_orders.size()) - 1)]);
        for (int axis = 0; axis < 3 * fam.dimension; ++axis) {
            s.params.push_back(rng.uniform(fam.center_min, fam.center_max));
            s.params.push_back(rng.uniform(fam.width_min, fam.width_max));
            s.params.push_back(rng.uniform(fam.modulation_min, fam.modulation_max));
            s.shapes.push_back(rng.uniform_int(0, fam.hermite_max));
        }
    }
    return s;
}

SampledTrial perturb(const TrialFamilySpec& fam, const SampledTrial& best, int coord, Rng& rng) {
    SampledTrial s = best;
    const int nc = static_cast<int>(s.params.size());
    const int j = coord % nc;
    const double sign = rng.coin() ? 1.0 : -1.0;
    const double step = 0.12 * rng.uniform01() + 0.02;
    s.params[j] += sign * step * (std::abs(s.params[j]) + 0.25);
    // re-clamp into the family box
    const int per_packet = 2 + 9 * fam.dimension;
    for (int p = 0; p < fam.packets; ++p) {
        double& s0 = s.params[p * per_packet];
        double& s1 = s.params[p * per_packet + 1];
        s0 = std::clamp(s0, fam.support_start_min, fam.support_start_max);
        s1 = std::clamp(s1, s0 + fam.min_duration, 0.0);
        if (!(s1 > s0)) s1 = 0.5 * s0;
        for (int axis = 0; axis < 3 * fam.dimension; ++axis) {
            double& c = s.params[p * per_packet + 2 + 3 * axis];
            double& wdt = s.params[p * per_packet + 3 + 3 * axis];
            double& m = s.params[p * per_packet + 4 + 3 * axis];
            c = std::clamp(c, fam.center_min, fam.center_max);
            wdt = std::clamp(wdt, fam.width_min, fam.width_max);
            m = std::clamp(m, fam.modulation_min, fam.modulation_max);
        }
    }
    return s;
}

TrialFunction realize(const TrialFamilySpec& fam, const SampledTrial& s) {
    std::vector<Packet> packets;
    const int per_packet = 2 + 9 * fam.dimension;
    for (int p = 0; p < fam.packets; ++p) {
        Packet pk;
        const double* q = s.params.data() + p * per_packet;
        const int order = s.shapes[p * (1 + 3 * fam.dimension)];
        pk.time.s0 = q[0];
        pk.time.s1 = q[1];
        pk.time.shape = order > 0 ? TimeShape::smooth_bump : TimeShape::indicator;
        pk.time.order = std::max(order, 1);
        pk.space.x.resize(fam.dimension);
        pk.space.y.resize(fam.dimension);
        pk.space.z.resize(fam.dimension);
        for (int axis = 0; axis < 3 * fam.dimension; ++axis) {
            AxisFactor a;
            a.center = q[2 + 3 * axis];
            a.width = q[3 + 3 * axis];
            a.modulation = q[4 + 3 * axis];
            a.hermite = s.shapes[p * (1 + 3 * fam.dimension) + 1 + axis];
            if (axis < fam.dimension)
                pk.space.x[axis] = a;
            else if (axis < 2 * fam.dimension)
                pk.space.y[axis - fam.dimension] = a;
            else
                pk.space.z[axis - 2 * fam.dimension] = a;
        }
        packets.push_back(std::move(pk));
    }
    return TrialFunction(std::move(packets));
}

}  // namespace

TrialFunction realize_trial(const TrialFamilySpec& family, const std::vector<double>& params,
                            const std::vector<int>& shape_params) {
    SampledTrial s;
    s.params = params;
    s.shapes = shape_params;
    return realize(family, s);
}

EstimateReport constant_search(const TrialFamilySpec& family, const CoefficientPath& a,
                               const std::vector<double>& lambda_grid, int budget,
                               std::uint64_t seed, const QuadratureSpec& quad, int jobs) {
    family.validate();
    if (budget < 1) throw std::invalid_argument("constant_search: budget must be >= 1");
    if (lambda_grid.empty()) throw std::invalid_argument("constant_search: lambda grid is empty");

    EstimateReport report;
    report.experiment_id = "estimate-constant";
    report.seed = seed;
    report.dimension = family.dimension;
    report.delta = a.ellipticity();

    SampledTrial best;
    double best_ratio = -1.0;
    int refine_coord = 0;

    for (int i = 0; i < budget; ++i) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
        // every fifth slot refines the incumbent; the schedule depends only on
        // the index so longer runs replay shorter ones verbatim
        SampledTrial cand;
        if (i % 5 == 4 && best_ratio >= 0.0) {
            cand = perturb(family, best, refine_coord++, rng);
        } else {
            cand = sample_family(family, rng);
        }
        const TrialFunction trial = realize(family, cand);

        const int nl = static_cast<int>(lambda_grid.size());
        std::vector<TrialResult> rows(nl);
        parallel_for(nl, jobs, [&](int li) {
            TrialResult tr;
            tr.trial_index = i;
            tr.lambda = lambda_grid[li];
            tr.params = cand.params;
            tr.shape_params = cand.shapes;
            tr.sem = seminorms(SpectralSolution(a, lambda_grid[li], trial, quad), quad);
            tr.ratio = estimate_ratio(tr.sem);
            rows[li] = std::move(tr);
        });

        double trial_max = 0.0;
        for (TrialResult& tr : rows) {
            trial_max = std::max(trial_max, tr.ratio);
            report.trials.push_back(std::move(tr));
        }
        if (trial_max > best_ratio) {
            best_ratio = trial_max;
            best = cand;
        }
    }
    report.max_ratio = best_ratio;
    return report;
}

}  // namespace kfp
