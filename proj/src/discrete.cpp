#include "kfp/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace kfp {

GridFunction::GridFunction(GridBox box, std::array<int, 4> resolution)
    : box_(box), n_(resolution) {
    std::size_t total = 1;
    for (int a = 0; a < 4; ++a) {
        if (n_[a] < 1) throw std::invalid_argument("GridFunction: resolution must be positive");
        if (!(box_.hi[a] > box_.lo[a]))
            throw std::invalid_argument("GridFunction: box must have positive extent");
        total *= static_cast<std::size_t>(n_[a]);
    }
    v_.assign(total, 0.0);
}

GridFunction GridFunction::sample(GridBox box, std::array<int, 4> resolution,
                                  const std::function<double(double, double, double, double)>& f) {
    GridFunction g(box, resolution);
    std::size_t pos = 0;
    for (int it = 0; it < resolution[0]; ++it)
        for (int ix = 0; ix < resolution[1]; ++ix)
            for (int iy = 0; iy < resolution[2]; ++iy)
                for (int iz = 0; iz < resolution[3]; ++iz)
                    g.v_[pos++] = f(g.center(0, it), g.center(1, ix), g.center(2, iy),
                                    g.center(3, iz));
    return g;
}

double GridFunction::cell_volume() const {
    return spacing(0) * spacing(1) * spacing(2) * spacing(3);
}

double& GridFunction::at(int it, int ix, int iy, int iz) {
    return v_[((static_cast<std::size_t>(it) * n_[1] + ix) * n_[2] + iy) * n_[3] + iz];
}

double GridFunction::at(int it, int ix, int iy, int iz) const {
    return v_[((static_cast<std::size_t>(it) * n_[1] + ix) * n_[2] + iy) * n_[3] + iz];
}

void GridFunction::save(const std::string& path_prefix) const {
    nlohmann::json h;
    h["box"] = {{"lo", box_.lo}, {"hi", box_.hi}};
    h["resolution"] = n_;
    h["axis_order"] = {"t", "x", "y", "z"};
    h["layout"] = "row-major";
    h["byte_order"] = "little-endian";
    h["dtype"] = "float64";
    h["data_file"] = path_prefix + ".bin";
    std::ofstream hj(path_prefix + ".json");
    if (!hj) throw std::runtime_error("GridFunction::save: cannot open header for writing");
    hj << h.dump(2) << "\n";
    std::ofstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("GridFunction::save: cannot open payload for writing");
    bin.write(reinterpret_cast<const char*>(v_.data()),
              static_cast<std::streamsize>(v_.size() * sizeof(double)));
}

GridFunction GridFunction::load(const std::string& path_prefix) {
    std::ifstream hj(path_prefix + ".json");
    if (!hj) throw std::runtime_error("GridFunction::load: missing header");
    nlohmann::json h = nlohmann::json::parse(hj);
    GridBox box;
    box.lo = h.at("box").at("lo").get<std::array<double, 4>>();
    box.hi = h.at("box").at("hi").get<std::array<double, 4>>();
    GridFunction g(box, h.at("resolution").get<std::array<int, 4>>());
    std::ifstream bin(h.at("data_file").get<std::string>(), std::ios::binary);
    if (!bin) throw std::runtime_error("GridFunction::load: missing payload");
    bin.read(reinterpret_cast<char*>(g.v_.data()),
             static_cast<std::streamsize>(g.v_.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("GridFunction::load: payload truncated");
    return g;
}

namespace {

// Cells overlapping the open interval (a, b) on one axis, with the exact
// overlap length per cell. The cylinder's time slice is a plain box in
// (x, y, z), so cell-against-cylinder measures factor into these overlaps;
// summing f against them is the exact integral of the piecewise-constant
// sampled function and stays bounded however small the window is.
struct AxisOverlap {
    int lo = 0, hi = 0;  // cell index range [lo, hi)
    std::vector<double> w;

    bool empty() const { return hi <= lo; }
};

AxisOverlap axis_overlap(double a, double b, double axis_lo, double dx, int n) {
    AxisOverlap r;
    if (!(b > a)) return r;
    r.lo = std::max(0, static_cast<int>(std::floor((a - axis_lo) / dx)));
    r.hi = std::min(n, static_cast<int>(std::ceil((b - axis_lo) / dx)));
    if (r.hi <= r.lo) {
        r.hi = r.lo;
        return r;
    }
    r.w.resize(r.hi - r.lo);
    for (int i = r.lo; i < r.hi; ++i) {
        const double cell_lo = axis_lo + i * dx;
        const double cell_hi = cell_lo + dx;
        r.w[i - r.lo] = std::max(0.0, std::min(b, cell_hi) - std::max(a, cell_lo));
    }
    return r;
}

struct CylinderSlices {
    AxisOverlap tr;
    std::vector<AxisOverlap> rx, ry, rz;  // per slice, indexed from tr.lo
};

CylinderSlices cylinder_slices(const GridFunction& f, const std::array<double, 4>& X0, double r,
                               double R) {
    const GridBox& b = f.box();
    const auto& n = f.resolution();
    CylinderSlices cs;
    cs.tr = axis_overlap(X0[0] - r * r, X0[0], b.lo[0], f.spacing(0), n[0]);
    if (cs.tr.empty()) return cs;
    const double r3 = r * r * r, R5 = std::pow(R, 5);
    for (int it = cs.tr.lo; it < cs.tr.hi; ++it) {
        const double dt = f.center(0, it) - X0[0];
        const double yc = X0[2] - dt * X0[1];
        const double zc = X0[3] - dt * X0[2] + 0.5 * dt * dt * X0[1];
        cs.rx.push_back(axis_overlap(X0[1] - r, X0[1] + r, b.lo[1], f.spacing(1), n[1]));
        cs.ry.push_back(axis_overlap(yc - r3, yc + r3, b.lo[2], f.spacing(2), n[2]));
        cs.rz.push_back(axis_overlap(zc - R5, zc + R5, b.lo[3], f.spacing(3), n[3]));
    }
    return cs;
}

double cyl_volume_1d(double r, double R) {
    return r * r * (2.0 * r) * (2.0 * r * r * r) * (2.0 * std::pow(R, 5));
}

// integral of g(f) over the cylinder and the covered measure
template <class G>
std::pair<double, double> cylinder_sum(const GridFunction& f, const CylinderSlices& cs, G&& g) {
    double acc = 0.0, covered = 0.0;
    for (int it = cs.tr.lo; it < cs.tr.hi; ++it) {
        const int s = it - cs.tr.lo;
        const AxisOverlap& ox = cs.rx[s];
        const AxisOverlap& oy = cs.ry[s];
        const AxisOverlap& oz = cs.rz[s];
        if (ox.empty() || oy.empty() || oz.empty()) continue;
        const double wt = cs.tr.w[s];
        double slab = 0.0, slab_cov = 0.0;
        for (int ix = ox.lo; ix < ox.hi; ++ix)
            for (int iy = oy.lo; iy < oy.hi; ++iy) {
                const double wxy = ox.w[ix - ox.lo] * oy.w[iy - oy.lo];
                double line = 0.0, line_cov = 0.0;
                for (int iz = oz.lo; iz < oz.hi; ++iz) {
                    const double wz = oz.w[iz - oz.lo];
                    line += wz * g(f.at(it, ix, iy, iz));
                    line_cov += wz;
                }
                slab += wxy * line;
                slab_cov += wxy * line_cov;
            }
        acc += wt * slab;
        covered += wt * slab_cov;
    }
    return {acc, covered};
}

double maximal_value(const GridFunction& f, double c, const std::vector<double>& radii,
                     const std::array<double, 4>& X0) {
    double best = 0.0;
    for (double r : radii) {
        const CylinderSlices cs = cylinder_slices(f, X0, r, c * r);
        if (cs.tr.empty()) continue;
        const auto [sum, covered] = cylinder_sum(f, cs, [](double v) { return std::abs(v); });
        (void)covered;
        best = std::max(best, sum / cyl_volume_1d(r, c * r));
    }
    return best;
}

double sharp_value(const GridFunction& f, const std::vector<double>& radii,
                   const std::array<double, 4>& X0) {
    double best = 0.0;
    for (double r : radii) {
        const CylinderSlices cs = cylinder_slices(f, X0, r, r);
        if (cs.tr.empty()) continue;
        const double vol = cyl_volume_1d(r, r);
        const auto [sum, covered] = cylinder_sum(f, cs, [](double v) { return v; });
        const double mean = sum / vol;
        const auto [dev_in, cov2] =
            cylinder_sum(f, cs, [mean](double v) { return std::abs(v - mean); });
        (void)cov2;
        // the zero extension beyond the sampled box deviates from the mean too
        const double dev = dev_in + std::abs(mean) * std::max(0.0, vol - covered);
        best = std::max(best, dev / vol);
    }
    return best;
}

std::array<double, 4> lattice_point(const GridFunction& f, const CenterLattice& lat,
                                    const std::array<int, 4>& idx) {
    std::array<double, 4> X0{};
    for (int a = 0; a < 4; ++a) {
        const double step = (f.box().hi[a] - f.box().lo[a]) / lat.count[a];
        // past cylinders look backwards in time, so the t lattice starts one
        // step in; spatial axes start at the box edge
        X0[a] = f.box().lo[a] + (a == 0 ? (idx[a] + 1) : idx[a]) * step;
    }
    return X0;
}

GridFunction run_lattice(const GridFunction& f, const CenterLattice& lat,
                         const std::function<double(const std::array<double, 4>&)>& op) {
    GridFunction out(f.box(), lat.count);
    std::array<int, 4> idx{};
    for (idx[0] = 0; idx[0] < lat.count[0]; ++idx[0])
        for (idx[1] = 0; idx[1] < lat.count[1]; ++idx[1])
            for (idx[2] = 0; idx[2] < lat.count[2]; ++idx[2])
                for (idx[3] = 0; idx[3] < lat.count[3]; ++idx[3])
                    out.at(idx[0], idx[1], idx[2], idx[3]) = op(lattice_point(f, lat, idx));
    return out;
}

void validate_radii(const std::vector<double>& radii) {
    if (radii.empty()) throw std::invalid_argument("grid operators: radii set must be nonempty");
    for (double r : radii)
        if (!(r > 0.0)) throw std::invalid_argument("grid operators: radii must be positive");
}

}  // namespace

GridFunction maximal(const GridFunction& f, double c, const std::vector<double>& radii,
                     const CenterLattice& lattice) {
    if (!(c >= 1.0)) throw std::invalid_argument("maximal: c must be >= 1");
    validate_radii(radii);
    return run_lattice(f, lattice, [&](const std::array<double, 4>& X0) {
        return maximal_value(f, c, radii, X0);
    });
}

GridFunction sharp(const GridFunction& f, const std::vector<double>& radii,
                   const CenterLattice& lattice) {
    validate_radii(radii);
    return run_lattice(f, lattice, [&](const std::array<double, 4>& X0) {
        return sharp_value(f, radii, X0);
    });
}

double maximal_at(const GridFunction& f, double c, const std::vector<double>& radii,
                  const std::array<double, 4>& X0) {
    if (!(c >= 1.0)) throw std::invalid_argument("maximal_at: c must be >= 1");
    validate_radii(radii);
    return maximal_value(f, c, radii, X0);
}

double sharp_at(const GridFunction& f, const std::vector<double>& radii,
                const std::array<double, 4>& X0) {
    validate_radii(radii);
    return sharp_value(f, radii, X0);
}

double lp_norm(const GridFunction& f, double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("lp_norm: p must lie in (1, inf)");
    double acc = 0.0;
    for (double v : f.data()) acc += std::pow(std::abs(v), p);
    return std::pow(acc * f.cell_volume(), 1.0 / p);
}

HlFsReport empirical_hl_fs(const std::vector<std::pair<std::string, GridFunction>>& corpus,
                           const std::vector<double>& p_grid, double c,
                           const std::vector<double>& radii, const CenterLattice& lattice) {
    if (corpus.empty()) throw std::invalid_argument("empirical_hl_fs: corpus must be nonempty");
    HlFsReport rep;
    for (const auto& [name, f] : corpus) {
        const GridFunction mf = maximal(f, c, radii, lattice);
        const GridFunction fs = sharp(f, radii, lattice);
        for (double p : p_grid) {
            HlFsRow row;
            row.name = name;
            row.p = p;
            const double fn = lp_norm(f, p);
            if (fn > 0.0) {
                row.hl_ratio = lp_norm(mf, p) / fn;
                rep.max_hl = std::max(rep.max_hl, row.hl_ratio);
            }
            const double sn = lp_norm(fs, p);
            if (sn > 0.0) {
                row.fs_ratio = fn / sn;
                row.fs_valid = true;
                rep.max_fs = std::max(rep.max_fs, row.fs_ratio);
            }
            rep.rows.push_back(row);
        }
    }
    return rep;
}

double frac_laplacian_pointwise(const std::function<double(double)>& f, double s, double z0,
                                const QuadratureSpec& quad) {
    if (!(s > 0.0 && s < 0.5))
        throw std::invalid_argument("frac_laplacian_pointwise: s must lie in (0, 1/2)");
    const double fz0 = f(z0);
    // symmetric pairing removes the strong singularity:
    //   (2 f(z0) - f(z0+h) - f(z0-h)) / h^{1+2s} ~ h^{1-2s}
    const auto integrand = [&](double h) -> std::complex<double> {
        return (2.0 * fz0 - f(z0 + h) - f(z0 - h)) / std::pow(h, 1.0 + 2.0 * s);
    };
    const double cut = 64.0;
    std::vector<double> cells{0.0};
    for (double edge = 1e-7; edge < cut; edge *= 8.0) cells.push_back(edge);
    cells.push_back(cut);
    const double body =
        integrate_cells(integrand, cells, quad.rel_tol, quad.max_intervals).real();
    // beyond the cut the pair difference is frozen at its value there, which
    // is 2 f(z0) for decaying f and 0 for constants
    const double tail = (2.0 * fz0 - f(z0 + cut) - f(z0 - cut)) *
                        std::pow(cut, -2.0 * s) / (2.0 * s);
    const double c_s1 = std::pow(4.0, s) * s * std::tgamma(0.5 + s) /
                        (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - s));
    return c_s1 * (body + tail);
}

}  // namespace kfp
