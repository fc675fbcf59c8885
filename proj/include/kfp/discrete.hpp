#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "kfp/geometry.hpp"
#include "kfp/quadrature.hpp"

namespace kfp {

// Axis-aligned sample box in (t,x,y,z); the grid path runs at d = 1 so every
// axis is scalar.
struct GridBox {
    std::array<double, 4> lo{-1.0, -1.0, -1.0, -1.0};
    std::array<double, 4> hi{0.0, 1.0, 1.0, 1.0};
};

// Dense cell-centered samples on a GridBox, row-major with t outermost.
// Functions are extended by zero outside the box everywhere below.
class GridFunction {
public:
    GridFunction(GridBox box, std::array<int, 4> resolution);
    static GridFunction sample(GridBox box, std::array<int, 4> resolution,
                               const std::function<double(double, double, double, double)>& f);

    const GridBox& box() const { return box_; }
    const std::array<int, 4>& resolution() const { return n_; }
    double spacing(int axis) const { return (box_.hi[axis] - box_.lo[axis]) / n_[axis]; }
    double center(int axis, int idx) const {
        return box_.lo[axis] + (idx + 0.5) * spacing(axis);
    }
    double cell_volume() const;

    double& at(int it, int ix, int iy, int iz);
    double at(int it, int ix, int iy, int iz) const;
    const std::vector<double>& data() const { return v_; }
    std::vector<double>& data() { return v_; }

    // JSON header (box, resolution, axis order, layout, byte order) plus a
    // little-endian float64 .bin payload
    void save(const std::string& path_prefix) const;
    static GridFunction load(const std::string& path_prefix);

private:
    GridBox box_;
    std::array<int, 4> n_;
    std::vector<double> v_;
};

// Evaluation lattice for the grid operators: corner points of a coarsened
// sublattice, so that dyadic cylinders align exactly with cell boundaries.
struct CenterLattice {
    std::array<int, 4> count{8, 8, 8, 8};
};

// M_{c}f on the lattice: sup over the radii of the cylinder averages of |f|,
// dividing by the full cylinder volume (out-of-box cells contribute zero).
GridFunction maximal(const GridFunction& f, double c, const std::vector<double>& radii,
                     const CenterLattice& lattice);

// f#: sup over radii of the mean deviation from the cylinder average.
GridFunction sharp(const GridFunction& f, const std::vector<double>& radii,
                   const CenterLattice& lattice);

// single-point evaluations (the lattice versions loop over these)
double maximal_at(const GridFunction& f, double c, const std::vector<double>& radii,
                  const std::array<double, 4>& X0);
double sharp_at(const GridFunction& f, const std::vector<double>& radii,
                const std::array<double, 4>& X0);

double lp_norm(const GridFunction& f, double p);

struct HlFsRow {
    std::string name;
    double p = 2.0;
    double hl_ratio = 0.0;       // ||Mf||_p / ||f||_p
    double fs_ratio = 0.0;       // ||f||_p / ||f#||_p
    bool fs_valid = false;       // false when f# vanishes identically
};

struct HlFsReport {
    std::vector<HlFsRow> rows;
    double max_hl = 0.0;
    double max_fs = 0.0;
};

HlFsReport empirical_hl_fs(const std::vector<std::pair<std::string, GridFunction>>& corpus,
                           const std::vector<double>& p_grid, double c,
                           const std::vector<double>& radii, const CenterLattice& lattice);

// Pointwise singular-integral fractional Laplacian of a scalar function of z,
// normalized so the Fourier symbol is exactly |zeta|^{2s}; s in (0, 1/2).
double frac_laplacian_pointwise(const std::function<double(double)>& f, double s, double z0,
                                const QuadratureSpec& quad);

}  // namespace kfp
