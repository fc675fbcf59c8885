#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kfp/norms.hpp"
#include "kfp/quadrature.hpp"
#include "kfp/symbols.hpp"

namespace kfp {

// Malformed configuration (unknown key, bad value, missing file). The CLI maps
// this onto exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Everything a suite run needs, with defaults that reproduce the standard
// experiment set. The config file is a plain sectioned key=value text file;
// see the README for the grammar.
struct ExperimentConfig {
    // [run]
    int dimension = 1;
    double delta = 0.5;
    std::uint64_t seed = 7041;
    int jobs = 1;
    double tolerance = 1e-10;
    std::string out_dir = "out";

    // [coefficients]
    std::vector<double> coeff_breakpoints = {-4.0, -2.0, -1.0, 0.0};
    std::vector<std::vector<double>> coeff_pieces = {{0.5}, {1.0}, {2.0}};  // row-major d*d

    // [quadrature]
    QuadratureSpec quad;

    // [geometry]
    int geometry_samples = 1000;
    int oscillation_pairs = 4096;

    // [estimate]
    int budget = 100;
    std::vector<double> lambda_grid = {0.0, 0.1, 1.0, 10.0};
    std::vector<double> scale_factors = {0.5, 2.0, 4.0};
    bool scale_checks = false;  // per-trial scale checks (slow; the acceptance suite turns them on)
    TrialFamilySpec family;

    // [packet.N] blocks: an explicit source for the solve suite (defaults to
    // the unit Gaussian on (-1,0) when absent)
    std::vector<Packet> trial_packets;

    // [poincare]
    int poincare_random_members = 200;
    int poincare_max_degree = 10;

    // [multiplier]
    double multiplier_log10_lo = -6.0;
    double multiplier_log10_hi = 6.0;
    int multiplier_xi_steps = 97;   // log-spaced grid sizes
    int multiplier_eta_steps = 33;
    double homogeneity_exponent = 3.0;

    // [maximal-sharp]
    int grid_resolution = 16;  // refined run doubles this
    double hl_c = 2.0;
    int lattice_points = 6;
    std::vector<double> frac_s = {0.2, 0.3};
    std::vector<double> p_grid = {1.5, 2.0, 3.0};

    std::string config_hash;  // hash of the raw config text (or "defaults")

    static ExperimentConfig defaults();
    static ExperimentConfig from_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);

    CoefficientPath coefficient_path() const;
    TrialFunction explicit_trial() const;  // from packet blocks, or the default
    void validate() const;
};

}  // namespace kfp
