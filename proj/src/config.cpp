#include "kfp/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "kfp/report.hpp"

namespace kfp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_num(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config: bad integer value for '" + key + "': " + v);
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (!cell.empty()) out.push_back(parse_num(key, cell));
    }
    if (out.empty()) throw ConfigError("config: empty list for '" + key + "'");
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (double x : parse_list(key, v)) out.push_back(static_cast<int>(x));
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean value for '" + key + "': " + v);
}

// one spatial axis given as "center, width, hermite, modulation"
AxisFactor parse_axis(const std::string& key, const std::string& v) {
    const std::vector<double> vals = parse_list(key, v);
    if (vals.size() != 4)
        throw ConfigError("config: '" + key + "' wants center, width, hermite, modulation");
    AxisFactor a;
    a.center = vals[0];
    a.width = vals[1];
    a.hermite = static_cast<int>(vals[2]);
    a.modulation = vals[3];
    return a;
}

// packet sections keep insertion order via their numeric suffix
bool parse_packet_key(ExperimentConfig& c, const std::string& section, const std::string& key,
                      const std::string& val) {
    if (section.rfind("packet.", 0) != 0) return false;
    std::size_t idx = 0;
    try {
        idx = static_cast<std::size_t>(std::stoul(section.substr(7)));
    } catch (...) {
        throw ConfigError("config: packet sections are [packet.N] with numeric N");
    }
    if (idx >= 64) throw ConfigError("config: too many packet blocks");
    if (c.trial_packets.size() <= idx) c.trial_packets.resize(idx + 1);
    Packet& p = c.trial_packets[idx];
    const std::string full = section + "." + key;
    if (key == "time_support") {
        const std::vector<double> s = parse_list(full, val);
        if (s.size() != 2) throw ConfigError("config: '" + full + "' wants s0, s1");
        p.time.s0 = s[0];
        p.time.s1 = s[1];
    } else if (key == "shape") {
        if (val == "indicator") p.time.shape = TimeShape::indicator;
        else if (val == "bump") p.time.shape = TimeShape::smooth_bump;
        else throw ConfigError("config: '" + full + "' must be indicator or bump");
    } else if (key == "order") {
        p.time.order = static_cast<int>(parse_int(full, val));
    } else if (key == "amplitude") {
        p.time.amplitude = parse_num(full, val);
    } else if (key == "coeff") {
        const std::vector<double> s = parse_list(full, val);
        if (s.size() > 2) throw ConfigError("config: '" + full + "' wants re [, im]");
        p.coeff = Complex(s[0], s.size() > 1 ? s[1] : 0.0);
    } else if (key == "x" || key == "y" || key == "z") {
        auto& axes = key == "x" ? p.space.x : (key == "y" ? p.space.y : p.space.z);
        axes.assign(1, parse_axis(full, val));
    } else {
        throw ConfigError("config: unknown key '" + full + "'");
    }
    return true;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    c.config_hash = hash_hex("defaults");
    return c;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig c;
    c.config_hash = hash_hex(text);
    std::stringstream in(text);
    std::string line, section = "run";
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: unterminated section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string full = section + "." + key;

        if (parse_packet_key(c, section, key, val)) continue;
        if (full == "run.dimension") c.dimension = static_cast<int>(parse_int(full, val));
        else if (full == "run.delta") c.delta = parse_num(full, val);
        else if (full == "run.seed") c.seed = static_cast<std::uint64_t>(parse_int(full, val));
        else if (full == "run.jobs") c.jobs = static_cast<int>(parse_int(full, val));
        else if (full == "run.tolerance") c.tolerance = parse_num(full, val);
        else if (full == "run.out") c.out_dir = val;
        else if (full == "coefficients.breakpoints") c.coeff_breakpoints = parse_list(full, val);
        else if (full == "coefficients.pieces") {
            // pieces separated by ';', matrix entries row-major separated by ','
            c.coeff_pieces.clear();
            std::stringstream ps(val);
            std::string piece;
            while (std::getline(ps, piece, ';')) {
                piece = trim(piece);
                if (!piece.empty()) c.coeff_pieces.push_back(parse_list(full, piece));
            }
            if (c.coeff_pieces.empty()) throw ConfigError("config: no coefficient pieces given");
        } else if (full == "quadrature.nodes_xi") c.quad.nodes_xi = static_cast<int>(parse_int(full, val));
        else if (full == "quadrature.nodes_eta") c.quad.nodes_eta = static_cast<int>(parse_int(full, val));
        else if (full == "quadrature.nodes_zeta") c.quad.nodes_zeta = static_cast<int>(parse_int(full, val));
        else if (full == "quadrature.nodes_time") c.quad.nodes_time = static_cast<int>(parse_int(full, val));
        else if (full == "quadrature.rel_tol") c.quad.rel_tol = parse_num(full, val);
        else if (full == "quadrature.max_intervals") c.quad.max_intervals = static_cast<int>(parse_int(full, val));
        else if (full == "quadrature.tail_eps") c.quad.tail_eps = parse_num(full, val);
        else if (full == "quadrature.trunc_radius_xi") c.quad.trunc_radius_xi = parse_num(full, val);
        else if (full == "quadrature.trunc_radius_eta") c.quad.trunc_radius_eta = parse_num(full, val);
        else if (full == "quadrature.trunc_radius_zeta") c.quad.trunc_radius_zeta = parse_num(full, val);
        else if (full == "geometry.samples") c.geometry_samples = static_cast<int>(parse_int(full, val));
        else if (full == "geometry.oscillation_pairs") c.oscillation_pairs = static_cast<int>(parse_int(full, val));
        else if (full == "estimate.budget") c.budget = static_cast<int>(parse_int(full, val));
        else if (full == "estimate.lambda_grid") c.lambda_grid = parse_list(full, val);
        else if (full == "estimate.scale_factors") c.scale_factors = parse_list(full, val);
        else if (full == "estimate.scale_checks") c.scale_checks = parse_bool(full, val);
        else if (full == "estimate.packets") c.family.packets = static_cast<int>(parse_int(full, val));
        else if (full == "estimate.hermite_max") c.family.hermite_max = static_cast<int>(parse_int(full, val));
        else if (full == "estimate.width_min") c.family.width_min = parse_num(full, val);
        else if (full == "estimate.width_max") c.family.width_max = parse_num(full, val);
        else if (full == "estimate.center_min") c.family.center_min = parse_num(full, val);
        else if (full == "estimate.center_max") c.family.center_max = parse_num(full, val);
        else if (full == "estimate.modulation_min") c.family.modulation_min = parse_num(full, val);
        else if (full == "estimate.modulation_max") c.family.modulation_max = parse_num(full, val);
        else if (full == "estimate.bump_orders") c.family.bump_orders = parse_int_list(full, val);
        else if (full == "poincare.random_members") c.poincare_random_members = static_cast<int>(parse_int(full, val));
        else if (full == "poincare.max_degree") c.poincare_max_degree = static_cast<int>(parse_int(full, val));
        else if (full == "multiplier.log10_lo") c.multiplier_log10_lo = parse_num(full, val);
        else if (full == "multiplier.log10_hi") c.multiplier_log10_hi = parse_num(full, val);
        else if (full == "multiplier.xi_steps") c.multiplier_xi_steps = static_cast<int>(parse_int(full, val));
        else if (full == "multiplier.eta_steps") c.multiplier_eta_steps = static_cast<int>(parse_int(full, val));
        else if (full == "multiplier.homogeneity_exponent") c.homogeneity_exponent = parse_num(full, val);
        else if (full == "maximal-sharp.resolution") c.grid_resolution = static_cast<int>(parse_int(full, val));
        else if (full == "maximal-sharp.c") c.hl_c = parse_num(full, val);
        else if (full == "maximal-sharp.lattice_points") c.lattice_points = static_cast<int>(parse_int(full, val));
        else if (full == "maximal-sharp.frac_s") c.frac_s = parse_list(full, val);
        else if (full == "maximal-sharp.p_grid") c.p_grid = parse_list(full, val);
        else throw ConfigError("config: unknown key '" + full + "'");
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

TrialFunction ExperimentConfig::explicit_trial() const {
    if (trial_packets.empty()) {
        Packet p;
        p.time = {-1.0, 0.0, TimeShape::indicator, 2, 1.0};
        p.space.x.assign(dimension, AxisFactor{});
        p.space.y.assign(dimension, AxisFactor{});
        p.space.z.assign(dimension, AxisFactor{});
        return TrialFunction({p});
    }
    std::vector<Packet> packets = trial_packets;
    for (Packet& p : packets) {
        // unspecified axes fall back to unit Gaussians
        if (p.space.x.empty()) p.space.x.assign(dimension, AxisFactor{});
        if (p.space.y.empty()) p.space.y.assign(dimension, AxisFactor{});
        if (p.space.z.empty()) p.space.z.assign(dimension, AxisFactor{});
    }
    try {
        return TrialFunction(std::move(packets));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: bad packet block: ") + e.what());
    }
}

CoefficientPath ExperimentConfig::coefficient_path() const {
    std::vector<SymMatrix> pieces;
    for (const auto& flat : coeff_pieces) {
        if (static_cast<int>(flat.size()) != dimension * dimension)
            throw ConfigError("config: coefficient piece entry count must equal d*d");
        SymMatrix m;
        m.d = dimension;
        m.a.assign(flat.begin(), flat.end());
        pieces.push_back(std::move(m));
    }
    return CoefficientPath(coeff_breakpoints, std::move(pieces), delta);
}

void ExperimentConfig::validate() const {
    if (dimension < 1) throw ConfigError("config: dimension must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("config: delta must lie in (0,1)");
    if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
    if (budget < 1) throw ConfigError("config: estimate budget must be >= 1");
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw ConfigError("config: tolerance must lie in (0,1)");
    if (coeff_breakpoints.size() != coeff_pieces.size() + 1)
        throw ConfigError("config: coefficient breakpoints must number pieces + 1");
    if (lambda_grid.empty()) throw ConfigError("config: lambda grid must be nonempty");
    for (double l : lambda_grid)
        if (l < 0.0) throw ConfigError("config: lambda values must be >= 0");
    if (grid_resolution < 4) throw ConfigError("config: grid resolution must be >= 4");
    if (lattice_points < 2) throw ConfigError("config: lattice_points must be >= 2");
    for (double s : frac_s)
        if (!(s > 0.0 && s < 0.5)) throw ConfigError("config: frac_s entries must lie in (0,1/2)");
    try {
        quad.validate();
        coefficient_path();  // dimension and ellipticity checks
        explicit_trial();    // packet block sanity
        TrialFamilySpec f = family;
        f.dimension = dimension;
        f.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

}  // namespace kfp
