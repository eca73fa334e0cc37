#include "nasm/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nasm {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct BadValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double to_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(d)) {
        throw BadValue("malformed number for '" + key + "': '" + v + "'");
    }
    return d;
}

std::size_t to_count(const std::string& key, const std::string& v) {
    const double d = to_real(key, v);
    if (d < 0.0 || d != std::floor(d) || d > 1e18) {
        throw BadValue("expected a nonnegative integer for '" + key + "': '" + v + "'");
    }
    return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw BadValue("expected a boolean for '" + key + "': '" + v + "'");
}

SeedBox to_box(const std::string& key, const std::string& v) {
    std::vector<double> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        parts.push_back(to_real(key, trim(item)));
    }
    if (parts.size() != 4) {
        throw BadValue("'" + key + "' needs four comma-separated numbers x_min,x_max,y_min,y_max");
    }
    return {parts[0], parts[1], parts[2], parts[3]};
}

// Returns false for unknown keys.
bool assign(Config& cfg, const std::string& section, const std::string& key, const std::string& v) {
    const std::string name = section + "." + key;
    if (section == "scan") {
        ScanConfig& s = cfg.scan;
        if (key == "M") s.num_seeds = to_count(name, v);
        else if (key == "N") s.max_iterations = to_count(name, v);
        else if (key == "threshold") s.threshold = to_real(name, v);
        else if (key == "box") s.box = to_box(name, v);
        else if (key == "seed") s.rng_seed = to_count(name, v);
        else if (key == "threads") s.threads = static_cast<unsigned>(to_count(name, v));
        else if (key == "tol") cfg.radial_tol = to_real(name, v);
        else if (key == "rule") {
            if (v == "displacement") s.rule = EscapeRule::Displacement;
            else if (v == "window") s.rule = EscapeRule::AbsoluteWindow;
            else throw BadValue("'" + name + "' must be displacement or window");
        } else if (key == "seeding") {
            if (v == "lattice") s.seeding = SeedMode::Lattice;
            else if (v == "random") s.seeding = SeedMode::Random;
            else throw BadValue("'" + name + "' must be lattice or random");
        } else return false;
        return true;
    }
    if (section == "kam") {
        ContinuationOptions& k = cfg.kam;
        if (key == "tolerance") k.solve.tolerance = to_real(name, v);
        else if (key == "tail_tolerance") k.solve.tail_tolerance = to_real(name, v);
        else if (key == "max_iterations") k.solve.max_iterations = to_count(name, v);
        else if (key == "max_modes") k.solve.max_modes = to_count(name, v);
        else if (key == "small_divisor") k.solve.small_divisor = to_real(name, v);
        else if (key == "padding") k.solve.padding = to_bool(name, v);
        else if (key == "sobolev_s") k.solve.sobolev_s = to_real(name, v);
        else if (key == "blowup_threshold") k.blowup_threshold = to_real(name, v);
        else if (key == "initial_step") k.initial_step = to_real(name, v);
        else if (key == "max_step") k.max_step = to_real(name, v);
        else if (key == "min_step") k.min_step = to_real(name, v);
        else if (key == "growth") k.growth = to_real(name, v);
        else if (key == "initial_modes") k.initial_modes = to_count(name, v);
        else if (key == "s_max") k.s_max = to_real(name, v);
        else if (key == "secant") k.secant_predictor = to_bool(name, v);
        else return false;
        return true;
    }
    return false;
}

}  // namespace

void apply_config_value(Config& cfg, const std::string& section, const std::string& key, const std::string& value) {
    try {
        if (!assign(cfg, section, key, value)) {
            throw std::invalid_argument("unknown configuration key '" + section + "." + key + "'");
        }
    } catch (const BadValue& e) {
        throw std::invalid_argument(e.what());
    }
}

Config parse_config(const std::string& text, const std::string& source) {
    Config cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto c = line.find_first_of("#;"); c != std::string::npos) {
            line.erase(c);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(source, line_no, "unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "scan" && section != "kam") {
                cfg.warnings.push_back(source + ":" + std::to_string(line_no) + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source, line_no, "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(source, line_no, "missing key");
        }
        try {
            if (!assign(cfg, section, key, value)) {
                cfg.warnings.push_back(source + ":" + std::to_string(line_no) + ": unknown key '" +
                                       (section.empty() ? key : section + "." + key) + "'");
            }
        } catch (const BadValue& e) {
            throw ConfigError(source, line_no, e.what());
        }
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError(path, 0, "cannot open configuration file");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace nasm
