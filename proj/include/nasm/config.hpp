#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nasm/kam_solver.hpp"
#include "nasm/transport_scan.hpp"

namespace nasm {

/// Settings shared by the CLI subcommands. Defaults match the library defaults.
struct Config {
    ScanConfig scan;
    double radial_tol = 1e-3;
    ContinuationOptions kam;
    std::vector<std::string> warnings;  // unknown keys, one message each
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& message);
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parses "[section]" headers and "key = value" lines; '#' and ';' start comments.
[[nodiscard]] Config parse_config(const std::string& text, const std::string& source = "<config>");
[[nodiscard]] Config load_config(const std::string& path);

/// Applies one "section.key=value" override on top of a config.
void apply_config_value(Config& cfg, const std::string& section, const std::string& key, const std::string& value);

}  // namespace nasm
