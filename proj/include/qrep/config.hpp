#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qrep/rate_model.hpp"

namespace qrep {

/// Parse or validation failure with the offending source position.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line, int column)
        : std::runtime_error(message), line(line), column(column) {}
    int line = 0;
    int column = 0;
};

struct SweepAxis {
    std::string field;
    std::vector<double> values;
};

struct SweepSpec {
    std::vector<SweepAxis> axes;
    std::vector<std::string> outputs;  // empty means every report field
    std::string format = "csv";        // csv | json
    bool optimize_n = false;
    int n_max = 12;
};

/// Flat key-value config: physics parameters and topology at top level,
/// sweep axes in a [sweep] section. Unknown keys are hard errors so a typo
/// cannot silently fall back to a default.
struct SimConfig {
    RepeaterParams params;
    ChainTopology topology;
    bool n_auto = true;  // `n = auto`: choose the depth that maximizes R
    SweepSpec sweep;
};

SimConfig parse_config(std::string_view text, const std::string& source_name = "config");
SimConfig load_config_file(const std::string& path);

/// Applies a `key=value` override (same keys as the config file).
void apply_override(SimConfig& cfg, const std::string& key_value);

/// Canonical text form; parse(serialize(cfg)) reproduces cfg.
std::string serialize_config(const SimConfig& cfg);

/// Numeric fields addressable by name (config keys and sweep axes).
const std::vector<std::string>& parameter_field_names();
double get_field(const SimConfig& cfg, const std::string& name);
void set_field(SimConfig& cfg, const std::string& name, double value);

/// Report fields in output order; names match the JSON/CSV schema.
const std::vector<std::string>& report_field_names();
double report_field_value(const RateReport& report, const std::string& name);

/// Built-in sweep presets reproducing the published parameter scans:
/// fig5a, fig5b, fig5c, fig6, fig7, fig8, figA3, figA4.
SimConfig preset_config(const std::string& name);
const std::vector<std::string>& preset_names();

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qrep
