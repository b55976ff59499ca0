#include "qrep/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qrep {

namespace {

struct FieldAccessor {
    std::function<double(const SimConfig&)> get;
    std::function<void(SimConfig&, double)> set;
    bool integer = false;
};

const std::map<std::string, FieldAccessor>& field_registry() {
    static const std::map<std::string, FieldAccessor> registry = {
        {"t_coh", {[](const SimConfig& c) { return c.params.t_coh; },
                   [](SimConfig& c, double v) { c.params.t_coh = v; }}},
        {"eta_s", {[](const SimConfig& c) { return c.params.eta_s; },
                   [](SimConfig& c, double v) { c.params.eta_s = v; }}},
        {"t_CN", {[](const SimConfig& c) { return c.params.t_cn; },
                  [](SimConfig& c, double v) { c.params.t_cn = v; }}},
        {"eta_d", {[](const SimConfig& c) { return c.params.eta_d; },
                   [](SimConfig& c, double v) { c.params.eta_d = v; }}},
        {"eta_c", {[](const SimConfig& c) { return c.params.eta_c; },
                   [](SimConfig& c, double v) { c.params.eta_c = v; }}},
        {"p_CN", {[](const SimConfig& c) { return c.params.p_cn; },
                  [](SimConfig& c, double v) { c.params.p_cn = v; }}},
        {"L_att", {[](const SimConfig& c) { return c.params.l_att_km; },
                   [](SimConfig& c, double v) { c.params.l_att_km = v; }}},
        {"epsilon_CN", {[](const SimConfig& c) { return c.params.epsilon_cn; },
                        [](SimConfig& c, double v) { c.params.epsilon_cn = v; }}},
        {"c_fiber", {[](const SimConfig& c) { return c.params.c_fiber; },
                     [](SimConfig& c, double v) { c.params.c_fiber = v; }}},
        {"L", {[](const SimConfig& c) { return c.topology.length_km; },
               [](SimConfig& c, double v) { c.topology.length_km = v; }}},
        {"n", {[](const SimConfig& c) { return static_cast<double>(c.topology.nesting); },
               [](SimConfig& c, double v) {
                   c.topology.nesting = static_cast<int>(v);
                   c.n_auto = false;
               },
               true}},
        {"n_m", {[](const SimConfig& c) { return static_cast<double>(c.topology.multiplex); },
                 [](SimConfig& c, double v) { c.topology.multiplex = static_cast<int>(v); },
                 true}},
        {"n_s", {[](const SimConfig& c) { return static_cast<double>(c.topology.swap_attempt_cap); },
                 [](SimConfig& c, double v) { c.topology.swap_attempt_cap = static_cast<int>(v); },
                 true}},
    };
    return registry;
}

// Field order for serialization and listings.
const std::vector<std::string>& field_order() {
    static const std::vector<std::string> order = {
        "t_coh", "eta_s", "t_CN", "eta_d", "eta_c", "p_CN", "L_att", "epsilon_CN",
        "c_fiber", "L", "n", "n_m", "n_s"};
    return order;
}

std::string format_value(double v, bool integer) {
    char buf[64];
    if (integer) {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    } else {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
    }
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text, int line, int column) {
    std::string buf(text);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw ConfigError("expected a number, got '" + buf + "'", line, column);
    }
    return v;
}

/// Axis values: either a comma list `a,b,c` or a range `start:stop:step`
/// (stop inclusive within rounding).
std::vector<double> parse_values(std::string_view text, int line, int column) {
    std::vector<double> values;
    const std::string buf{trim(text)};
    if (buf.find(':') != std::string::npos) {
        std::istringstream ss(buf);
        std::string part;
        std::vector<double> parts;
        while (std::getline(ss, part, ':')) {
            parts.push_back(parse_number(trim(part), line, column));
        }
        if (parts.size() != 3 || parts[2] == 0.0) {
            throw ConfigError("range must be start:stop:step with step != 0", line, column);
        }
        const double span = parts[1] - parts[0];
        const long count = std::lround(span / parts[2]);
        if (count < 0 || count > 1000000) {
            throw ConfigError("range produces a bad point count", line, column);
        }
        for (long i = 0; i <= count; ++i) {
            values.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        }
    } else {
        std::istringstream ss(buf);
        std::string part;
        while (std::getline(ss, part, ',')) {
            values.push_back(parse_number(trim(part), line, column));
        }
    }
    if (values.empty()) {
        throw ConfigError("empty value list", line, column);
    }
    return values;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream ss{std::string{text}};
    std::string part;
    while (std::getline(ss, part, ',')) {
        out.emplace_back(trim(part));
    }
    return out;
}

void apply_key(SimConfig& cfg, bool in_sweep, std::string_view key, std::string_view value,
               int line, int column) {
    const std::string k{key};
    if (!in_sweep) {
        if (k == "n" && trim(value) == "auto") {
            cfg.n_auto = true;
            return;
        }
        auto it = field_registry().find(k);
        if (it == field_registry().end()) {
            throw ConfigError("unknown parameter '" + k + "'", line, column);
        }
        it->second.set(cfg, parse_number(trim(value), line, column));
        return;
    }

    if (k.rfind("axis ", 0) == 0) {
        const std::string field{trim(std::string_view(k).substr(5))};
        if (field_registry().find(field) == field_registry().end()) {
            throw ConfigError("unknown sweep axis '" + field + "'", line, column);
        }
        cfg.sweep.axes.push_back({field, parse_values(value, line, column)});
        return;
    }
    if (k == "outputs") {
        for (const std::string& name : split_list(value)) {
            bool known = false;
            for (const std::string& f : report_field_names()) known |= (f == name);
            if (!known) {
                throw ConfigError("unknown report field '" + name + "'", line, column);
            }
            cfg.sweep.outputs.push_back(name);
        }
        return;
    }
    if (k == "format") {
        const std::string fmt{trim(value)};
        if (fmt != "csv" && fmt != "json") {
            throw ConfigError("format must be csv or json", line, column);
        }
        cfg.sweep.format = fmt;
        return;
    }
    if (k == "optimize_n") {
        const std::string v{trim(value)};
        if (v != "true" && v != "false") {
            throw ConfigError("optimize_n must be true or false", line, column);
        }
        cfg.sweep.optimize_n = (v == "true");
        return;
    }
    if (k == "n_max") {
        cfg.sweep.n_max = static_cast<int>(parse_number(trim(value), line, column));
        return;
    }
    throw ConfigError("unknown sweep key '" + k + "'", line, column);
}

std::vector<double> linear_range(double start, double stop, int count) {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) {
        v[i] = start + (stop - start) * static_cast<double>(i) / (count - 1);
    }
    return v;
}

}  // namespace

SimConfig parse_config(std::string_view text, const std::string& source_name) {
    SimConfig cfg;
    bool in_sweep = false;
    int line_no = 0;

    std::istringstream stream{std::string{text}};
    std::string raw;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const std::string_view stripped = trim(line);
        if (stripped.empty()) continue;

        if (stripped.front() == '[') {
            if (stripped == "[sweep]") {
                in_sweep = true;
                continue;
            }
            throw ConfigError(source_name + ": unknown section " + std::string(stripped),
                              line_no, static_cast<int>(raw.find('[')) + 1);
        }

        const auto eq = stripped.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(source_name + ": expected key = value", line_no, 1);
        }
        const std::string_view key = trim(stripped.substr(0, eq));
        const std::string_view value = trim(stripped.substr(eq + 1));
        const int column = static_cast<int>(raw.find(key)) + 1;
        if (key.empty()) {
            throw ConfigError(source_name + ": missing key", line_no, column);
        }
        apply_key(cfg, in_sweep, key, value, line_no, column);
    }
    return cfg;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'", 0, 0);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

void apply_override(SimConfig& cfg, const std::string& key_value) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override must be KEY=VALUE, got '" + key_value + "'", 0, 0);
    }
    const std::string key{trim(std::string_view(key_value).substr(0, eq))};
    const std::string value{trim(std::string_view(key_value).substr(eq + 1))};
    apply_key(cfg, false, key, value, 0, 0);
}

std::string serialize_config(const SimConfig& cfg) {
    std::ostringstream out;
    for (const std::string& name : field_order()) {
        const FieldAccessor& acc = field_registry().at(name);
        if (name == "n" && cfg.n_auto) {
            out << "n = auto\n";
            continue;
        }
        out << name << " = " << format_value(acc.get(cfg), acc.integer) << "\n";
    }
    if (!cfg.sweep.axes.empty() || !cfg.sweep.outputs.empty() || cfg.sweep.optimize_n) {
        out << "[sweep]\n";
        for (const SweepAxis& axis : cfg.sweep.axes) {
            out << "axis " << axis.field << " = ";
            for (std::size_t i = 0; i < axis.values.size(); ++i) {
                if (i) out << ",";
                out << format_value(axis.values[i], false);
            }
            out << "\n";
        }
        if (!cfg.sweep.outputs.empty()) {
            out << "outputs = ";
            for (std::size_t i = 0; i < cfg.sweep.outputs.size(); ++i) {
                if (i) out << ",";
                out << cfg.sweep.outputs[i];
            }
            out << "\n";
        }
        out << "format = " << cfg.sweep.format << "\n";
        out << "optimize_n = " << (cfg.sweep.optimize_n ? "true" : "false") << "\n";
        out << "n_max = " << cfg.sweep.n_max << "\n";
    }
    return out.str();
}

const std::vector<std::string>& parameter_field_names() {
    return field_order();
}

double get_field(const SimConfig& cfg, const std::string& name) {
    auto it = field_registry().find(name);
    if (it == field_registry().end()) {
        throw ConfigError("unknown parameter '" + name + "'", 0, 0);
    }
    return it->second.get(cfg);
}

void set_field(SimConfig& cfg, const std::string& name, double value) {
    auto it = field_registry().find(name);
    if (it == field_registry().end()) {
        throw ConfigError("unknown parameter '" + name + "'", 0, 0);
    }
    it->second.set(cfg, value);
}

const std::vector<std::string>& report_field_names() {
    static const std::vector<std::string> names = {
        "p0", "q_swap_photon", "N_avg", "T_tot_s", "F_avg", "Q", "f",
        "R_hz", "R_eff_hz", "n_CN"};
    return names;
}

double report_field_value(const RateReport& report, const std::string& name) {
    if (name == "p0") return report.p0;
    if (name == "q_swap_photon") return report.q_swap_photon;
    if (name == "N_avg") return report.n_avg;
    if (name == "T_tot_s") return report.t_tot_s;
    if (name == "F_avg") return report.f_avg;
    if (name == "Q") return report.qber;
    if (name == "f") return report.key_fraction;
    if (name == "R_hz") return report.rate_hz;
    if (name == "R_eff_hz") return report.rate_eff_hz;
    if (name == "n_CN") return report.cnot_ops;
    throw ConfigError("unknown report field '" + name + "'", 0, 0);
}

SimConfig preset_config(const std::string& name) {
    SimConfig cfg;  // baseline parameter set
    cfg.topology.multiplex = 10;
    cfg.sweep.optimize_n = true;
    cfg.sweep.format = "csv";

    const std::vector<double> distance = [] {
        std::vector<double> v;
        for (double L = 200.0; L <= 1000.0 + 1e-9; L += 50.0) v.push_back(L);
        return v;
    }();
    const std::vector<double> error_rates = linear_range(1e-5, 5.1e-4, 21);

    if (name == "fig5a") {
        cfg.sweep.axes = {{"L", distance}};
    } else if (name == "fig5b") {
        cfg.sweep.axes = {{"t_coh", {1.0, 10.0, 51.0}}, {"L", distance}};
    } else if (name == "fig5c") {
        cfg.params.p_cn = cfg.params.eta_d = cfg.params.eta_c = 0.95;
        cfg.sweep.axes = {{"L", distance}};
    } else if (name == "fig6" || name == "figA3") {
        cfg.topology.length_km = 1000.0;
        cfg.topology.multiplex = name == "figA3" ? 100 : 10;
        cfg.sweep.axes = {{"epsilon_CN", error_rates}, {"eta_s", linear_range(0.7, 0.9, 21)}};
    } else if (name == "fig7" || name == "figA4") {
        cfg.topology.length_km = 1000.0;
        cfg.topology.multiplex = name == "figA4" ? 100 : 10;
        cfg.sweep.axes = {{"epsilon_CN", error_rates}, {"t_coh", linear_range(1.0, 51.0, 21)}};
    } else if (name == "fig8") {
        cfg.sweep.axes = {{"L", distance}};
        cfg.sweep.outputs = {"R_hz", "R_eff_hz", "N_avg", "T_tot_s", "F_avg"};
    } else {
        throw ConfigError("unknown preset '" + name + "'", 0, 0);
    }
    return cfg;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "fig5a", "fig5b", "fig5c", "fig6", "fig7", "fig8", "figA3", "figA4"};
    return names;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

}  // namespace qrep
