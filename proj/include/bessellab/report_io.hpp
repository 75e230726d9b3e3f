// bessellab: artifact serialization — the versioned JSON run summary, CSV
// histogram files, columnar path dumps — plus the flat key=value run
// configuration format. Every writer is a pure function of its inputs with
// fixed number formatting, so identical runs produce byte-identical files.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bessellab/experiments.hpp"
#include "bessellab/pathsim.hpp"

namespace bessellab {

namespace detail {

/// Shortest text that round-trips a double ("%.17g"); the single formatter
/// used by the CSV and dump writers.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) {
        throw std::invalid_argument("config: key '" + key + "' needs a number, got '" +
                                    value + "'");
    }
    return x;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    unsigned long long x = 0;
    // std::stoull wraps negative input instead of rejecting it.
    const bool negative = value.find('-') != std::string::npos;
    try {
        if (!negative) x = std::stoull(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) {
        throw std::invalid_argument("config: key '" + key +
                                    "' needs a nonnegative integer, got '" + value + "'");
    }
    return static_cast<std::uint64_t>(x);
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("config: key '" + key + "' needs true/false, got '" +
                                value + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// JSON run summary (schema 1).
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json report_to_json(const StatReport& rep) {
    nlohmann::ordered_json j;
    j["id"] = rep.experiment_id;
    j["estimate"] = rep.estimate;
    j["std_error"] = rep.std_error;
    j["target"] = rep.target;
    if (rep.ks_distance.has_value()) j["ks_distance"] = *rep.ks_distance;
    if (rep.ks_threshold.has_value()) j["ks_threshold"] = *rep.ks_threshold;
    j["n_samples"] = rep.n_samples;
    j["pass"] = rep.pass;
    return j;
}

/// The whole run as a versioned JSON document: identification first, then the
/// full configuration echo (keyed like the command-line flags so a summary
/// can be replayed), then per-check reports and histogram names.
inline nlohmann::ordered_json result_to_json(const ExperimentResult& res) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["experiment_id"] = res.config.experiment_id;
    j["mu"] = res.config.mu;
    j["pass"] = res.pass;
    nlohmann::ordered_json cfg;
    cfg["mu"] = res.config.mu;
    cfg["paths"] = res.config.n_paths;
    cfg["steps"] = res.config.n_steps;
    cfg["horizon"] = res.config.horizon;
    cfg["seed"] = res.config.seed;
    cfg["eps"] = res.config.epsilon;
    cfg["workers"] = res.config.workers;
    cfg["as-printed"] = res.config.as_printed;
    j["config"] = cfg;
    nlohmann::ordered_json reps = nlohmann::ordered_json::array();
    for (const auto& rep : res.reports) reps.push_back(report_to_json(rep));
    j["reports"] = reps;
    nlohmann::ordered_json hists = nlohmann::ordered_json::array();
    for (const auto& h : res.histograms) hists.push_back(h.name);
    j["histograms"] = hists;
    return j;
}

inline std::string result_to_json_text(const ExperimentResult& res) {
    return result_to_json(res).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// CSV histograms and columnar path dumps.
// ---------------------------------------------------------------------------

inline std::string histogram_to_csv(const Histogram& h) {
    const std::size_t n = h.bin_left.size();
    if (h.bin_right.size() != n || h.empirical.size() != n || h.theoretical.size() != n) {
        throw std::domain_error("histogram_to_csv: ragged histogram '" + h.name + "'");
    }
    std::string out = "bin_left,bin_right,empirical,theoretical\n";
    for (std::size_t i = 0; i < n; ++i) {
        out += detail::format_double(h.bin_left[i]) + ',' +
               detail::format_double(h.bin_right[i]) + ',' +
               detail::format_double(h.empirical[i]) + ',' +
               detail::format_double(h.theoretical[i]) + '\n';
    }
    return out;
}

/// One batch of paths as columnar numeric text. The header comment names the
/// parameters and seed; the column row is `path time r l` with a trailing
/// `clock` column when the construction carries the additive clock.
inline std::string paths_to_dump(const std::vector<PathGrid>& paths,
                                 std::uint64_t seed) {
    if (paths.empty()) throw std::domain_error("paths_to_dump: no paths");
    const PathGrid& first = paths.front();
    const bool with_clock = !first.clock.empty();
    std::string out = "# bessellab paths construction=";
    out += first.construction_tag == Construction::direct ? "direct" : "time-change";
    out += " mu=" + detail::format_double(first.params.mu);
    out += " seed=" + std::to_string(seed);
    out += " n_paths=" + std::to_string(paths.size()) + "\n";
    out += with_clock ? "path time r l clock\n" : "path time r l\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const PathGrid& path = paths[p];
        if (!path.clock.empty() != with_clock) {
            throw std::domain_error("paths_to_dump: mixed constructions in one batch");
        }
        for (std::size_t k = 0; k < path.times.size(); ++k) {
            out += std::to_string(p) + ' ' + detail::format_double(path.times[k]) + ' ' +
                   detail::format_double(path.r[k]) + ' ' +
                   detail::format_double(path.l[k]);
            if (with_clock) out += ' ' + detail::format_double(path.clock[k]);
            out += '\n';
        }
    }
    return out;
}

inline void write_text_file(const std::string& file_path, const std::string& content) {
    std::ofstream out(file_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + file_path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + file_path);
}

// ---------------------------------------------------------------------------
// Flat key=value run configuration.
// ---------------------------------------------------------------------------

struct ConfigEntry {
    std::string key;
    std::string value;
};

/// Parse the flat key=value format: one entry per line, '#' starts a comment
/// line, blank lines ignored, whitespace around keys and values trimmed.
inline std::vector<ConfigEntry> parse_config_text(const std::string& text) {
    std::vector<ConfigEntry> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value: '" + t + "'");
        }
        entries.push_back({detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1))});
    }
    return entries;
}

inline std::vector<ConfigEntry> load_config_file(const std::string& file_path) {
    std::ifstream in(file_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file: " + file_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Apply one configuration entry to an experiment configuration. Keys are
/// named exactly like the command-line flags; `out` updates the output
/// location. Unknown keys and malformed values throw std::invalid_argument.
inline void apply_config_entry(ExperimentConfig& cfg, std::string* out_location,
                               const ConfigEntry& entry) {
    const std::string& k = entry.key;
    const std::string& v = entry.value;
    if (k == "mu") {
        cfg.mu = detail::parse_double(k, v);
    } else if (k == "paths") {
        cfg.n_paths = static_cast<std::size_t>(detail::parse_unsigned(k, v));
    } else if (k == "steps") {
        cfg.n_steps = static_cast<std::size_t>(detail::parse_unsigned(k, v));
    } else if (k == "horizon") {
        cfg.horizon = detail::parse_double(k, v);
    } else if (k == "seed") {
        cfg.seed = detail::parse_unsigned(k, v);
    } else if (k == "eps") {
        cfg.epsilon = detail::parse_double(k, v);
    } else if (k == "workers") {
        cfg.workers = static_cast<std::size_t>(detail::parse_unsigned(k, v));
    } else if (k == "as-printed") {
        cfg.as_printed = detail::parse_bool(k, v);
    } else if (k == "out") {
        if (out_location) *out_location = v;
    } else {
        throw std::invalid_argument("config: unknown key '" + k + "'");
    }
}

}  // namespace bessellab
