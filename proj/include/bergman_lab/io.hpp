#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "decay_analysis.hpp"
#include "error.hpp"
#include "growth_solver.hpp"
#include "majorant.hpp"
#include "model_geometries.hpp"

namespace bergman_lab::io {

using nlohmann::json;

/// 17 significant digits, enough to round-trip a double.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Accepts inline JSON (first character '{' or '[') or a path to a JSON file.
inline json load_json(const std::string& arg, const std::string& what) {
    const auto first = arg.find_first_not_of(" \t\r\n");
    std::string text;
    if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
        text = arg;
    } else {
        std::ifstream in(arg);
        if (!in) throw ConfigError(what + ": cannot open '" + arg + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": invalid JSON (" + std::string(e.what()) + ")");
    }
}

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return j.at(key);
}

inline double number(const json& j, const std::string& key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline std::string text(const json& j, const std::string& key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

} // namespace detail

/// `{"type": "gevrey", "s": 1.5}`, `{"type": "denjoy", "level": 1}`,
/// `{"type": "custom", "table": [[x, logM], ...]}` or `{"type": "analytic"}`.
inline GrowthModel parse_majorant(const json& j) {
    const std::string where = "majorant";
    const std::string type = detail::text(j, "type", where);
    try {
        if (type == "analytic") return GrowthModel::analytic();
        if (type == "gevrey") return {gevrey(detail::number(j, "s", where))};
        if (type == "denjoy") {
            const auto& level = detail::require(j, "level", where);
            if (!level.is_number_integer()) throw ConfigError("majorant.level: expected an integer");
            return {denjoy(level.get<int>())};
        }
        if (type == "custom") {
            const auto& table = detail::require(j, "table", where);
            if (!table.is_array()) throw ConfigError("majorant.table: expected an array of [x, logM] pairs");
            std::vector<std::pair<double, double>> rows;
            for (const auto& row : table) {
                if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
                    throw ConfigError("majorant.table: every row must be [x, logM]");
                rows.emplace_back(row[0].get<double>(), row[1].get<double>());
            }
            const std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "custom";
            return {custom_table(name, rows)};
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("majorant: ") + e.what());
    }
    throw ConfigError("majorant.type: unknown majorant type '" + type + "'");
}

/// `{"model": "cp1", "perturbation": {"kind": "bump", "amplitude": 0.04}}`.
inline ModelGeometry parse_geometry(const json& j) {
    const std::string where = "geometry";
    const std::string model = detail::text(j, "model", where);
    std::optional<double> amplitude;
    if (j.contains("perturbation") && !j["perturbation"].is_null()) {
        const auto& p = j["perturbation"];
        const std::string kind = p.contains("kind") ? detail::text(p, "kind", "geometry.perturbation") : "bump";
        if (kind != "bump") throw ConfigError("geometry.perturbation.kind: unknown perturbation '" + kind + "'");
        amplitude = p.contains("amplitude") ? detail::number(p, "amplitude", "geometry.perturbation") : default_bump_amplitude;
    }
    try {
        if (model == "fock") {
            if (amplitude) throw ConfigError("geometry.perturbation: the fock model takes no perturbation");
            return ModelGeometry::fock();
        }
        if (model == "cp1") return amplitude ? ModelGeometry::cp1_perturbed(*amplitude) : ModelGeometry::cp1();
        if (model == "cp1-perturbed") return ModelGeometry::cp1_perturbed(amplitude.value_or(default_bump_amplitude));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("geometry.perturbation.amplitude: ") + e.what());
    }
    throw ConfigError("geometry.model: unknown model '" + model + "'");
}

/// Growth class used to tag regions when none is configured: the unperturbed
/// models are analytic, the bump perturbation is Gevrey of order 2.
inline GrowthModel default_growth(const ModelGeometry& g) {
    if (g.perturbed() && g.amplitude() != 0.0) return {gevrey(2.0)};
    return GrowthModel::analytic();
}

inline const char* sample_header = "k,re_z,im_z,re_w,im_w,d,D,absB,region,absB_exact";

inline void write_samples(std::ostream& out, const std::vector<KernelSample>& samples) {
    out << sample_header << '\n';
    for (const auto& s : samples) {
        out << format_number(s.k) << ',' << format_number(s.z.real()) << ',' << format_number(s.z.imag()) << ','
            << format_number(s.w.real()) << ',' << format_number(s.w.imag()) << ',' << format_number(s.d) << ','
            << format_number(s.D) << ',' << format_number(s.absB) << ',' << to_string(s.region) << ','
            << (s.absB_exact ? format_number(*s.absB_exact) : "") << '\n';
    }
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": not a number: '" + s + "'");
    }
}

inline std::vector<KernelSample> read_samples(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("samples: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    if (header.size() < 8) throw ConfigError("samples: header must start with " + std::string(sample_header));
    std::vector<KernelSample> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        const std::string where = "samples row " + std::to_string(row);
        if (f.size() < 8) throw ConfigError(where + ": expected at least 8 columns");
        KernelSample s;
        s.k = parse_double(f[0], where);
        s.z = {parse_double(f[1], where), parse_double(f[2], where)};
        s.w = {parse_double(f[3], where), parse_double(f[4], where)};
        s.d = parse_double(f[5], where);
        s.D = parse_double(f[6], where);
        s.absB = parse_double(f[7], where);
        if (f.size() > 8 && !f[8].empty()) s.region = region_from_string(f[8]);
        if (f.size() > 9 && !f[9].empty()) s.absB_exact = parse_double(f[9], where);
        out.push_back(s);
    }
    return out;
}

inline std::vector<KernelSample> read_samples_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("samples: cannot open '" + path + "'");
    return read_samples(in);
}

} // namespace bergman_lab::io
