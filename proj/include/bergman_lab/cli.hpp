#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bergman_numeric.hpp"
#include "decay_analysis.hpp"
#include "error.hpp"
#include "growth_solver.hpp"
#include "io.hpp"
#include "majorant.hpp"
#include "model_geometries.hpp"
#include "parallel.hpp"

namespace bergman_lab::cli {

using nlohmann::json;

struct KGrid {
    double start = 10;
    double stop = 1e8;
    std::size_t points = 20;
    bool logarithmic = true;

    std::vector<double> values() const {
        std::vector<double> out(points);
        for (std::size_t i = 0; i < points; ++i) {
            const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
            out[i] = logarithmic ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start)))
                                 : start + t * (stop - start);
        }
        out.front() = start;
        if (points > 1) out.back() = stop;
        return out;
    }
};

/// "start,stop,points,log|lin".
inline KGrid parse_k_grid(const std::string& spec) {
    const auto f = io::split(spec, ',');
    if (f.size() != 4) throw ConfigError("k_grid: expected start,stop,points,log|lin");
    KGrid g;
    g.start = io::parse_double(f[0], "k_grid.start");
    g.stop = io::parse_double(f[1], "k_grid.stop");
    const double points = io::parse_double(f[2], "k_grid.points");
    if (!(points >= 1) || points != std::floor(points)) throw ConfigError("k_grid.points: expected a positive integer");
    g.points = static_cast<std::size_t>(points);
    if (f[3] == "log") g.logarithmic = true;
    else if (f[3] == "lin") g.logarithmic = false;
    else throw ConfigError("k_grid.spacing: expected 'log' or 'lin', got '" + f[3] + "'");
    if (!(g.start > 1)) throw ConfigError("k_grid.start: k must exceed 1");
    if (!(g.stop >= g.start)) throw ConfigError("k_grid.stop: must not be below start");
    return g;
}

/// Pairs (z, w) at which the kernel is evaluated.
struct PointGrid {
    enum class Kind { lattice, diagonal, random } kind = Kind::lattice;
    std::size_t n = 10;
    double radius = 1;
    Point center{0, 0};

    std::vector<std::pair<Point, Point>> pairs(std::uint64_t seed) const {
        std::vector<std::pair<Point, Point>> out;
        if (kind == Kind::random) {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            auto draw = [&] {
                const double r = radius * std::sqrt(unit(rng));
                const double t = 2 * std::numbers::pi * unit(rng);
                return center + std::polar(r, t);
            };
            for (std::size_t i = 0; i < n; ++i) {
                const Point z = draw();
                const Point w = draw();
                out.emplace_back(z, w);
            }
            return out;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double x = n == 1 ? 0.0 : -radius + 2 * radius * static_cast<double>(j) / static_cast<double>(n - 1);
                const double y = n == 1 ? 0.0 : -radius + 2 * radius * static_cast<double>(i) / static_cast<double>(n - 1);
                const Point p = center + Point(x, y);
                out.emplace_back(kind == Kind::lattice ? center : p, p);
            }
        }
        return out;
    }
};

/// "lattice:n:R[@x,y]", "diagonal:n:R[@x,y]" or "random:m:R[@x,y]".
inline PointGrid parse_point_grid(const std::string& spec) {
    PointGrid g;
    std::string body = spec;
    if (const auto at = spec.find('@'); at != std::string::npos) {
        body = spec.substr(0, at);
        const auto c = io::split(spec.substr(at + 1), ',');
        if (c.size() != 2) throw ConfigError("grid.center: expected @x,y");
        g.center = {io::parse_double(c[0], "grid.center"), io::parse_double(c[1], "grid.center")};
    }
    const auto f = io::split(body, ':');
    if (f.size() != 3) throw ConfigError("grid: expected kind:n:R[@x,y]");
    if (f[0] == "lattice") g.kind = PointGrid::Kind::lattice;
    else if (f[0] == "diagonal") g.kind = PointGrid::Kind::diagonal;
    else if (f[0] == "random") g.kind = PointGrid::Kind::random;
    else throw ConfigError("grid.kind: unknown grid kind '" + f[0] + "'");
    const double n = io::parse_double(f[1], "grid.n");
    if (!(n >= 1) || n != std::floor(n)) throw ConfigError("grid.n: expected a positive integer");
    g.n = static_cast<std::size_t>(n);
    g.radius = io::parse_double(f[2], "grid.radius");
    if (!(g.radius >= 0)) throw ConfigError("grid.radius: must be non-negative");
    return g;
}

inline std::vector<double> parse_k_list(const std::string& spec) {
    std::vector<double> out;
    for (const auto& item : io::split(spec, ',')) {
        const double k = io::parse_double(item, "k");
        if (!(k > 1)) throw ConfigError("k: every k must exceed 1");
        out.push_back(k);
    }
    if (out.empty()) throw ConfigError("k: empty list");
    return out;
}

inline Precision precision_from_env() {
    const char* v = std::getenv("BERGMAN_LAB_PRECISION");
    if (v == nullptr || std::string(v).empty() || std::string(v) == "double") return Precision::standard;
    if (std::string(v) == "extended") return Precision::extended;
    throw ConfigError("BERGMAN_LAB_PRECISION: expected 'double' or 'extended', got '" + std::string(v) + "'");
}

/// Everything a command needs; filled from --config and overridden by flags.
struct ExperimentConfig {
    std::optional<json> majorant;
    std::optional<json> geometry;
    std::string k_grid = "10,1e8,20,log";
    std::string k = "16";
    std::string grid = "lattice:10:0.5";
    double gamma = 1;
    std::string samples;
    std::string law = "gaussian";
    std::optional<double> c, C;
    std::string out;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

inline void merge_config_file(ExperimentConfig& cfg, const std::string& path) {
    const json j = io::load_json(path, "config");
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    auto str = [&](const char* key, std::string& dst) {
        if (!j.contains(key)) return;
        if (j[key].is_string()) dst = j[key].get<std::string>();
        else if (j[key].is_number()) dst = io::format_number(j[key].get<double>());
        else throw ConfigError(std::string("config.") + key + ": expected a string");
    };
    auto num = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key)) return std::nullopt;
        if (!j[key].is_number()) throw ConfigError(std::string("config.") + key + ": expected a number");
        return j[key].get<double>();
    };
    if (j.contains("majorant")) cfg.majorant = j["majorant"];
    if (j.contains("geometry")) cfg.geometry = j["geometry"];
    str("k_grid", cfg.k_grid);
    if (j.contains("k") && j["k"].is_array()) {
        std::string list;
        for (const auto& v : j["k"]) {
            if (!v.is_number()) throw ConfigError("config.k: expected numbers");
            list += (list.empty() ? "" : ",") + io::format_number(v.get<double>());
        }
        cfg.k = list;
    } else {
        str("k", cfg.k);
    }
    str("grid", cfg.grid);
    str("samples", cfg.samples);
    str("law", cfg.law);
    str("out", cfg.out);
    if (auto v = num("gamma")) cfg.gamma = *v;
    if (auto v = num("c")) cfg.c = *v;
    if (auto v = num("C")) cfg.C = *v;
    if (auto v = num("seed")) {
        if (*v < 0 || *v != std::floor(*v)) throw ConfigError("config.seed: expected a non-negative integer");
        cfg.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = num("threads")) {
        if (*v < 1 || *v != std::floor(*v)) throw ConfigError("config.threads: expected a positive integer");
        cfg.threads = static_cast<unsigned>(*v);
    }
}

namespace detail {

// Writes to stdout when no --out is given; a path ending in .csv/.json is a
// file, anything else a directory receiving `default_name`.
inline void emit(const std::string& out, const std::string& default_name, const std::string& text, std::ostream& stdout_) {
    if (out.empty() || out == "-") {
        stdout_ << text;
        return;
    }
    std::filesystem::path path(out);
    const auto ext = path.extension().string();
    if (ext != ".csv" && ext != ".json") {
        std::error_code ec;
        std::filesystem::create_directories(path, ec);
        if (ec) throw ConfigError("out: cannot create directory '" + out + "'");
        path /= default_name;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("out: cannot write '" + path.string() + "'");
    file << text;
}

inline GrowthModel growth_model(const ExperimentConfig& cfg, const ModelGeometry* g = nullptr) {
    if (cfg.majorant) return io::parse_majorant(*cfg.majorant);
    if (g != nullptr) return io::default_growth(*g);
    throw ConfigError("majorant: missing (pass --majorant or set it in --config)");
}

} // namespace detail

inline std::string solve_fk(const ExperimentConfig& cfg) {
    const GrowthModel model = detail::growth_model(cfg);
    if (!(cfg.gamma > 0)) throw ConfigError("gamma: must be positive");
    if (model.majorant) {
        const auto check = validate(*model.majorant);
        if (!check.ok()) throw DomainError("majorant: " + check.message());
    }
    const auto ks = parse_k_grid(cfg.k_grid).values();
    const bool with_ratio = model.majorant && model.majorant->asymptotic_rate;

    std::ostringstream out;
    out << "k,N,f,residual,k0,beta,clamped,d_near,d_far";
    if (with_ratio) out << ",f_ratio";
    out << '\n';
    for (double k : ks) {
        double N = std::nan(""), f = analytic_f(k), residual = 0, k0 = std::nan(""), b = std::nan("");
        bool clamped = false;
        if (model.majorant) {
            const auto s = growth(*model.majorant, k);
            N = s.N_of_k;
            f = s.f_of_k;
            residual = s.residual;
            k0 = s.k0;
            b = s.beta;
            clamped = s.clamped;
        }
        const double scale = std::sqrt(std::log(k) / k);
        out << io::format_number(k) << ',' << io::format_number(N) << ',' << io::format_number(f) << ','
            << io::format_number(residual) << ',' << io::format_number(k0) << ',' << io::format_number(b) << ','
            << (clamped ? 1 : 0) << ',' << io::format_number(cfg.gamma * scale) << ',' << io::format_number(f * scale);
        if (with_ratio) out << ',' << io::format_number(f / model.majorant->asymptotic_rate(k));
        out << '\n';
    }
    return out.str();
}

/// Kernel samples for every k in the list and every pair of the grid.
inline std::vector<KernelSample> compute_samples(const ModelGeometry& g, const GrowthModel& model,
                                                 const std::vector<double>& ks, const PointGrid& grid, double gamma,
                                                 std::uint64_t seed, unsigned threads, Precision precision) {
    const auto pairs = grid.pairs(seed);
    std::vector<KernelSample> out;
    for (double k : ks) {
        GramOptions options;
        options.precision = precision;
        options.threads = threads;
        const auto evaluator = make_evaluator(g, k, options);
        const double f = std::max(model.f(k), gamma);
        std::vector<KernelSample> rows(pairs.size());
        parallel_for(pairs.size(), threads, [&](std::size_t i) {
            const auto [z, w] = pairs[i];
            KernelSample s;
            s.k = k;
            s.z = z;
            s.w = w;
            s.absB = evaluator(z, w).absB;
            s.d = distance(g, z, w);
            s.D = diastasis(g, z, w);
            s.region = classify(k, s.d, gamma, f);
            if (g.has_exact_kernel()) {
                if (g.kind() == ModelGeometry::Kind::fock) s.absB_exact = fock_kernel(k, z, w, g.dim());
                else if (k == std::floor(k)) s.absB_exact = cp1_exact_kernel(static_cast<int>(k), z, w);
            }
            rows[i] = s;
        });
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

inline std::string compute_kernel(const ExperimentConfig& cfg) {
    if (!cfg.geometry) throw ConfigError("geometry: missing (pass --geometry or set it in --config)");
    const ModelGeometry g = io::parse_geometry(*cfg.geometry);
    const GrowthModel model = detail::growth_model(cfg, &g);
    if (!(cfg.gamma > 0)) throw ConfigError("gamma: must be positive");
    const auto samples = compute_samples(g, model, parse_k_list(cfg.k), parse_point_grid(cfg.grid), cfg.gamma, cfg.seed,
                                         cfg.threads, precision_from_env());
    std::ostringstream out;
    io::write_samples(out, samples);
    return out.str();
}

namespace detail {

inline json report_json(const DecayReport& r) {
    json j = {{"law", to_string(r.law)},
              {"c", r.fitted_c},
              {"C", r.fitted_C},
              {"envelope_C", r.envelope_C},
              {"r_squared", r.r_squared},
              {"samples", r.samples},
              {"violations", r.violations},
              {"passing", r.passing()}};
    if (r.law == DecayLaw::gaussian_in_d2) j["dim"] = r.fitted_dim;
    if (!r.far_rates.empty()) {
        json rates = json::array();
        for (const auto& f : r.far_rates)
            rates.push_back({{"k", f.k},
                             {"rho", f.rho},
                             {"agmon_normalized", f.agmon_normalized},
                             {"growth_normalized", f.growth_normalized},
                             {"intercept", f.intercept},
                             {"r_squared", f.r_squared},
                             {"samples", f.samples}});
        j["per_k"] = rates;
    }
    return j;
}

// Smallest C with absB <= C k^n exp(-rate) on every sample.
inline double cover_C(std::span<const KernelSample> samples, DecayLaw law, double c, int dim,
                      const std::function<double(double)>& f) {
    double C = 0;
    for (const auto& s : samples)
        C = std::max(C, s.absB / (std::pow(s.k, dim) * std::exp(-bergman_lab::detail::decay_rate(law, c, s.k, s.d, f))));
    return C;
}

// Numbers in the report: NaN and infinities are not valid JSON.
inline void scrub(json& j) {
    if (j.is_number_float() && !std::isfinite(j.get<double>())) j = nullptr;
    else if (j.is_object() || j.is_array())
        for (auto& v : j) scrub(v);
}

} // namespace detail

inline std::string verify_decay(const ExperimentConfig& cfg) {
    if (cfg.samples.empty()) throw ConfigError("samples: missing (pass --samples)");
    if (!(cfg.gamma > 0)) throw ConfigError("gamma: must be positive");
    const GrowthModel model = cfg.majorant ? io::parse_majorant(*cfg.majorant) : GrowthModel::analytic();
    const DecayLaw law = decay_law_from_string(cfg.law);
    auto samples = io::read_samples_file(cfg.samples);
    const std::function<double(double)> f = [&](double k) { return model.f(k); };
    for (auto& s : samples) s.region = classify(s.k, s.d, cfg.gamma, std::max(f(s.k), cfg.gamma));

    std::vector<KernelSample> near, far;
    for (const auto& s : samples) (s.region == Region::far ? far : near).push_back(s);

    json report;
    report["majorant"] = model.name();
    report["gamma"] = cfg.gamma;
    report["samples"] = samples.size();
    const auto counts = count_regions(samples);
    report["region_counts"] = {{"very_near", counts.very_near}, {"near", counts.near}, {"far", counts.far}};

    std::optional<DecayReport> gaussian, exponential;
    try {
        gaussian = fit_gaussian(near);
        report["gaussian_fit"] = detail::report_json(*gaussian);
    } catch (const DomainError& e) {
        report["gaussian_fit"] = {{"error", e.what()}};
    }
    try {
        exponential = fit_far_exponent(far, f);
        report["far_fit"] = detail::report_json(*exponential);
    } catch (const DomainError& e) {
        report["far_fit"] = {{"error", e.what()}};
    }

    // Envelope: supplied constants, else the fitted rate with C covering every sample.
    const std::vector<KernelSample>& scope = law == DecayLaw::gaussian_in_d2 ? near
                                             : law == DecayLaw::exponential_in_d ? far
                                                                                 : samples;
    std::optional<double> c = cfg.c;
    if (!c) {
        if (law == DecayLaw::gaussian_in_d2 && gaussian) c = gaussian->fitted_c;
        if (law == DecayLaw::exponential_in_d && exponential) c = exponential->fitted_c;
        if (law == DecayLaw::agmon_sqrtk && exponential) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& r : exponential->far_rates) m = std::min(m, r.agmon_normalized);
            c = m;
        }
    }
    if (c && *c > 0 && std::isfinite(*c)) {
        const double C = cfg.C ? *cfg.C : detail::cover_C(scope, law, *c, 1, f);
        if (scope.empty() || C > 0) {
            const auto env = scope.empty() ? DecayReport{law, *c, C, C, 0, 0, 0, 0, true, {}}
                                           : verify_envelope(scope, law, *c, C, 1, f);
            report["envelope"] = {{"law", to_string(law)},     {"c", *c},
                                  {"C", C},                    {"samples", env.samples},
                                  {"violations", env.violations}, {"passing", env.passing()},
                                  {"empty", env.empty}};
        }
    } else {
        report["envelope"] = {{"law", to_string(law)}, {"error", "no decay constant available for this law"}};
    }

    // Diagonal rows at one point for >= 3 values of k give the expansion coefficients.
    std::map<std::pair<double, double>, std::map<double, double>> diagonal;
    for (const auto& s : samples)
        if (s.z == s.w) diagonal[{s.z.real(), s.z.imag()}][s.k] = s.absB;
    for (const auto& [z, by_k] : diagonal) {
        if (by_k.size() < 3) continue;
        std::vector<double> ks, values;
        for (const auto& [k, v] : by_k) {
            ks.push_back(k);
            values.push_back(v);
        }
        const auto e = diagonal_expansion_fit(ks, values);
        report["diagonal_expansion"] = {{"z", {z.first, z.second}}, {"b0", e.b0}, {"b1", e.b1}, {"b2", e.b2}};
        break;
    }

    std::vector<KernelSample> very_near;
    for (const auto& s : samples)
        if (s.region == Region::very_near) very_near.push_back(s);
    if (!very_near.empty()) report["shrinking_law_deviation"] = shrinking_law_deviation(very_near);

    detail::scrub(report);
    return report.dump(2) + "\n";
}

/// Entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical Bergman kernels under non-analytic metrics"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path, majorant, geometry, k_grid, k_list, grid, samples, law;
    std::optional<double> gamma, c, C;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--out", out_path, "output file or directory (default stdout)");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    auto* fk = app.add_subcommand("solve-fk", "tabulate N(k) and f(k)");
    fk->add_option("--majorant", majorant, "majorant config (JSON or path)");
    fk->add_option("--k-grid", k_grid, "start,stop,points,log|lin");
    fk->add_option("--gamma", gamma, "very-near/near boundary multiplier");

    auto* ck = app.add_subcommand("compute-kernel", "sample |B_k| on a grid");
    ck->add_option("--geometry", geometry, "geometry config (JSON or path)");
    ck->add_option("--majorant", majorant, "growth class for region tags");
    ck->add_option("--k", k_list, "comma-separated tensor powers");
    ck->add_option("--grid", grid, "lattice:n:R[@x,y] | diagonal:n:R[@x,y] | random:m:R[@x,y]");
    ck->add_option("--gamma", gamma, "very-near/near boundary multiplier");

    auto* vd = app.add_subcommand("verify-decay", "fit and verify decay laws");
    vd->add_option("--samples", samples, "samples CSV");
    vd->add_option("--majorant", majorant, "majorant config (JSON or path)");
    vd->add_option("--gamma", gamma, "very-near/near boundary multiplier");
    vd->add_option("--law", law, "gaussian | exponential | agmon");
    vd->add_option("--c", c, "decay constant");
    vd->add_option("--C", C, "prefactor constant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) merge_config_file(cfg, config_path);
        if (!majorant.empty()) cfg.majorant = io::load_json(majorant, "majorant");
        if (!geometry.empty()) cfg.geometry = io::load_json(geometry, "geometry");
        if (!k_grid.empty()) cfg.k_grid = k_grid;
        if (!k_list.empty()) cfg.k = k_list;
        if (!grid.empty()) cfg.grid = grid;
        if (!samples.empty()) cfg.samples = samples;
        if (!law.empty()) cfg.law = law;
        if (!out_path.empty()) cfg.out = out_path;
        if (gamma) cfg.gamma = *gamma;
        if (c) cfg.c = *c;
        if (C) cfg.C = *C;
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;

        if (fk->parsed()) detail::emit(cfg.out, "solve_fk.csv", solve_fk(cfg), out);
        else if (ck->parsed()) detail::emit(cfg.out, "samples.csv", compute_kernel(cfg), out);
        else detail::emit(cfg.out, "report.json", verify_decay(cfg), out);
        return 0;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

} // namespace bergman_lab::cli
