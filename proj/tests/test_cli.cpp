#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <bergman_lab/cli.hpp>

#include "oracles.hpp"

using namespace bergman_lab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "bergman-lab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) rows.push_back(io::split(line, ','));
    return rows;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "bergman_lab_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("solve-fk gevrey table") {
    const auto r = run({"solve-fk", "--majorant", R"({"type": "gevrey", "s": 2})", "--k-grid", "10,1e8,20,log"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 21);
    CHECK(rows[0][0] == "k");
    CHECK(rows[0][2] == "f");
    CHECK(rows[1][0] == "10");
    CHECK(rows[20][0] == "100000000");
    // f dips just past k0 = e^2 and increases once log k > 3
    CHECK(std::stod(rows[1][2]) > std::stod(rows[2][2]));
    for (std::size_t i = 3; i < rows.size(); ++i) CHECK(std::stod(rows[i][2]) > std::stod(rows[i - 1][2]));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double k = std::stod(rows[i][0]);
        CHECK_THAT(std::stod(rows[i][2]), WithinRel(oracle::gevrey_f(2, k), 1e-9));
        CHECK_THAT(std::stod(rows[i][4]), WithinRel(oracle::gevrey_k0(2), 1e-12));
    }
}

TEST_CASE("solve-fk denjoy ratio column stabilizes") {
    const auto r = run({"solve-fk", "--majorant", R"({"type": "denjoy", "level": 1})", "--k-grid", "1e7,1e9,9,log"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows[0].back() == "f_ratio");
    double lo = INFINITY, hi = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double v = std::stod(rows[i].back());
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi / lo - 1 < 0.05);
}

TEST_CASE("solve-fk analytic and lin grids") {
    const auto r = run({"solve-fk", "--majorant", R"({"type": "analytic"})", "--k-grid", "10,100,10,lin"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 11);
    CHECK(rows[2][0] == "20");
    CHECK_THAT(std::stod(rows[2][2]), WithinRel(std::sqrt(20 / std::log(20.0)), 1e-15));
}

TEST_CASE("malformed configs exit 2 and name the key") {
    auto r = run({"solve-fk", "--majorant", R"({"type": "gevrey"})"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("'s'"));
    r = run({"solve-fk", "--majorant", R"({"type": "gevrey", "s": "two"})"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("majorant.s"));
    r = run({"solve-fk", "--majorant", R"({"kind": "gevrey"})"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("'type'"));
    r = run({"solve-fk", "--majorant", R"({"type": "gevrey", "s": 0.5})"});
    CHECK(r.code == 2);
    r = run({"solve-fk", "--majorant", R"({"type": "gevrey", "s": 2})", "--k-grid", "10,1e8,20,cubic"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("k_grid"));
    r = run({"compute-kernel", "--geometry", R"({"model": "torus"})"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("geometry.model"));
    r = run({"compute-kernel", "--geometry", R"({"model": "cp1", "perturbation": {"amplitude": 0.05}})"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("amplitude"));
    r = run({"solve-fk", "--majorant", "{not json"});
    CHECK(r.code == 2);
    r = run({"no-such-command"});
    CHECK(r.code == 2);
}

TEST_CASE("compute-kernel row contract and region tags") {
    const auto r = run({"compute-kernel", "--geometry", R"({"model": "cp1"})", "--k", "16", "--grid", "lattice:10:0.5"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 101);
    CHECK(rows[0].size() == 10);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& tag = rows[i][8];
        CHECK((tag == "very_near" || tag == "near" || tag == "far"));
        CHECK_THAT(std::stod(rows[i][7]), WithinRel(std::stod(rows[i][9]), 1e-10));
    }
}

TEST_CASE("compute-kernel is byte-for-byte deterministic") {
    const std::vector<std::string> args{"compute-kernel", "--geometry", R"({"model": "cp1-perturbed"})", "--k",
                                        "16,32",          "--grid",     "random:40:1.2",                 "--seed",
                                        "7"};
    const auto a = run(args);
    const auto b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    CHECK(run(threaded).out == a.out);
    auto reseeded = args;
    reseeded.back() = "8";
    CHECK(run(reseeded).out != a.out);
}

TEST_CASE("compute-kernel fock oracle column") {
    const auto r = run({"compute-kernel", "--geometry", R"({"model": "fock"})", "--k", "4,16,64", "--grid",
                        "lattice:12:0.5@0.1,-0.1"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    double worst = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        worst = std::max(worst, oracle::rel(std::stod(rows[i][7]), std::stod(rows[i][9])));
    CHECK(worst < 1e-6);
}

TEST_CASE("verify-decay fock pipeline") {
    const auto samples = scratch("fock.csv");
    auto r = run({"--out", samples.string(), "compute-kernel", "--geometry", R"({"model": "fock"})", "--k", "16",
                  "--grid", "lattice:10:0.5"});
    REQUIRE(r.code == 0);
    r = run({"verify-decay", "--samples", samples.string(), "--majorant", R"({"type": "analytic"})", "--gamma", "1"});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK_THAT(report["gaussian_fit"]["c"].get<double>(), WithinAbs(0.5, 1e-6));
    CHECK(report["region_counts"]["very_near"].get<int>() + report["region_counts"]["near"].get<int>() +
              report["region_counts"]["far"].get<int>() ==
          100);
    CHECK(report["envelope"]["passing"].get<bool>());
    CHECK(report["samples"].get<int>() == 100);
}

TEST_CASE("verify-decay cp1 diagonal expansion") {
    const auto samples = scratch("cp1_diag.csv");
    auto r = run({"compute-kernel", "--geometry", R"({"model": "cp1"})", "--k", "8,16,32,64", "--grid",
                  "diagonal:3:0.5", "--out", samples.string()});
    REQUIRE(r.code == 0);
    r = run({"verify-decay", "--samples", samples.string()});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK_THAT(report["diagonal_expansion"]["b0"].get<double>(), WithinAbs(1.0, 1e-8));
    CHECK_THAT(report["diagonal_expansion"]["b1"].get<double>(), WithinAbs(1.0, 1e-6));
}

TEST_CASE("verify-decay with a missing samples file exits 2") {
    const auto r = run({"verify-decay", "--samples", "/nonexistent/samples.csv"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("samples"));
}

TEST_CASE("config file with flag overrides and output directory") {
    const auto cfg = scratch("experiment.json");
    {
        std::ofstream out(cfg);
        out << R"({"majorant": {"type": "gevrey", "s": 1.5}, "k_grid": "100,1000,3,log", "gamma": 0.5})";
    }
    const auto dir = scratch("out_dir");
    std::filesystem::remove_all(dir);
    auto r = run({"--config", cfg.string(), "--out", dir.string(), "solve-fk", "--k-grid", "100,1000,4,log"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(slurp(dir / "solve_fk.csv"));
    REQUIRE(rows.size() == 5);
    const double k = std::stod(rows[1][0]);
    CHECK_THAT(std::stod(rows[1][7]), WithinRel(0.5 * std::sqrt(std::log(k) / k), 1e-15));
    r = run({"--config", "/nonexistent/config.json", "solve-fk"});
    CHECK(r.code == 2);
}

TEST_CASE("precision environment variable") {
    ::setenv("BERGMAN_LAB_PRECISION", "bogus", 1);
    auto r = run({"compute-kernel", "--geometry", R"({"model": "cp1"})", "--k", "4", "--grid", "lattice:2:0.1"});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("BERGMAN_LAB_PRECISION"));
    ::setenv("BERGMAN_LAB_PRECISION", "extended", 1);
    r = run({"compute-kernel", "--geometry", R"({"model": "cp1"})", "--k", "4", "--grid", "lattice:2:0.1"});
    CHECK(r.code == 0);
    ::unsetenv("BERGMAN_LAB_PRECISION");
}

TEST_CASE("numbers are written with 17 significant digits") {
    CHECK(io::format_number(0.1) == "0.10000000000000001");
    CHECK(io::format_number(std::numbers::pi) == "3.1415926535897931");
    CHECK(io::format_number(NAN) == "nan");
}

TEST_CASE("samples round-trip through csv") {
    std::vector<KernelSample> samples(2);
    samples[0] = {16, {0.1, 0.2}, {0.3, -0.4}, 0.123456789, 0.5, 0.25, Region::near, 0.123456788};
    samples[1] = {32, {0, 0}, {1e-3, 0}, 1e-300, 1e-3, 1e-6, Region::far, std::nullopt};
    std::stringstream buffer;
    io::write_samples(buffer, samples);
    const auto back = io::read_samples(buffer);
    REQUIRE(back.size() == 2);
    CHECK(back[0].z == samples[0].z);
    CHECK(back[0].absB == samples[0].absB);
    CHECK(back[0].region == Region::near);
    CHECK(back[0].absB_exact == samples[0].absB_exact);
    CHECK_FALSE(back[1].absB_exact.has_value());
    CHECK(back[1].absB == 1e-300);
}

TEST_CASE("the installed binary reports exit codes") {
    const std::string exe = BERGMAN_LAB_EXE;
    CHECK(std::system((exe + " solve-fk --majorant '{\"type\":\"gevrey\",\"s\":2}' --k-grid 10,100,2,log > /dev/null").c_str()) == 0);
    const int code = std::system((exe + " verify-decay --samples /nonexistent.csv 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(code) == 2);
}
