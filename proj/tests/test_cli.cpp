#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "workmoments/cli.hpp"
#include "workmoments/config.hpp"
#include "workmoments/csv.hpp"
#include "workmoments/errors.hpp"

using namespace workmoments;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("workmoments_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

RunConfig small_config(KeyValues extra = {}) {
    KeyValues kv{{"cycles", "1"}, {"steps", "2000"}, {"n_traj", "300"}, {"series_points", "11"}};
    for (auto& [k, v] : extra) kv[k] = v;
    return make_config(kv);
}

int run(const RunConfig& cfg, Subcommand s, const fs::path& out, std::string* err_text = nullptr) {
    std::ostringstream log, err;
    const int rc = run_subcommand(cfg, s, out, log, err);
    if (err_text) *err_text = err.str();
    return rc;
}

} // namespace

TEST_CASE("subcommand names round trip") {
    CHECK(subcommand_names().size() == 6);
    for (const auto& name : subcommand_names()) {
        const auto s = parse_subcommand(name);
        REQUIRE(s.has_value());
        CHECK(subcommand_name(*s) == name);
    }
    CHECK(parse_subcommand("fdt-scan") == Subcommand::fdt_scan);
    CHECK_FALSE(parse_subcommand("fdt_scan").has_value());
}

TEST_CASE("subsample_indices keeps both ends") {
    CHECK(subsample_indices(0, 5).empty());
    CHECK(subsample_indices(3, 10) == std::vector<std::size_t>{0, 1, 2});
    CHECK(subsample_indices(101, 5) == std::vector<std::size_t>{0, 25, 50, 75, 100});
    const auto idx = subsample_indices(10001, 401);
    CHECK(idx.size() == 401);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == 10000);
}

TEST_CASE("verdict line format") {
    CHECK(verdict_line(0.001, 0.0032) == "max_discrepancy=0.001 tolerance=0.0032 PASS");
    CHECK(verdict_line(0.01, 0.0032) == "max_discrepancy=0.01 tolerance=0.0032 FAIL");
}

TEST_CASE("exit codes by error category") {
    CHECK(exit_code_for(ConfigError("k", "bad")) == kExitConfig);
    CHECK(exit_code_for(IoError("x")) == kExitIo);
    CHECK(exit_code_for(StepSizeError("x")) == kExitNumeric);
    CHECK(exit_code_for(DomainError("x")) == kExitNumeric);
    CHECK(exit_code_for(ShapeError("x")) == kExitNumeric);
}

TEST_CASE("moments writes its tables with the documented schema") {
    const auto out = scratch_dir("moments");
    REQUIRE(run(small_config(), Subcommand::moments, out) == kExitOk);
    const auto t = read_csv(out / "moments.csv");
    CHECK(t.header == moments_header());
    CHECK(t.header == std::vector<std::string>{"method", "W1", "W2", "W3_0", "corr_C3_sys", "corr_cross",
                                               "corr_SB", "W3", "stderr1", "stderr2", "stderr3"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.strings("method") == std::vector<std::string>{"full_numeric", "rwa_regression"});
    const auto s = read_csv(out / "series.csv");
    CHECK(s.rows.size() == 11);
    CHECK(s.numbers("omega0_t").front() == 0.0);
    CHECK(s.numbers("omega0_t").back() == doctest::Approx(2 * std::numbers::pi).epsilon(1e-12));
    CHECK(s.numbers("W1_me").back() == doctest::Approx(t.numbers("W1")[0]).epsilon(1e-12));

    const std::string first = slurp(out / "moments.csv");
    REQUIRE(run(small_config(), Subcommand::moments, out) == kExitOk);
    CHECK(slurp(out / "moments.csv") == first);
    fs::remove_all(out);
}

TEST_CASE("moments without drive is a zero row") {
    const auto out = scratch_dir("zero");
    REQUIRE(run(small_config({{"lambda0", "0"}}), Subcommand::moments, out) == kExitOk);
    const auto t = read_csv(out / "moments.csv");
    for (const char* col : {"W1", "W2", "W3_0", "corr_C3_sys", "corr_cross", "corr_SB", "W3"})
        CHECK(std::abs(t.numbers(col)[0]) < 1e-15);
    fs::remove_all(out);
}

TEST_CASE("qjump output is reproducible") {
    const auto a = scratch_dir("qjump_a");
    const auto b = scratch_dir("qjump_b");
    const RunConfig cfg = small_config({{"dump_records", "true"}});
    REQUIRE(run(cfg, Subcommand::qjump, a) == kExitOk);
    REQUIRE(run(cfg, Subcommand::qjump, b) == kExitOk);
    for (const char* f : {"qjump_moments.csv", "histogram.csv", "records.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK_FALSE(fs::exists(a / "moments.csv"));
    const auto t = read_csv(a / "qjump_moments.csv");
    CHECK(t.strings("method")[0] == "mcwf");
    CHECK(t.strings("W3_0")[0].empty());
    double total = 0.0;
    for (double p : read_csv(a / "histogram.csv").numbers("probability")) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("failures map to exit codes") {
    const auto dir = scratch_dir("errors");
    const fs::path file = dir / "occupied";
    std::ofstream(file) << "x";
    std::string err;
    CHECK(run(small_config(), Subcommand::moments, file, &err) == kExitIo);
    CHECK(err.rfind("error: ", 0) == 0);

    const RunConfig coarse = small_config({{"gamma_down", "10"}, {"steps", "100"}});
    CHECK(run(coarse, Subcommand::qjump, dir / "q", &err) == kExitNumeric);
    CHECK(err.find("jump probability") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fdt-scan at zero coupling gives the equilibrium ratio") {
    const auto out = scratch_dir("fdt");
    const RunConfig cfg = small_config({{"fdt_lambda_count", "3"}, {"fdt_gamma_count", "2"},
                                        {"fdt_gamma_max", "0.01"}, {"fdt_lambda_max", "0.05"}});
    REQUIRE(run(cfg, Subcommand::fdt_scan, out) == kExitOk);
    const auto t = read_csv(out / "fdt.csv");
    CHECK(t.rows.size() == 6);
    const auto gamma = t.numbers("gamma_down");
    const auto ratio = t.numbers("ratio");
    const auto coth = t.numbers("coth");
    const double expected = 1.0 / std::tanh(1.0);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(coth[i] == doctest::Approx(expected).epsilon(1e-12));
        if (gamma[i] == 0.0) CHECK(ratio[i] == doctest::Approx(expected).epsilon(1e-6));
    }
    fs::remove_all(out);
}

TEST_CASE("figures render from existing tables without recomputing them") {
    const auto out = scratch_dir("figures");
    const std::string compare =
        "gamma_down,method,W1,W2,W3_0,corr_C3_sys,corr_cross,corr_SB,W3,stderr1,stderr2,stderr3\n"
        "0,full_numeric,0.1,0.2,0.3,0,0,0,0.3,,,\n"
        "0,mcwf,0.11,0.19,,,,,0.31,0.01,0.02,0.03\n"
        "0,rwa_regression,0.1,0.2,0.3,0,0,0,0.3,,,\n"
        "0.01,full_numeric,0.09,0.18,0.27,0,0,0.001,0.271,,,\n"
        "0.01,mcwf,0.1,0.17,,,,,0.28,0.01,0.02,0.03\n";
    std::ofstream(out / "compare.csv") << compare;
    std::ofstream(out / "compare_series.csv") << "gamma_down,omega0_t,W2_me,W2_rwa\n"
                                                 "0,0,0,0\n0,1,0.1,0.1\n0.01,0,0,\n0.01,1,0.09,\n";
    std::ofstream(out / "compare_rwa_curve.csv") << "gamma_down,W1_rwa,W2_rwa,W3_rwa\n"
                                                    "0,0.1,0.2,0.3\n0.01,0.09,0.18,0.27\n";
    std::ofstream(out / "fdt.csv") << "lambda0,gamma_down,ratio,taylor,coth\n"
                                      "0.01,0,1.3,1.3,1.3\n0.1,0,,1.3,1.3\n"
                                      "0.01,0.01,1.2,1.3,1.3\n0.1,0.01,1.1,1.3,1.3\n";
    REQUIRE(run(small_config(), Subcommand::figures, out) == kExitOk);
    CHECK(slurp(out / "compare.csv") == compare);
    CHECK_FALSE(fs::exists(out / "verdict.txt"));
    for (const char* f : {"fig1.svg", "fig2.svg", "fig3.svg"}) {
        CAPTURE(f);
        const std::string svg = slurp(out / f);
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("</svg>") != std::string::npos);
    }
    fs::remove_all(out);
}

TEST_CASE("figures reports a malformed table as an IO failure") {
    const auto out = scratch_dir("figures_bad");
    std::ofstream(out / "compare.csv") << "gamma_down,method\n0\n";
    std::ofstream(out / "compare_series.csv") << "gamma_down,omega0_t,W2_me,W2_rwa\n";
    std::ofstream(out / "compare_rwa_curve.csv") << "gamma_down,W1_rwa,W2_rwa,W3_rwa\n";
    std::ofstream(out / "fdt.csv") << "lambda0,gamma_down,ratio,taylor,coth\n";
    CHECK(run(small_config(), Subcommand::figures, out) == kExitIo);
    fs::remove_all(out);
}
