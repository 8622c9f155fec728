#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "workmoments/config.hpp"
#include "workmoments/csv.hpp"
#include "workmoments/errors.hpp"

using namespace workmoments;
namespace fs = std::filesystem;

namespace {

std::string failing_key(const KeyValues& kv) {
    try {
        make_config(kv);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return {};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("workmoments_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("config: empty input yields the documented defaults") {
    const RunConfig c = make_config(parse_key_values(""));
    CHECK(c.system.beta == 2.0);
    CHECK(c.system.lambda0 == 0.05);
    CHECK(c.system.drive_omega == 1.0);
    CHECK(c.system.cycles == 10.0);
    CHECK(c.system.steps == 10000);
    CHECK(c.n_traj == 1000000);
    CHECK(c.tolerance == 0.0032);
    CHECK(c.gammas == std::vector<double>{0.0, 0.001, 0.01});
    CHECK(c.oracle.n_max == 3);
    CHECK(c.oracle.couplings.size() == 1);
    CHECK(c.fdt.lambdas().size() == 20);
    CHECK(c.fdt.gammas().size() == 11);
}

TEST_CASE("config: values, comments and duplicates") {
    const auto kv = parse_key_values("# header\n"
                                     "cycles = 10   # ten drive periods\n"
                                     "\n"
                                     "  gamma_down=0.02\r\n"
                                     "gamma_down = 0.03\n"
                                     "gammas = 0, 0.5e-3 ,0.01\n"
                                     "beta = inf\n"
                                     "dump_records = yes\n"
                                     "oracle_modes = 2\n"
                                     "oracle_couplings = 0.01+0.02i\n"
                                     "n_traj = 1e5\n");
    const RunConfig c = make_config(kv);
    CHECK(c.system.tau() == doctest::Approx(20 * std::numbers::pi).epsilon(1e-15));
    CHECK(c.system.gamma_down == 0.03);
    CHECK(c.gammas == std::vector<double>{0.0, 0.0005, 0.01});
    CHECK(std::isinf(c.system.beta));
    CHECK(c.dump_records);
    CHECK(c.n_traj == 100000);
    REQUIRE(c.oracle.couplings.size() == 2);
    CHECK(c.oracle.couplings[1] == Complex(0.01, 0.02));
    CHECK(c.oracle.mode_freqs.size() == 2);
    CHECK(c.oracle_model().dimension() == 32);
}

TEST_CASE("config: errors name the key") {
    CHECK(failing_key({{"gamma_down", "-0.1"}}) == "gamma_down");
    CHECK(failing_key({{"gamma_down", "abc"}}) == "gamma_down");
    CHECK(failing_key({{"no_such_key", "1"}}) == "no_such_key");
    CHECK(failing_key({{"steps", "1"}}) == "steps");
    CHECK(failing_key({{"steps", "2.5"}}) == "steps");
    CHECK(failing_key({{"cycles", "2.3"}}) == "cycles");
    CHECK(failing_key({{"cycles", "2.3"}, {"instantaneous_basis", "true"}}).empty());
    CHECK(failing_key({{"tolerance", "0"}}) == "tolerance");
    CHECK(failing_key({{"oracle_fd_step", "0.5"}}) == "oracle_fd_step");
    CHECK(failing_key({{"oracle_n_max", "0"}}) == "oracle_n_max");
    CHECK(failing_key({{"oracle_coupling_form", "weird"}}) == "oracle_coupling_form");
    CHECK(failing_key({{"fdt_lambda_min", "0"}}) == "fdt_lambda_min");
    CHECK(failing_key({{"dump_records", "maybe"}}) == "dump_records");
    CHECK(failing_key({{"lambda0", ""}}) == "lambda0");
    CHECK_THROWS_AS(parse_key_values("just text\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values(" = 3\n"), ConfigError);
}

TEST_CASE("config: every listed key is accepted with its default text") {
    KeyValues all;
    for (const auto& [key, value] : config_keys()) all[key] = value;
    const RunConfig c = make_config(all);
    const RunConfig d;
    CHECK(c.system.lambda0 == d.system.lambda0);
    CHECK(c.master_seed == d.master_seed);
    CHECK(c.fdt.lambda_count == d.fdt.lambda_count);
}

TEST_CASE("config: file values overridden by flags") {
    const auto dir = scratch_dir("config");
    const auto path = dir / "run.cfg";
    std::ofstream(path) << "lambda0 = 0.1\nsteps = 2000\n";
    const RunConfig c = load_config(path, {{"steps", "4000"}});
    CHECK(c.system.lambda0 == 0.1);
    CHECK(c.system.steps == 4000);
    CHECK(load_config({}, {}).system.lambda0 == 0.05);
    CHECK_THROWS_AS(load_config(dir / "missing.cfg", {}), IoError);
    fs::remove_all(dir);
}

TEST_CASE("parse_complex: accepted spellings") {
    CHECK(parse_complex("0.5") == Complex(0.5, 0.0));
    CHECK(parse_complex("2i") == Complex(0.0, 2.0));
    CHECK(parse_complex("-i") == Complex(0.0, -1.0));
    CHECK(parse_complex("1-2j") == Complex(1.0, -2.0));
    CHECK(parse_complex("1e-3+4e-2i") == Complex(1e-3, 4e-2));
    CHECK_THROWS_AS(parse_complex("x"), DomainError);
}

TEST_CASE("format_number: shortest round trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.8075386330315286}) {
        const auto s = format_number(v);
        CHECK(parse_double(s).value() == v);
    }
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()).empty());
}

TEST_CASE("csv: quoting and parsing round trip") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const auto t = parse_csv("name,value\n\"a,b\",1\n\"q\"\"x\",\n\"multi\nline\",2.5\n");
    REQUIRE(t.rows.size() == 3);
    CHECK(t.strings("name")[0] == "a,b");
    CHECK(t.strings("name")[1] == "q\"x");
    CHECK(t.strings("name")[2] == "multi\nline");
    const auto v = t.numbers("value");
    CHECK(v[0] == 1.0);
    CHECK(std::isnan(v[1]));
    CHECK(v[2] == 2.5);
    CHECK_THROWS_AS(t.numbers("missing"), IoError);
    CHECK_THROWS_AS(t.numbers("name"), IoError);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IoError);
    CHECK_THROWS_AS(parse_csv("a\n\"open\n"), IoError);
    CHECK_THROWS_AS(parse_csv(""), IoError);
}

TEST_CASE("CsvWriter: header, width check and read-back") {
    const auto dir = scratch_dir("csv");
    {
        CsvWriter w(dir / "t.csv", {"x", "label"});
        w.row({format_number(1.5), "a,b"});
        CHECK_THROWS_AS(w.row({"only one"}), ShapeError);
        w.close();
    }
    const auto t = read_csv(dir / "t.csv");
    CHECK(t.header == std::vector<std::string>{"x", "label"});
    CHECK(t.strings("label")[0] == "a,b");
    CHECK_THROWS_AS(CsvWriter(dir / "no_such_dir" / "t.csv", {"x"}), IoError);
    CHECK_THROWS_AS(read_csv(dir / "absent.csv"), IoError);
    fs::remove_all(dir);
}
