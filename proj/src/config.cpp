#include "workmoments/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "workmoments/csv.hpp"
#include "workmoments/errors.hpp"

namespace workmoments {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view v) {
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    const auto d = parse_double(v);
    if (!d) throw ConfigError(std::string(key), "not a number: '" + std::string(v) + "'");
    return *d;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec == std::errc() && ptr == v.data() + v.size()) return out;
    // Allow integral values written in floating notation, e.g. 1e6.
    const auto d = parse_double(v);
    if (d && *d >= 0.0 && *d < 1.8e19 && std::floor(*d) == *d) return static_cast<std::uint64_t>(*d);
    throw ConfigError(std::string(key), "not a non-negative integer: '" + std::string(v) + "'");
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(std::string(key), "expected true/false: '" + std::string(v) + "'");
}

std::vector<std::string_view> split_list(std::string_view v) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const auto end = comma == std::string_view::npos ? v.size() : comma;
        out.push_back(trim(v.substr(start, end - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<double> to_double_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    for (auto item : split_list(v)) out.push_back(to_double(key, item));
    if (out.empty()) throw ConfigError(std::string(key), "empty list");
    return out;
}

void require(bool ok, std::string_view key, const std::string& what) {
    if (!ok) throw ConfigError(std::string(key), what);
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_number(xs[i]);
    return s;
}

struct KeyEntry {
    std::string name;
    std::function<std::string(const RunConfig&)> show;
    std::function<void(RunConfig&, std::string_view)> set;
};

const std::vector<KeyEntry>& key_entries() {
    static const std::vector<KeyEntry> entries = [] {
        std::vector<KeyEntry> k;
        auto num = [&k](std::string name, auto field) {
            k.push_back({name, [field](const RunConfig& c) { RunConfig copy = c;
                             return format_number(field(copy)); },
                         [field, name](RunConfig& c, std::string_view v) { field(c) = to_double(name, v); }});
        };
        auto count = [&k](std::string name, auto field) {
            k.push_back({name, [field](const RunConfig& c) { RunConfig copy = c;
                             return std::to_string(field(copy)); },
                         [field, name](RunConfig& c, std::string_view v) {
                             using T = std::remove_reference_t<decltype(field(c))>;
                             field(c) = static_cast<T>(to_unsigned(name, v));
                         }});
        };
        auto flag = [&k](std::string name, auto field) {
            k.push_back({name, [field](const RunConfig& c) { RunConfig copy = c;
                             return field(copy) ? "true" : "false"; },
                         [field, name](RunConfig& c, std::string_view v) { field(c) = to_bool(name, v); }});
        };

        num("omega0", [](RunConfig& c) -> double& { return c.system.omega0; });
        num("beta", [](RunConfig& c) -> double& { return c.system.beta; });
        num("gamma_down", [](RunConfig& c) -> double& { return c.system.gamma_down; });
        num("lambda0", [](RunConfig& c) -> double& { return c.system.lambda0; });
        num("drive_omega", [](RunConfig& c) -> double& { return c.system.drive_omega; });
        num("cycles", [](RunConfig& c) -> double& { return c.system.cycles; });
        count("steps", [](RunConfig& c) -> std::size_t& { return c.system.steps; });
        flag("instantaneous_basis", [](RunConfig& c) -> bool& { return c.system.instantaneous_basis; });

        count("n_traj", [](RunConfig& c) -> std::uint64_t& { return c.n_traj; });
        count("master_seed", [](RunConfig& c) -> std::uint64_t& { return c.master_seed; });
        flag("dump_records", [](RunConfig& c) -> bool& { return c.dump_records; });
        k.push_back({"gammas", [](const RunConfig& c) { return join(c.gammas); },
                     [](RunConfig& c, std::string_view v) { c.gammas = to_double_list("gammas", v); }});
        num("tolerance", [](RunConfig& c) -> double& { return c.tolerance; });
        count("series_points", [](RunConfig& c) -> std::size_t& { return c.series_points; });

        count("oracle_modes", [](RunConfig& c) -> std::size_t& { return c.oracle.modes; });
        count("oracle_n_max", [](RunConfig& c) -> std::size_t& { return c.oracle.n_max; });
        k.push_back({"oracle_mode_freqs", [](const RunConfig& c) { return join(c.oracle.mode_freqs); },
                     [](RunConfig& c, std::string_view v) {
                         c.oracle.mode_freqs = to_double_list("oracle_mode_freqs", v);
                     }});
        k.push_back({"oracle_couplings",
                     [](const RunConfig& c) {
                         std::string s;
                         for (std::size_t i = 0; i < c.oracle.couplings.size(); ++i) {
                             const Complex g = c.oracle.couplings[i];
                             s += (i ? "," : "") + format_number(g.real());
                             if (g.imag() != 0.0) s += (g.imag() > 0 ? "+" : "") + format_number(g.imag()) + "i";
                         }
                         return s;
                     },
                     [](RunConfig& c, std::string_view v) {
                         c.oracle.couplings.clear();
                         for (auto item : split_list(v)) {
                             try {
                                 c.oracle.couplings.push_back(parse_complex(item));
                             } catch (const DomainError& e) {
                                 throw ConfigError("oracle_couplings", e.what());
                             }
                         }
                     }});
        k.push_back({"oracle_coupling_form",
                     [](const RunConfig& c) { return c.oracle.coupling == CouplingForm::full ? "full" : "rwa"; },
                     [](RunConfig& c, std::string_view v) {
                         if (v == "full") c.oracle.coupling = CouplingForm::full;
                         else if (v == "rwa") c.oracle.coupling = CouplingForm::rwa;
                         else throw ConfigError("oracle_coupling_form", "expected full or rwa");
                     }});
        k.push_back({"oracle_basis",
                     [](const RunConfig& c) { return c.oracle.basis == MeasurementBasis::total ? "total" : "bare"; },
                     [](RunConfig& c, std::string_view v) {
                         if (v == "total") c.oracle.basis = MeasurementBasis::total;
                         else if (v == "bare") c.oracle.basis = MeasurementBasis::bare;
                         else throw ConfigError("oracle_basis", "expected total or bare");
                     }});
        count("oracle_steps", [](RunConfig& c) -> std::size_t& { return c.oracle.steps; });
        num("oracle_fd_step", [](RunConfig& c) -> double& { return c.oracle.fd_step; });
        num("oracle_u_max", [](RunConfig& c) -> double& { return c.oracle.u_max; });
        count("oracle_u_count", [](RunConfig& c) -> std::size_t& { return c.oracle.u_count; });

        num("fdt_lambda_min", [](RunConfig& c) -> double& { return c.fdt.lambda_min; });
        num("fdt_lambda_max", [](RunConfig& c) -> double& { return c.fdt.lambda_max; });
        count("fdt_lambda_count", [](RunConfig& c) -> std::size_t& { return c.fdt.lambda_count; });
        num("fdt_gamma_min", [](RunConfig& c) -> double& { return c.fdt.gamma_min; });
        num("fdt_gamma_max", [](RunConfig& c) -> double& { return c.fdt.gamma_max; });
        count("fdt_gamma_count", [](RunConfig& c) -> std::size_t& { return c.fdt.gamma_count; });
        return k;
    }();
    return entries;
}

void validate(RunConfig& c) {
    c.system.validate();
    require(c.n_traj >= 1, "n_traj", "must be >= 1");
    for (double g : c.gammas) require(std::isfinite(g) && g >= 0.0, "gammas", "entries must be finite and >= 0");
    require(std::isfinite(c.tolerance) && c.tolerance > 0.0, "tolerance", "must be finite and > 0");
    require(c.series_points >= 2, "series_points", "must be >= 2");

    auto& o = c.oracle;
    require(o.modes >= 1 && o.modes <= 3, "oracle_modes", "must be 1..3");
    require(o.n_max >= 1, "oracle_n_max", "must be >= 1");
    // A single value applies to every mode.
    if (o.mode_freqs.size() == 1) o.mode_freqs.assign(o.modes, o.mode_freqs.front());
    if (o.couplings.size() == 1) o.couplings.assign(o.modes, o.couplings.front());
    require(o.mode_freqs.size() == o.modes, "oracle_mode_freqs", "need one value or one per mode");
    require(o.couplings.size() == o.modes, "oracle_couplings", "need one value or one per mode");
    require(o.steps >= 1, "oracle_steps", "must be >= 1");
    require(o.fd_step >= 1e-4 && o.fd_step <= 1e-1, "oracle_fd_step", "must lie in [1e-4, 0.1]");
    require(std::isfinite(o.u_max) && o.u_max > 0.0, "oracle_u_max", "must be finite and > 0");
    require(o.u_count >= 2, "oracle_u_count", "must be >= 2");
    c.oracle_model().validate();

    const auto& f = c.fdt;
    require(std::isfinite(f.lambda_min) && f.lambda_min > 0.0, "fdt_lambda_min", "must be finite and > 0");
    require(std::isfinite(f.lambda_max) && f.lambda_max >= f.lambda_min, "fdt_lambda_max", "must be >= fdt_lambda_min");
    require(f.lambda_count >= 1, "fdt_lambda_count", "must be >= 1");
    require(std::isfinite(f.gamma_min) && f.gamma_min >= 0.0, "fdt_gamma_min", "must be finite and >= 0");
    require(std::isfinite(f.gamma_max) && f.gamma_max >= f.gamma_min, "fdt_gamma_max", "must be >= fdt_gamma_min");
    require(f.gamma_count >= 1, "fdt_gamma_count", "must be >= 1");
}

} // namespace

std::vector<double> FdtGrid::lambdas() const {
    std::vector<double> out(lambda_count);
    if (lambda_count == 1) return {lambda_min};
    const double lo = std::log(lambda_min), hi = std::log(lambda_max);
    for (std::size_t i = 0; i < lambda_count; ++i)
        out[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(lambda_count - 1));
    out.front() = lambda_min;
    out.back() = lambda_max;
    return out;
}

std::vector<double> FdtGrid::gammas() const {
    std::vector<double> out(gamma_count);
    if (gamma_count == 1) return {gamma_min};
    for (std::size_t i = 0; i < gamma_count; ++i)
        out[i] = gamma_min + (gamma_max - gamma_min) * static_cast<double>(i) / static_cast<double>(gamma_count - 1);
    return out;
}

TotalSystemModel RunConfig::oracle_model() const {
    TotalSystemModel m;
    m.system = system;
    m.n_max = oracle.n_max;
    m.mode_freqs = oracle.mode_freqs;
    m.couplings = oracle.couplings;
    m.coupling = oracle.coupling;
    m.basis = oracle.basis;
    return m;
}

const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const auto keys = [] {
        std::vector<std::pair<std::string, std::string>> out;
        const RunConfig defaults;
        for (const auto& entry : key_entries()) out.emplace_back(entry.name, entry.show(defaults));
        return out;
    }();
    return keys;
}

KeyValues parse_key_values(std::string_view text) {
    KeyValues out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        const auto end = nl == std::string_view::npos ? text.size() : nl;
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + ": missing key");
        out[std::string(key)] = std::string(value);
    }
    return out;
}

RunConfig make_config(const KeyValues& values) {
    RunConfig c;
    for (const auto& [key, value] : values) {
        const auto& entries = key_entries();
        auto it = std::find_if(entries.begin(), entries.end(), [&](const KeyEntry& s) { return s.name == key; });
        if (it == entries.end()) throw ConfigError(key, "unknown key");
        if (value.empty()) throw ConfigError(key, "missing value");
        it->set(c, value);
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path, const KeyValues& overrides) {
    KeyValues merged;
    if (!path.empty()) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw IoError("cannot read config file " + path.string());
        std::stringstream ss;
        ss << is.rdbuf();
        merged = parse_key_values(ss.str());
    }
    for (const auto& [k, v] : overrides) merged[k] = v;
    return make_config(merged);
}

Complex parse_complex(std::string_view s) {
    s = trim(s);
    if (s.empty()) throw DomainError("empty complex value");
    const char last = s.back();
    if (last != 'i' && last != 'j') {
        const auto v = parse_double(s);
        if (!v) throw DomainError("not a complex number: '" + std::string(s) + "'");
        return {*v, 0.0};
    }
    const std::string_view body = s.substr(0, s.size() - 1);
    // Split at the last sign that is not leading and not an exponent sign.
    std::size_t split = std::string_view::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
        if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    auto number = [&](std::string_view part) {
        if (part == "+" || part.empty()) return 1.0;
        if (part == "-") return -1.0;
        std::string_view p = part.front() == '+' ? part.substr(1) : part;
        const auto v = parse_double(p);
        if (!v) throw DomainError("not a complex number: '" + std::string(s) + "'");
        return *v;
    };
    if (split == std::string_view::npos) return {0.0, number(body)};
    return {number(body.substr(0, split)), number(body.substr(split))};
}

} // namespace workmoments
