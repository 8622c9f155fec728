// config.hpp: run configuration, flat `key = value` files and overrides

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "workmoments/model.hpp"
#include "workmoments/tpm_oracle.hpp"

namespace workmoments {

struct OracleConfig {
    std::size_t modes{1};
    std::size_t n_max{3};
    std::vector<double> mode_freqs{1.0};
    std::vector<Complex> couplings{0.02};
    CouplingForm coupling{CouplingForm::full};
    MeasurementBasis basis{MeasurementBasis::total};
    std::size_t steps{4000};
    double fd_step{0.05};
    double u_max{2.0};
    std::size_t u_count{41};
};

struct FdtGrid {
    double lambda_min{0.001};
    double lambda_max{0.1};
    std::size_t lambda_count{20};   // log-spaced
    double gamma_min{0.0};
    double gamma_max{0.05};
    std::size_t gamma_count{11};    // linear

    std::vector<double> lambdas() const;
    std::vector<double> gammas() const;
};

struct RunConfig {
    SystemParams system;
    std::uint64_t n_traj{1000000};
    std::uint64_t master_seed{20130901};
    bool dump_records{false};
    std::vector<double> gammas{0.0, 0.001, 0.01};
    double tolerance{0.0032};
    std::size_t series_points{401};
    OracleConfig oracle;
    FdtGrid fdt;

    /// The oracle model with the run's system parameters.
    TotalSystemModel oracle_model() const;
};

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Every recognised key with its default rendered as text, in display order.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// `key = value` lines; `#` starts a comment; blank lines ignored. Throws
/// ConfigError naming the line on malformed input; later duplicates win.
KeyValues parse_key_values(std::string_view text);

/// Applies `values` over the defaults. Unknown keys, unparsable values and
/// out-of-range values throw ConfigError naming the key.
RunConfig make_config(const KeyValues& values);

/// File (optional, empty path means none) overlaid with `overrides`.
RunConfig load_config(const std::filesystem::path& path, const KeyValues& overrides);

/// Accepts `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
Complex parse_complex(std::string_view s);

} // namespace workmoments
