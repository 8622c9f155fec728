// cli.hpp: subcommand orchestration, CSV artifacts and SVG figures

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "workmoments/config.hpp"
#include "workmoments/moments.hpp"
#include "workmoments/mcwf.hpp"

namespace workmoments {

enum class Subcommand { moments, qjump, oracle, fdt_scan, compare, figures };

std::string_view subcommand_name(Subcommand s) noexcept;
std::optional<Subcommand> parse_subcommand(std::string_view name) noexcept;
const std::vector<std::string>& subcommand_names();

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumeric = 2, kExitIo = 3 };

/// Exit code for an exception escaping a subcommand.
int exit_code_for(const std::exception& e) noexcept;

/// Runs one subcommand and writes its files into out_dir (created if
/// missing). Progress goes to `log`; errors are reported to `err` and mapped
/// to an exit code.
int run_subcommand(const RunConfig& cfg, Subcommand which, const std::filesystem::path& out_dir,
                   std::ostream& log, std::ostream& err);

/// Same, but exceptions propagate.
void execute_subcommand(const RunConfig& cfg, Subcommand which, const std::filesystem::path& out_dir,
                        std::ostream& log);

/// The moments.csv column schema.
const std::vector<std::string>& moments_header();
std::vector<std::string> moments_row(const MomentsReport& r);
/// Ensemble moments in the moments.csv schema; W3_0 and corrections empty.
std::vector<std::string> moments_row(const WorkStatistics& s);

/// Comparison of master-equation and trajectory moments at one coupling.
struct CompareEntry {
    double gamma_down{0.0};
    MomentsReport me;
    WorkStatistics mc;
    std::optional<MomentsReport> rwa;

    /// max_n |<W^n>_MC - <W^n>_ME|, reduced units, corrected third moment.
    double discrepancy() const noexcept;
};

/// Largest discrepancy over entries.
double max_discrepancy(const std::vector<CompareEntry>& entries) noexcept;

/// `max_discrepancy=<v> tolerance=<t> PASS|FAIL`
std::string verdict_line(double discrepancy, double tolerance);

/// Evenly spaced indices into [0, n) keeping both ends; at most `points`.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t points);

} // namespace workmoments
