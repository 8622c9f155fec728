#include "workmoments/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

#include "workmoments/csv.hpp"
#include "workmoments/errors.hpp"
#include "workmoments/parallel.hpp"
#include "workmoments/svg.hpp"
#include "workmoments/tpm_oracle.hpp"

namespace workmoments {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<Subcommand, std::string_view>, 6> kSubcommands{{
    {Subcommand::moments, "moments"},
    {Subcommand::qjump, "qjump"},
    {Subcommand::oracle, "oracle"},
    {Subcommand::fdt_scan, "fdt-scan"},
    {Subcommand::compare, "compare"},
    {Subcommand::figures, "figures"},
}};

constexpr std::size_t kRwaCurvePoints = 26;

const std::array<const char*, 3> kPalette{"#1f77b4", "#d62728", "#2ca02c"};

std::string fmt(double v) { return format_number(v); }

std::vector<std::string> prefixed(double value, std::vector<std::string> row) {
    row.insert(row.begin(), fmt(value));
    return row;
}

void run_moments(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const SystemParams& p = cfg.system;
    log << "moments: master equation, " << p.steps << " steps\n";
    const MomentsReport full = moments_full(p);
    std::optional<MomentsReport> rwa;
    if (p.resonant()) rwa = moments_rwa(p);

    CsvWriter table(out / "moments.csv", moments_header());
    table.row(moments_row(full));
    if (rwa) table.row(moments_row(*rwa));
    table.close();

    CsvWriter series(out / "series.csv", {"omega0_t", "W1_me", "W2_me", "W3_0_me", "W3_me", "W1_rwa", "W2_rwa",
                                          "W3_0_rwa", "W3_rwa"});
    for (std::size_t i : subsample_indices(full.series.size(), cfg.series_points)) {
        const SeriesPoint& a = full.series[i];
        std::vector<std::string> row{fmt(a.t), fmt(a.W1), fmt(a.W2), fmt(a.W3_0), fmt(a.W3)};
        if (rwa) {
            const SeriesPoint& b = rwa->series[i];
            for (double v : {b.W1, b.W2, b.W3_0, b.W3}) row.push_back(fmt(v));
        } else {
            row.resize(9);
        }
        series.row(row);
    }
    series.close();
}

void write_histogram(const WorkStatistics& s, const fs::path& path) {
    CsvWriter h(path, {"work_over_hw0", "count", "probability"});
    for (const auto& [w, n] : s.counts) h.row({fmt(w), std::to_string(n), fmt(s.histogram.at(w))});
    h.close();
}

void run_qjump(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    log << "qjump: " << cfg.n_traj << " trajectories, seed " << cfg.master_seed << "\n";
    EnsembleOptions opt;
    opt.keep_records = cfg.dump_records;
    const EnsembleResult r = run_ensemble(cfg.system, cfg.n_traj, cfg.master_seed, opt);

    CsvWriter table(out / "qjump_moments.csv", moments_header());
    table.row(moments_row(r.stats));
    table.close();
    write_histogram(r.stats, out / "histogram.csv");

    if (cfg.dump_records) {
        const fs::path path = out / "records.csv";
        std::ofstream os(path, std::ios::binary);
        if (!os) throw IoError("cannot open " + path.string() + " for writing");
        write_records(os, r.records);
        os.flush();
        if (!os) throw IoError("write failed: " + path.string());
    }
}

void run_oracle(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const TotalSystemModel model = cfg.oracle_model();
    log << "oracle: dimension " << model.dimension() << ", " << cfg.oracle.steps << " steps\n";
    const TwoPointMeasurement tpm(model, cfg.oracle.steps);
    const TPMDistribution d = tpm.distribution();

    {
        const fs::path path = out / "distribution.txt";
        std::ofstream os(path, std::ios::binary);
        if (!os) throw IoError("cannot open " + path.string() + " for writing");
        write_distribution(os, d);
        os.flush();
        if (!os) throw IoError("write failed: " + path.string());
    }

    const auto g = memoize([&tpm](double u) { return tpm.generating_function(u); });
    const auto g0 = memoize([&tpm](double u) { return tpm.generating_function_commuting(u); });

    CsvWriter mom(out / "oracle_moments.csv",
                  {"order", "from_distribution", "from_G", "from_G0", "imag_residue_G", "imag_residue_G0"});
    std::array<double, 4> m_g{}, m_g0{};
    for (int n = 1; n <= 3; ++n) {
        const auto a = moments_by_finite_difference(g, n, cfg.oracle.fd_step);
        const auto b = moments_by_finite_difference(g0, n, cfg.oracle.fd_step);
        m_g[n] = a.value;
        m_g0[n] = b.value;
        mom.row({std::to_string(n), fmt(moments_from_distribution(d, n)), fmt(a.value), fmt(b.value),
                 fmt(a.imaginary_residue), fmt(b.imaginary_residue)});
    }
    mom.close();

    double psum = 0.0;
    for (const auto& e : d.entries) psum += e.p;
    const auto corr = tpm.correction_terms();
    CsvWriter c(out / "oracle_corrections.csv", {"c3_term", "cross_term", "predicted_gap", "measured_gap",
                                                  "jarzynski", "probability_sum", "unitarity_residual"});
    c.row({fmt(corr.c3_term), fmt(corr.cross_term), fmt(corr.total()), fmt(m_g[3] - m_g0[3]),
           fmt(exponential_work_average(d, model.system.beta)), fmt(psum), fmt(d.unitarity_residual)});
    c.close();

    const std::size_t n = cfg.oracle.u_count;
    std::vector<double> us(n);
    for (std::size_t i = 0; i < n; ++i)
        us[i] = n == 1 ? 0.0 : -cfg.oracle.u_max + 2.0 * cfg.oracle.u_max * static_cast<double>(i) / (n - 1);
    std::vector<Complex> gv(n), g0v(n);
    parallel_for(n, [&](std::size_t i) {
        gv[i] = g(us[i]);
        g0v[i] = g0(us[i]);
    });
    CsvWriter gf(out / "generating_function.csv", {"u", "re_G", "im_G", "re_G0", "im_G0"});
    for (std::size_t i = 0; i < n; ++i)
        gf.row({fmt(us[i]), fmt(gv[i].real()), fmt(gv[i].imag()), fmt(g0v[i].real()), fmt(g0v[i].imag())});
    gf.close();
}

void run_fdt_scan(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto lambdas = cfg.fdt.lambdas();
    const auto gammas = cfg.fdt.gammas();
    log << "fdt-scan: " << lambdas.size() << " x " << gammas.size() << " grid\n";
    const auto points = fdt_scan(cfg.system, lambdas, gammas);
    const double coth = 1.0 / std::tanh(cfg.system.beta / 2.0);
    CsvWriter w(out / "fdt.csv", {"lambda0", "gamma_down", "ratio", "taylor", "coth"});
    for (const auto& pt : points) w.row({fmt(pt.lambda0), fmt(pt.gamma_down), fmt(pt.ratio), fmt(pt.taylor), fmt(coth)});
    w.close();
}

void run_compare(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    std::vector<CompareEntry> entries;
    for (double gamma : cfg.gammas) {
        SystemParams p = cfg.system;
        p.gamma_down = gamma;
        log << "compare: gamma_down " << gamma << ", " << cfg.n_traj << " trajectories\n";
        CompareEntry e;
        e.gamma_down = gamma;
        e.me = moments_full(p);
        e.mc = run_ensemble(p, cfg.n_traj, cfg.master_seed).stats;
        if (p.resonant()) e.rwa = moments_rwa(p);
        entries.push_back(std::move(e));
    }

    std::vector<std::string> header = moments_header();
    header.insert(header.begin(), "gamma_down");
    CsvWriter table(out / "compare.csv", header);
    for (const auto& e : entries) {
        table.row(prefixed(e.gamma_down, moments_row(e.me)));
        table.row(prefixed(e.gamma_down, moments_row(e.mc)));
        if (e.rwa) table.row(prefixed(e.gamma_down, moments_row(*e.rwa)));
    }
    table.close();

    CsvWriter series(out / "compare_series.csv", {"gamma_down", "omega0_t", "W2_me", "W2_rwa"});
    for (const auto& e : entries) {
        for (std::size_t i : subsample_indices(e.me.series.size(), cfg.series_points)) {
            series.row({fmt(e.gamma_down), fmt(e.me.series[i].t), fmt(e.me.series[i].W2),
                        e.rwa ? fmt(e.rwa->series[i].W2) : std::string()});
        }
    }
    series.close();

    CsvWriter curve(out / "compare_rwa_curve.csv", {"gamma_down", "W1_rwa", "W2_rwa", "W3_rwa"});
    if (cfg.system.resonant() && !cfg.gammas.empty()) {
        const double gmax = *std::max_element(cfg.gammas.begin(), cfg.gammas.end());
        const double gmin = *std::min_element(cfg.gammas.begin(), cfg.gammas.end());
        std::vector<MomentsReport> reports(kRwaCurvePoints);
        parallel_for(kRwaCurvePoints, [&](std::size_t i) {
            SystemParams p = cfg.system;
            p.gamma_down = gmin + (gmax - gmin) * static_cast<double>(i) / (kRwaCurvePoints - 1);
            reports[i] = moments_rwa(p);
            reports[i].series.clear();
        });
        for (std::size_t i = 0; i < kRwaCurvePoints; ++i) {
            const double gamma = gmin + (gmax - gmin) * static_cast<double>(i) / (kRwaCurvePoints - 1);
            curve.row({fmt(gamma), fmt(reports[i].W1), fmt(reports[i].W2), fmt(reports[i].W3)});
        }
    }
    curve.close();

    const std::string verdict = verdict_line(max_discrepancy(entries), cfg.tolerance);
    write_text_file(out / "verdict.txt", verdict + "\n");
    log << verdict << "\n";
}

std::vector<double> column(const CsvTable& t, std::string_view name) { return t.numbers(name); }

void render_fig1(const fs::path& out) {
    const CsvTable t = read_csv(out / "compare_series.csv");
    const auto gamma = column(t, "gamma_down");
    const auto time = column(t, "omega0_t");
    const auto me = column(t, "W2_me");
    const auto rwa = column(t, "W2_rwa");
    LineChart c;
    c.title = "Second moment of work vs protocol length";
    c.x_label = "omega0 tau";
    c.y_label = "<W^2>/(hbar omega0)^2";
    std::vector<double> seen;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        if (std::find(seen.begin(), seen.end(), gamma[i]) != seen.end()) continue;
        seen.push_back(gamma[i]);
        const std::string color = kPalette[(seen.size() - 1) % kPalette.size()];
        PlotSeries a{"ME, Gd=" + fmt(gamma[i]), {}, {}, {}, SeriesStyle::line, color};
        PlotSeries b{"RWA, Gd=" + fmt(gamma[i]), {}, {}, {}, SeriesStyle::dashed, color};
        for (std::size_t j = i; j < gamma.size(); ++j) {
            if (gamma[j] != gamma[i]) continue;
            a.x.push_back(time[j]);
            a.y.push_back(me[j]);
            b.x.push_back(time[j]);
            b.y.push_back(rwa[j]);
        }
        c.series.push_back(std::move(a));
        if (std::any_of(b.y.begin(), b.y.end(), [](double v) { return std::isfinite(v); }))
            c.series.push_back(std::move(b));
    }
    write_text_file(out / "fig1.svg", render_line_chart(c));
}

void render_fig2(const fs::path& out) {
    const CsvTable t = read_csv(out / "compare.csv");
    const auto gamma = column(t, "gamma_down");
    const auto method = t.strings("method");
    const std::array<std::string, 3> cols{"W1", "W2", "W3"};
    const std::array<std::string, 3> errs{"stderr1", "stderr2", "stderr3"};
    const auto w3_0 = column(t, "W3_0");

    LineChart c;
    c.title = "Work moments: master equation, quantum jumps, RWA";
    c.x_label = "Gd / omega0";
    c.y_label = "<W^n>/(hbar omega0)^n";

    const CsvTable curve = read_csv(out / "compare_rwa_curve.csv");
    for (std::size_t n = 0; n < 3; ++n) {
        const std::string color = kPalette[n];
        if (!curve.rows.empty()) {
            c.series.push_back({"RWA n=" + std::to_string(n + 1), curve.numbers("gamma_down"),
                                curve.numbers(cols[n] + "_rwa"), {}, SeriesStyle::line,
                                color});
        }
        const auto v = column(t, cols[n]);
        const auto e = column(t, errs[n]);
        PlotSeries me{"ME n=" + std::to_string(n + 1), {}, {}, {}, SeriesStyle::crosses, color};
        PlotSeries mc{"jumps n=" + std::to_string(n + 1), {}, {}, {}, SeriesStyle::markers, color};
        for (std::size_t i = 0; i < method.size(); ++i) {
            if (method[i] == method_name(MethodTag::full_numeric)) {
                me.x.push_back(gamma[i]);
                me.y.push_back(v[i]);
            } else if (method[i] == method_name(MethodTag::mcwf)) {
                mc.x.push_back(gamma[i]);
                mc.y.push_back(v[i]);
                mc.err.push_back(e[i]);
            }
        }
        c.series.push_back(std::move(me));
        c.series.push_back(std::move(mc));
    }
    PlotSeries w0{"ME <W^3>_0", {}, {}, {}, SeriesStyle::crosses, "#7f7f7f"};
    for (std::size_t i = 0; i < method.size(); ++i) {
        if (method[i] != method_name(MethodTag::full_numeric)) continue;
        w0.x.push_back(gamma[i]);
        w0.y.push_back(w3_0[i]);
    }
    c.series.push_back(std::move(w0));
    write_text_file(out / "fig2.svg", render_line_chart(c));
}

void render_fig3(const fs::path& out) {
    const CsvTable t = read_csv(out / "fdt.csv");
    const auto lambda = column(t, "lambda0");
    const auto gamma = column(t, "gamma_down");
    const auto ratio = column(t, "ratio");
    HeatGrid g;
    g.title = "Fluctuation-dissipation ratio <W^2>/<W> (RWA)";
    g.x_label = "lambda0 / (hbar omega0)";
    g.y_label = "Gd / omega0";
    g.value_label = "ratio / hbar omega0";
    for (double l : lambda)
        if (std::find(g.x.begin(), g.x.end(), l) == g.x.end()) g.x.push_back(l);
    for (double y : gamma)
        if (std::find(g.y.begin(), g.y.end(), y) == g.y.end()) g.y.push_back(y);
    if (g.x.size() * g.y.size() != ratio.size()) throw IoError("fdt.csv is not a complete grid");
    g.values.assign(ratio.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < ratio.size(); ++i) {
        const auto cx = std::find(g.x.begin(), g.x.end(), lambda[i]) - g.x.begin();
        const auto cy = std::find(g.y.begin(), g.y.end(), gamma[i]) - g.y.begin();
        g.values[static_cast<std::size_t>(cy) * g.x.size() + static_cast<std::size_t>(cx)] = ratio[i];
    }
    write_text_file(out / "fig3.svg", render_heat_grid(g));
}

void run_figures(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const bool have_compare = fs::exists(out / "compare.csv") && fs::exists(out / "compare_series.csv") &&
                              fs::exists(out / "compare_rwa_curve.csv");
    if (!have_compare) run_compare(cfg, out, log);
    if (!fs::exists(out / "fdt.csv")) run_fdt_scan(cfg, out, log);
    log << "figures: rendering from CSV files in " << out.string() << "\n";
    render_fig1(out);
    render_fig2(out);
    render_fig3(out);
}

} // namespace

std::string_view subcommand_name(Subcommand s) noexcept {
    for (const auto& [k, name] : kSubcommands)
        if (k == s) return name;
    return {};
}

std::optional<Subcommand> parse_subcommand(std::string_view name) noexcept {
    for (const auto& [k, n] : kSubcommands)
        if (n == name) return k;
    return std::nullopt;
}

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& entry : kSubcommands) v.emplace_back(entry.second);
        return v;
    }();
    return names;
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
    return kExitNumeric;
}

void execute_subcommand(const RunConfig& cfg, Subcommand which, const fs::path& out_dir, std::ostream& log) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    switch (which) {
    case Subcommand::moments: run_moments(cfg, out_dir, log); break;
    case Subcommand::qjump: run_qjump(cfg, out_dir, log); break;
    case Subcommand::oracle: run_oracle(cfg, out_dir, log); break;
    case Subcommand::fdt_scan: run_fdt_scan(cfg, out_dir, log); break;
    case Subcommand::compare: run_compare(cfg, out_dir, log); break;
    case Subcommand::figures: run_figures(cfg, out_dir, log); break;
    }
}

int run_subcommand(const RunConfig& cfg, Subcommand which, const fs::path& out_dir, std::ostream& log,
                   std::ostream& err) {
    try {
        execute_subcommand(cfg, which, out_dir, log);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

const std::vector<std::string>& moments_header() {
    static const std::vector<std::string> h{"method",     "W1",      "W2",      "W3_0",    "corr_C3_sys", "corr_cross",
                                            "corr_SB",    "W3",      "stderr1", "stderr2", "stderr3"};
    return h;
}

std::vector<std::string> moments_row(const MomentsReport& r) {
    return {std::string(method_name(r.method)), fmt(r.W1), fmt(r.W2), fmt(r.W3_0), fmt(r.corr_C3_system),
            fmt(r.corr_cross), fmt(r.corr_SB), fmt(r.W3), fmt(r.stderr_[0]), fmt(r.stderr_[1]), fmt(r.stderr_[2])};
}

std::vector<std::string> moments_row(const WorkStatistics& s) {
    return {std::string(method_name(MethodTag::mcwf)), fmt(s.moments[0]), fmt(s.moments[1]), "", "", "", "",
            fmt(s.moments[2]), fmt(s.stderr_[0]), fmt(s.stderr_[1]), fmt(s.stderr_[2])};
}

double CompareEntry::discrepancy() const noexcept {
    const std::array<double, 3> ref{me.W1, me.W2, me.W3};
    double worst = 0.0;
    for (std::size_t n = 0; n < 3; ++n) worst = std::max(worst, std::abs(mc.moments[n] - ref[n]));
    return worst;
}

double max_discrepancy(const std::vector<CompareEntry>& entries) noexcept {
    double worst = 0.0;
    for (const auto& e : entries) worst = std::max(worst, e.discrepancy());
    return worst;
}

std::string verdict_line(double discrepancy, double tolerance) {
    return "max_discrepancy=" + fmt(discrepancy) + " tolerance=" + fmt(tolerance) + " " +
           (discrepancy <= tolerance ? "PASS" : "FAIL");
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t points) {
    if (n == 0) return {};
    if (points >= n) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    if (points <= 1) return {n - 1};
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < points; ++k) {
        const std::size_t idx = (k * (n - 1) + (points - 1) / 2) / (points - 1);
        if (out.empty() || idx != out.back()) out.push_back(idx);
    }
    return out;
}

} // namespace workmoments
