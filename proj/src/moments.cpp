#include "workmoments/moments.hpp"

#include <cmath>
#include <limits>

#include "workmoments/errors.hpp"
#include "workmoments/parallel.hpp"

namespace workmoments {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_resonance(const SystemParams& p, const char* op) {
    if (!p.resonant()) throw DomainError(std::string(op) + ": requires a resonant drive (drive_omega = 1)");
}

void require_samples(std::span<const double> times, std::span<const ComplexMatrix> rho, const char* op) {
    if (times.size() != rho.size()) throw ShapeError(std::string(op) + ": times and states differ in length");
}

/// Scales absolute moments to reduced units and fills the series.
MomentsReport build_report(const SystemParams& p, MethodTag tag, const MomentsIntegrands& in,
                           const std::vector<double>& sb_cumulative) {
    const double w = p.splitting();
    const double w2 = w * w;
    const double w3 = w2 * w;
    MomentsReport r;
    r.method = tag;
    r.W1 = in.W1 / w;
    r.W2 = in.W2 / w2;
    r.W3_0 = in.W3_0 / w3;
    r.corr_C3_system = in.C3_system / w3;
    r.corr_cross = in.W3_cross / w3;
    r.corr_SB = sb_cumulative.empty() ? 0.0 : sb_cumulative.back() / w3;
    r.assemble();
    r.diagnostics = in.diagnostics;

    r.series.reserve(in.times.size());
    for (std::size_t i = 0; i < in.times.size(); ++i) {
        const auto& c = in.cumulative[i];
        const double sb = sb_cumulative.empty() ? 0.0 : sb_cumulative[i];
        r.series.push_back({in.times[i] * w, c.W1 / w, c.W2 / w2, c.W3_0 / w3,
                            (c.W3_0 + c.C3_system + c.W3_cross + sb) / w3});
    }
    return r;
}

/// Running trapezoid of f over the sample times.
template <class F>
std::vector<double> running_trapezoid(std::span<const double> times, F&& f) {
    std::vector<double> acc(times.size(), 0.0);
    if (times.empty()) return acc;
    double prev = f(0);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double cur = f(i);
        acc[i] = acc[i - 1] + 0.5 * (times[i] - times[i - 1]) * (prev + cur);
        prev = cur;
    }
    return acc;
}

std::vector<double> bath_correction_series(const SystemParams& p, std::span<const double> times,
                                           std::span<const ComplexMatrix> rho) {
    const auto rates = transition_rates(p);
    const double pref = 0.5 * p.splitting() * (rates.up + rates.down);
    const auto drive = DriveProtocol::from(p);
    auto acc = running_trapezoid(times, [&](std::size_t i) {
        return drive.rate(times[i]) * rho[i](kExcited, kGround).imag();
    });
    for (double& a : acc) a *= pref;
    return acc;
}

std::vector<double> bath_correction_rwa_series(const SystemParams& p, std::span<const double> times,
                                               std::span<const ComplexMatrix> rho) {
    const auto rates = transition_rates(p);
    const double w = p.splitting();
    const double pref = 0.25 * p.drive_amplitude() * w * w * (rates.up + rates.down);
    auto acc = running_trapezoid(times, [&](std::size_t i) { return rho[i](kExcited, kGround).imag(); });
    for (double& a : acc) a *= pref;
    return acc;
}

constexpr double kVanishingFirstMoment = 1e-12;

double coth(double x) { return 1.0 / std::tanh(x); }

} // namespace

std::string_view method_name(MethodTag tag) noexcept {
    switch (tag) {
    case MethodTag::full_numeric: return "full_numeric";
    case MethodTag::rwa_regression: return "rwa_regression";
    case MethodTag::mcwf: return "mcwf";
    case MethodTag::oracle: return "oracle";
    }
    return "unknown";
}

double third_moment_bath_correction(const SystemParams& p, std::span<const double> times,
                                    std::span<const ComplexMatrix> rho) {
    require_samples(times, rho, "third_moment_bath_correction");
    const auto acc = bath_correction_series(p, times, rho);
    return acc.empty() ? 0.0 : acc.back();
}

double third_moment_bath_correction_rwa(const SystemParams& p, std::span<const double> times,
                                        std::span<const ComplexMatrix> rho_interaction) {
    require_resonance(p, "third_moment_bath_correction_rwa");
    require_samples(times, rho_interaction, "third_moment_bath_correction_rwa");
    const auto acc = bath_correction_rwa_series(p, times, rho_interaction);
    return acc.empty() ? 0.0 : acc.back();
}

MomentsReport moments_full(const SystemParams& p) {
    const MomentsIntegrands in = coevolve_correlations(p);
    const auto sb = bath_correction_series(p, in.times, in.rho);
    return build_report(p, MethodTag::full_numeric, in, sb);
}

RegressionProblem rwa_problem(const SystemParams& p) {
    p.validate();
    require_resonance(p, "rwa_problem");
    const auto [a, a_dag] = ladder_operators();
    const double w = p.splitting();
    const double lam = p.drive_amplitude();

    const ComplexMatrix h_int = (lam / (2.0 * kI)) * (a - a_dag);
    CorrelationDrivers drivers{(0.5 * lam * w) * (a + a_dag), (0.5 * lam * w * w) * (a_dag - a),
                               (0.5 * lam * w * w * w) * (a + a_dag)};
    const TransitionRates rates = transition_rates(p);

    RegressionProblem pb;
    pb.generator = [h_int, rates](double, const ComplexMatrix& x) {
        ComplexMatrix out = commutator(h_int, x);
        out *= -kI;
        out += dissipator_apply(rates, x);
        return out;
    };
    pb.drivers = [drivers](double) { return drivers; };
    pb.rho0 = thermal_state(p).matrix();
    pb.duration = p.tau();
    pb.steps = p.steps;
    return pb;
}

MomentsReport moments_rwa(const SystemParams& p) {
    const MomentsIntegrands in = coevolve(rwa_problem(p));
    const auto sb = bath_correction_rwa_series(p, in.times, in.rho);
    return build_report(p, MethodTag::rwa_regression, in, sb);
}

double fdt_ratio(const SystemParams& p) {
    const MomentsReport r = moments_rwa(p);
    if (std::abs(r.W1) < kVanishingFirstMoment)
        throw DomainError("fdt_ratio: first moment vanishes, ratio undefined");
    return r.W2 / r.W1;
}

double fdt_taylor(const SystemParams& p) {
    const double g = p.gamma_down;
    const double lam = p.lambda0;
    const double tau = p.tau() * p.splitting();
    const double boltz = std::exp(-p.beta);
    return coth(0.5 * p.beta) +
           g * lam * lam * tau * tau * tau / 60.0 * (1.0 - boltz) * (1.0 - g * tau / 6.0 * (1.0 + boltz));
}

std::vector<FdtPoint> fdt_scan(const SystemParams& base, std::span<const double> lambdas,
                               std::span<const double> gammas, std::size_t workers) {
    std::vector<FdtPoint> out(lambdas.size() * gammas.size());
    parallel_for(
        out.size(),
        [&](std::size_t idx) {
            SystemParams p = base;
            p.gamma_down = gammas[idx / lambdas.size()];
            p.lambda0 = lambdas[idx % lambdas.size()];
            double ratio = std::numeric_limits<double>::quiet_NaN();
            try {
                ratio = fdt_ratio(p);
            } catch (const DomainError&) {
            }
            out[idx] = {p.lambda0, p.gamma_down, ratio, fdt_taylor(p)};
        },
        workers);
    return out;
}

} // namespace workmoments
