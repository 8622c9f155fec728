// moments.hpp: first three work moments, third-moment corrections, RWA track
// and fluctuation-dissipation analysis

#pragma once

#include <array>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "workmoments/densemath.hpp"
#include "workmoments/lindblad.hpp"
#include "workmoments/model.hpp"

namespace workmoments {

enum class MethodTag { full_numeric, rwa_regression, mcwf, oracle };

std::string_view method_name(MethodTag tag) noexcept;

/// Running moments of a protocol stopped at time t (omega0 t on the axis).
struct SeriesPoint {
    double t{0.0};
    double W1{0.0};
    double W2{0.0};
    double W3_0{0.0};
    double W3{0.0};
};

/// All moments in reduced units <W^n>/(hbar omega0)^n.
struct MomentsReport {
    MethodTag method{MethodTag::full_numeric};
    double W1{0.0};
    double W2{0.0};
    double W3_0{0.0};
    double corr_C3_system{0.0};
    double corr_cross{0.0};
    double corr_SB{0.0};
    double W3{0.0};
    std::array<double, 3> stderr_{std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN()};
    std::vector<SeriesPoint> series;
    EngineDiagnostics diagnostics;

    /// W3 = W3_0 + corr_C3_system + corr_cross + corr_SB
    void assemble() noexcept { W3 = W3_0 + corr_C3_system + corr_cross + corr_SB; }
};

/// Lab-frame moments from one co-evolution pass.
MomentsReport moments_full(const SystemParams& p);

/// (omega0/2)(Gu + Gd) int lambdadot(t) Im rho_eg(t) dt, trapezoid on the
/// given samples. Absolute units (energy^3).
double third_moment_bath_correction(const SystemParams& p, std::span<const double> times,
                                    std::span<const ComplexMatrix> rho);

/// (lambda0 omega0^2/4)(Gu + Gd) int Im rho^I_eg(t) dt for the rotating-frame
/// state. Throws DomainError off resonance.
double third_moment_bath_correction_rwa(const SystemParams& p, std::span<const double> times,
                                        std::span<const ComplexMatrix> rho_interaction);

/// Rotating-frame problem at resonance: H^I = (lambda0/2i)(a - a^dagger),
/// P^I = lambda0 omega0 (a + a^dagger)/2, C2^I = [H0, P^I], C3^I = omega0^2 P^I,
/// same dissipator as the lab frame. Throws DomainError off resonance.
RegressionProblem rwa_problem(const SystemParams& p);

MomentsReport moments_rwa(const SystemParams& p);

/// <W^2>_RWA / <W>_RWA in units of hbar omega0. Throws DomainError when
/// |<W>| < 1e-12 (zero drive, or a protocol ending on a full Rabi period).
double fdt_ratio(const SystemParams& p);

/// coth(beta/2) + Gd lambda0^2 tau^3/60 (1 - e^-beta)(1 - Gd tau/6 (1 + e^-beta)),
/// reduced units.
double fdt_taylor(const SystemParams& p);

/// One point of an FDT scan.
struct FdtPoint {
    double lambda0{0.0};
    double gamma_down{0.0};
    double ratio{0.0};
    double taylor{0.0};
};

/// fdt_ratio over the Cartesian grid (gamma-major order), fanned out across
/// workers; the result order is the grid order regardless of scheduling.
/// ratio is NaN where fdt_ratio is undefined.
std::vector<FdtPoint> fdt_scan(const SystemParams& base, std::span<const double> lambdas,
                               std::span<const double> gammas, std::size_t workers = 0);

} // namespace workmoments
