#include "workmoments/model.hpp"

#include <cmath>
#include <numbers>

#include "workmoments/errors.hpp"

namespace workmoments {

double SystemParams::tau() const noexcept {
    return cycles * 2.0 * std::numbers::pi / drive_frequency();
}

bool SystemParams::ends_on_node() const noexcept {
    const double twice = 2.0 * cycles;
    return std::abs(twice - std::round(twice)) <= 1e-12 * std::max(1.0, twice);
}

bool SystemParams::resonant() const noexcept {
    return std::abs(drive_omega - 1.0) <= 1e-12;
}

void SystemParams::validate() const {
    auto require = [](bool ok, const char* key, const char* what) {
        if (!ok) throw ConfigError(key, what);
    };
    require(std::isfinite(omega0) && omega0 > 0.0, "omega0", "must be finite and > 0");
    require(!std::isnan(beta) && beta > 0.0, "beta", "must be > 0");
    require(std::isfinite(gamma_down) && gamma_down >= 0.0, "gamma_down", "must be finite and >= 0");
    require(std::isfinite(lambda0) && lambda0 >= 0.0, "lambda0", "must be finite and >= 0");
    require(std::isfinite(drive_omega) && drive_omega > 0.0, "drive_omega", "must be finite and > 0");
    require(std::isfinite(cycles) && cycles > 0.0, "cycles", "must be finite and > 0");
    require(steps >= 2, "steps", "must be >= 2");
    require(std::isfinite(tau()) && tau() > 0.0, "cycles", "protocol duration must be finite and > 0");
    require(instantaneous_basis || ends_on_node(), "cycles",
            "must be an integer or half-integer unless instantaneous_basis is set");
}

double DriveProtocol::value(double t) const noexcept {
    return amplitude * std::sin(frequency * t);
}

double DriveProtocol::rate(double t) const noexcept {
    return amplitude * frequency * std::cos(frequency * t);
}

LadderOperators ladder_operators() {
    return {ComplexMatrix::unit(2, kGround, kExcited), ComplexMatrix::unit(2, kExcited, kGround)};
}

ComplexMatrix sigma_x() {
    return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}};
}

ComplexMatrix system_hamiltonian(const SystemParams& p, double t) {
    const double lambda = DriveProtocol::from(p).value(t);
    return ComplexMatrix{{0.0, lambda}, {lambda, p.splitting()}};
}

ComplexMatrix power_operator(const SystemParams& p, double t) {
    const double rate = DriveProtocol::from(p).rate(t);
    return ComplexMatrix{{0.0, rate}, {rate, 0.0}};
}

TransitionRates transition_rates(const SystemParams& p) {
    if (!(p.gamma_down >= 0.0)) throw DomainError("transition_rates: gamma_down must be >= 0");
    const double down = p.emission_rate();
    return {down, down * std::exp(-p.beta)};
}

double DensityMatrix::trace_error() const noexcept {
    return std::abs(m_.trace() - 1.0);
}

double DensityMatrix::min_eigenvalue() const {
    if (m_.dim() == 2) return min_eigenvalue_2x2(m_);
    return hermitian_eigensystem(m_).values.front();
}

double min_eigenvalue_2x2(const ComplexMatrix& m) {
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const double b = std::abs(0.5 * (m(0, 1) + std::conj(m(1, 0))));
    return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
}

double ground_population(double beta) {
    return 1.0 / (1.0 + std::exp(-beta));
}

DensityMatrix thermal_state(const SystemParams& p) {
    const double pg = ground_population(p.beta);
    const double pe = 1.0 - pg;
    return DensityMatrix(ComplexMatrix{{pg, 0.0}, {0.0, pe}});
}

} // namespace workmoments
