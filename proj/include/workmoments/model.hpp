// model.hpp: driven two-level system, drive protocol, dissipation rates

#pragma once

#include <cstddef>
#include <utility>

#include "workmoments/densemath.hpp"

namespace workmoments {

// Basis ordering of the two-level space: index 0 = |g>, index 1 = |e>.
inline constexpr std::size_t kGround = 0;
inline constexpr std::size_t kExcited = 1;

/// Physical configuration. hbar = 1. omega0 fixes the energy and time scale;
/// every other field is expressed relative to it (energies in hbar*omega0,
/// rates and frequencies in omega0), so results in reduced units do not
/// depend on omega0.
struct SystemParams {
    double omega0{1.0};        // level splitting
    double beta{2.0};          // beta * hbar * omega0
    double gamma_down{0.01};   // emission rate, units of omega0
    double lambda0{0.05};      // drive amplitude, units of hbar*omega0
    double drive_omega{1.0};   // drive frequency, units of omega0
    double cycles{10.0};       // protocol length in drive periods
    std::size_t steps{10000};  // time-grid size
    bool instantaneous_basis{false}; // allow tau off the (half-)cycle grid

    double splitting() const noexcept { return omega0; }
    double drive_amplitude() const noexcept { return lambda0 * omega0; }
    double drive_frequency() const noexcept { return drive_omega * omega0; }
    double emission_rate() const noexcept { return gamma_down * omega0; }
    double tau() const noexcept;
    double dt() const noexcept { return tau() / static_cast<double>(steps); }
    /// True when 2*cycles is an integer, i.e. lambda(tau) = 0.
    bool ends_on_node() const noexcept;
    bool resonant() const noexcept;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

/// lambda(t) = lambda0 sin(omega t)
struct DriveProtocol {
    double amplitude{0.0};
    double frequency{1.0};

    static DriveProtocol from(const SystemParams& p) noexcept {
        return {p.drive_amplitude(), p.drive_frequency()};
    }
    double value(double t) const noexcept;
    double rate(double t) const noexcept;
};

struct LadderOperators {
    ComplexMatrix a;       // |g><e|
    ComplexMatrix a_dag;   // |e><g|
};

LadderOperators ladder_operators();

/// a + a^dagger
ComplexMatrix sigma_x();

/// H_S(t) = hbar omega0 a^dagger a + lambda(t) (a + a^dagger)
ComplexMatrix system_hamiltonian(const SystemParams& p, double t);

/// P(t) = d/dt H_S(t) = lambdadot(t) (a + a^dagger)
ComplexMatrix power_operator(const SystemParams& p, double t);

struct TransitionRates {
    double down{0.0};
    double up{0.0};
};

/// Detailed balance: up = down * exp(-beta hbar omega0). Absolute rates.
TransitionRates transition_rates(const SystemParams& p);

/// Hermitian, unit-trace, positive semidefinite state.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}

    const ComplexMatrix& matrix() const noexcept { return m_; }
    std::size_t dim() const noexcept { return m_.dim(); }
    const Complex& operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }

    double trace_error() const noexcept;
    double hermiticity_error() const noexcept { return m_.hermiticity_error(); }
    double min_eigenvalue() const;

private:
    ComplexMatrix m_;
};

/// Smallest eigenvalue of a Hermitian 2x2 matrix, closed form.
double min_eigenvalue_2x2(const ComplexMatrix& m);

/// diag(p_g, p_e) with p_g = 1/(1 + exp(-beta hbar omega0)).
DensityMatrix thermal_state(const SystemParams& p);

/// p_g of the thermal state.
double ground_population(double beta);

} // namespace workmoments
