// tpm_oracle.hpp: brute-force two-point measurement statistics of the
// two-level system coupled to a few truncated bosonic modes

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "workmoments/densemath.hpp"
#include "workmoments/lindblad.hpp"
#include "workmoments/model.hpp"

namespace workmoments {

enum class CouplingForm {
    full,  // (a + a^dag) (x) sum_k (g_k b_k^dag + g_k^* b_k)
    rwa,   // sum_k (g_k a (x) b_k^dag + g_k^* a^dag (x) b_k)
};

enum class MeasurementBasis {
    total,  // eigenbasis of the full H(0) and H(tau)
    bare,   // eigenbasis of H_0 + H_B (coupling left out of the measurement)
};

/// Composite Hilbert space: system index major, then mode 1, mode 2, ...
struct TotalSystemModel {
    SystemParams system;
    std::size_t n_max{3};                     // occupations 0..n_max per mode
    std::vector<double> mode_freqs{1.0};      // units of omega0
    std::vector<Complex> couplings{0.02};     // units of hbar omega0
    CouplingForm coupling{CouplingForm::full};
    MeasurementBasis basis{MeasurementBasis::total};

    std::size_t n_modes() const noexcept { return mode_freqs.size(); }
    std::size_t dimension() const noexcept;
    /// ConfigError naming the offending oracle_* key.
    void validate() const;
};

/// H_S(t) (x) 1 + 1 (x) H_B + H_C.
ComplexMatrix build_total_hamiltonian(const TotalSystemModel& m, double t);

/// dH/dt = P(t) (x) 1.
ComplexMatrix total_power_operator(const TotalSystemModel& m, double t);

/// H_0 + H_B, the coupling-free Hamiltonian.
ComplexMatrix bare_hamiltonian(const TotalSystemModel& m);

/// Thermal system state times truncated thermal mode states at the same beta.
ComplexMatrix product_thermal_state(const TotalSystemModel& m);

/// Fourth-order Magnus stepping of dU/dt = -i H(t) U over [0, tau] in
/// `steps` steps. Every propagator in this module goes through it.
ComplexMatrix time_ordered_propagator(const std::function<ComplexMatrix(double)>& hamiltonian, double tau,
                                      std::size_t steps);

/// Measurement outcomes grouped into degenerate clusters.
struct EnergyCluster {
    double energy{0.0};                 // units of hbar omega0
    std::vector<std::size_t> members;   // eigenvector columns
};

struct MeasurementSpectrum {
    Eigensystem eig;
    std::vector<EnergyCluster> clusters;
};

/// Eigenvalues closer than `tolerance` (units of hbar omega0) are grouped.
MeasurementSpectrum measurement_spectrum(const ComplexMatrix& h, double omega0, double tolerance = 1e-9);

struct TpmEntry {
    double E0{0.0};    // units of hbar omega0
    double Etau{0.0};
    double p{0.0};
};

struct TPMDistribution {
    std::vector<TpmEntry> entries;
    std::vector<EnergyCluster> initial_clusters;
    std::vector<EnergyCluster> final_clusters;
    double unitarity_residual{0.0};  // max |U^dag U - 1| before restoration
};

/// Precomputed propagator, measurement bases and dephased initial state for
/// one model. All generating functions and distributions derive from it.
class TwoPointMeasurement {
public:
    TwoPointMeasurement(TotalSystemModel m, std::size_t steps);

    TPMDistribution distribution() const;

    /// Tr{U_{u/2} rho0_bar U_{-u/2}^dag} with U_v = e^{i v H(tau)} U e^{-i v H(0)};
    /// u in units of 1/(hbar omega0).
    Complex generating_function(double u) const;

    /// Tr{U_- rho0_bar U_+^dag} where U_-/+ evolve with H(t) -/+ (u/2) dH/dt.
    Complex generating_function_commuting(double u) const;

    /// Moment-correction integrals (1/4) int <C3> and (3/2) int int Re<C1 C2>
    /// of the total Hamiltonian, in units of (hbar omega0)^3. Their sum is the
    /// predicted third-moment gap m3(G) - m3(G0).
    struct CorrectionTerms {
        double c3_term{0.0};
        double cross_term{0.0};
        double total() const noexcept { return c3_term + cross_term; }
    };
    CorrectionTerms correction_terms() const;

    const TotalSystemModel& model() const noexcept { return m_; }
    const ComplexMatrix& propagator() const noexcept { return u_; }
    const ComplexMatrix& initial_state() const noexcept { return rho_bar_; }
    double unitarity_residual() const noexcept { return unitarity_residual_; }

private:
    TotalSystemModel m_;
    std::size_t steps_;
    ComplexMatrix u_;
    ComplexMatrix rho_bar_;
    MeasurementSpectrum initial_;
    MeasurementSpectrum final_;
    double unitarity_residual_{0.0};
};

TPMDistribution tpm_distribution(const TotalSystemModel& m, std::size_t steps);
Complex generating_function_exact(const TotalSystemModel& m, double u, std::size_t steps);
Complex generating_function_commuting(const TotalSystemModel& m, double u, std::size_t steps);

/// sum (Etau - E0)^n p, n in 1..4.
double moments_from_distribution(const TPMDistribution& d, int n);

/// sum exp(-beta (Etau - E0)) p, beta in units of 1/(hbar omega0).
double exponential_work_average(const TPMDistribution& d, double beta);

struct FiniteDifferenceMoment {
    double value{0.0};
    double imaginary_residue{0.0};
    double richardson_gap{0.0};  // |finest extrapolant - previous level|
};

/// (-i)^n d^n G/du^n at u = 0 by central differences at h, h/2, h/4 with
/// two Richardson levels. DomainError unless h in [1e-4, 1e-1]; StepSizeError
/// if the last two extrapolants differ by more than 1e-4 relative (floor 1).
FiniteDifferenceMoment moments_by_finite_difference(const std::function<Complex(double)>& g, int n, double h);

/// Thread-safe cache in front of an expensive generating function, so the
/// finite-difference stencils of several orders share evaluations.
std::function<Complex(double)> memoize(std::function<Complex(double)> g);

/// One line per entry: `E0 Etau p`, 12 significant digits.
void write_distribution(std::ostream& os, const TPMDistribution& d);

} // namespace workmoments
