// lindblad.hpp: reduced master equation, fixed-step propagation and
// single-pass regression-theorem correlation chains

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "workmoments/densemath.hpp"
#include "workmoments/model.hpp"

namespace workmoments {

/// L_t[x] = -i[H_S(t), x] + Gd (x_ee |g><g| - {x,|e><e|}/2) + Gu (x_gg |e><e| - {x,|g><g|}/2)
/// x must be 2x2; it need not be Hermitian.
ComplexMatrix lindblad_apply(const SystemParams& p, double t, const ComplexMatrix& x);

/// Dissipative part only (shared by the lab-frame and rotating-frame generators).
ComplexMatrix dissipator_apply(const TransitionRates& rates, const ComplexMatrix& x);

/// Classical RK4 of d rho/dt = L_t[rho] from t0 to t1 in `substeps` equal steps,
/// re-symmetrizing rho after every step. Throws NumericError naming the step
/// index if an eigenvalue drops below -1e-6.
DensityMatrix propagate_state(const SystemParams& p, const DensityMatrix& rho0, double t0, double t1,
                              std::size_t substeps);

/// Operators entering the work-moment correlators at one instant.
struct CorrelationDrivers {
    ComplexMatrix power;              // C1 = P(t)
    ComplexMatrix commutator;         // C2 = [H(t), P(t)]
    ComplexMatrix double_commutator;  // C3 = [H(t), [H(t), P(t)]]
};

/// Any linear generator plus its drivers. The same engine serves the lab-frame
/// master equation, its rotating-frame RWA counterpart and the unitary
/// evolution of the oracle's composite system.
struct RegressionProblem {
    std::function<ComplexMatrix(double, const ComplexMatrix&)> generator;
    std::function<CorrelationDrivers(double)> drivers;
    ComplexMatrix rho0;
    double duration{0.0};
    std::size_t steps{0};
    bool check_positivity{true};
    bool keep_states{true};
};

/// Running values of the integrals at one grid point.
struct CumulativeMoments {
    double W1{0.0};
    double W2{0.0};
    double W3_0{0.0};
    double W3_cross{0.0};
    double C3_system{0.0};
};

struct EngineDiagnostics {
    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};  // before each re-symmetrization
    double min_eigenvalue{1.0};
    double max_chain_asymmetry{0.0};    // max |A2 - A1^dagger|
};

/// Result of one forward co-evolution pass.
struct MomentsIntegrands {
    double W1{0.0};         // int Tr{P rho}
    double W2{0.0};         // 2 int int Re<P(t1) P(t2)>
    double W3_0{0.0};       // 3 int int int Re{<P1 P2 P3> + <P3 P1 P2>}
    double W3_cross{0.0};   // 3/2 int int Re<C1(t1) C2(t2)>
    double C3_system{0.0};  // 1/4 int Tr{C3 rho}
    std::vector<double> times;
    std::vector<ComplexMatrix> rho;              // empty unless keep_states
    std::vector<CumulativeMoments> cumulative;   // one entry per grid point
    EngineDiagnostics diagnostics;
};

/// One forward RK4 pass co-evolving rho with the regression chains
///   A1' = L[A1] + P rho,   A2' = L[A2] + rho P,
///   B1' = L[B1] + P A1,    B2' = L[B2] + P A2,
///   D'  = L[D]  + C2 rho,
/// and the moment integrals as extra ODE components.
MomentsIntegrands coevolve(const RegressionProblem& problem);

/// The lab-frame problem for the reduced two-level model.
RegressionProblem reduced_problem(const SystemParams& p);

/// coevolve(reduced_problem(p)) after validating p.
MomentsIntegrands coevolve_correlations(const SystemParams& p);

/// Explicit nested-loop evaluation of the same integrals on a coarse grid of
/// `intervals` panels (O(N^2) matrix work), with interval propagators built
/// from `substeps` RK4 sub-steps and sixth-order cumulative quadrature.
/// Kept to cross-check the single-pass chains.
struct RegressionReference {
    double W1{0.0};
    double W2{0.0};
    double W3_0{0.0};
    double W3_cross{0.0};
    double C3_system{0.0};
};

RegressionReference nested_regression_reference(const SystemParams& p, std::size_t intervals,
                                                 std::size_t substeps = 64);

/// Cumulative quadrature weights on a uniform grid of spacing h: row i
/// integrates samples over [t_0, t_i], panel by panel, with the interpolating
/// polynomial through `stencil` neighbouring nodes. Rows with fewer than
/// `stencil` nodes up to t_i extend past t_i, so row i has
/// max(i + 1, stencil) entries (capped by the grid).
std::vector<std::vector<double>> cumulative_weights(std::size_t intervals, double h, std::size_t stencil);

} // namespace workmoments
