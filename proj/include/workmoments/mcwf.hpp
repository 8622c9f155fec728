// mcwf.hpp: quantum-jump trajectories and work statistics under the
// two-point measurement protocol

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "workmoments/densemath.hpp"
#include "workmoments/model.hpp"
#include "workmoments/rng.hpp"

namespace workmoments {

enum class Level : std::uint8_t { ground = 0, excited = 1 };
enum class JumpKind : std::uint8_t { emission, absorption };

struct JumpEvent {
    double time{0.0};
    JumpKind kind{JumpKind::emission};
};

/// One trajectory. Energies in units of hbar omega0.
struct WorkRecord {
    Level initial_level{Level::ground};
    Level final_level{Level::ground};
    std::vector<JumpEvent> jumps;  // strictly increasing times in (0, tau]
    double initial_energy{0.0};
    double final_energy{0.0};
    double work{0.0};              // final - initial + emissions - absorptions

    std::uint32_t emissions() const noexcept;
    std::uint32_t absorptions() const noexcept;
};

/// g with probability 1/(1 + exp(-beta hbar omega0)).
Level sample_initial_level(const SystemParams& p, CounterRng& rng);

/// Precomputed no-jump propagators for one parameter set, shared read-only by
/// all trajectories. Each grid step either performs one jump (emission with
/// probability Gd |psi_e|^2 dt, absorption with Gu |psi_g|^2 dt) or applies
/// the normalised no-jump propagator exp(-i H_eff dt) (fourth-order Magnus).
/// The jump step is located by inverting the discrete survival function,
/// which draws from the same law as one Bernoulli trial per step.
class JumpSampler {
public:
    /// Throws StepSizeError if max(Gd, Gu) dt > 0.1, ConfigError on invalid p.
    explicit JumpSampler(const SystemParams& p);

    WorkRecord run(CounterRng& rng) const;
    /// Same trajectory; also reports the normalised state just before the
    /// final measurement.
    WorkRecord run(CounterRng& rng, std::array<Complex, 2>& final_state) const;

    const SystemParams& params() const noexcept { return p_; }

private:
    SystemParams p_;
    double dt_{0.0};
    double rate_down_dt_{0.0};
    double rate_up_dt_{0.0};
    std::vector<std::array<Complex, 4>> no_jump_;  // row-major 2x2 per step
    std::array<double, 2> final_energies_{0.0, 1.0};
    std::array<std::array<Complex, 2>, 2> final_basis_{};  // final_basis_[k] = eigenvector k
};

/// Builds a JumpSampler and runs one trajectory.
WorkRecord evolve_trajectory(const SystemParams& p, CounterRng& rng);

/// Ensemble statistics. Moments in units of (hbar omega0)^n.
struct WorkStatistics {
    std::uint64_t n_traj{0};
    std::array<double, 3> moments{};
    std::array<double, 3> stderr_{};     // NaN when n_traj == 1
    std::map<double, std::uint64_t> counts;  // work value -> trajectories
    std::map<double, double> histogram;      // work value -> probability

    // Ensemble mean of |psi><psi| just before the final measurement, with
    // standard errors: rho_ee, Re rho_eg, Im rho_eg.
    std::array<double, 3> state_mean{};
    std::array<double, 3> state_stderr{};
    double excited_fraction{0.0};  // measured final level e

    std::uint64_t total_emissions{0};
    std::uint64_t total_absorptions{0};
};

/// Compact per-trajectory output for the raw dump.
struct RecordSummary {
    Level initial_level{Level::ground};
    Level final_level{Level::ground};
    std::uint32_t emissions{0};
    std::uint32_t absorptions{0};
    double work{0.0};
};

struct EnsembleOptions {
    std::size_t workers{0};        // 0: worker_count()
    std::size_t chunk_size{4096};  // fixed partition; results never depend on workers
    bool keep_records{false};
};

struct EnsembleResult {
    WorkStatistics stats;
    std::vector<RecordSummary> records;  // trajectory order, when kept
};

/// Trajectory i draws from CounterRng(master_seed, i).
EnsembleResult run_ensemble(const SystemParams& p, std::uint64_t n_traj, std::uint64_t master_seed,
                            const EnsembleOptions& options = {});

/// sum_w w^order count(w) / sum_w count(w). Equals the streamed ensemble
/// moment bit for bit when every work value is an integer.
double histogram_moment(const std::map<double, std::uint64_t>& counts, int order);

/// `initial_level,final_level,n_emission,n_absorption,work_over_hw0` with a
/// header line.
void write_records(std::ostream& os, const std::vector<RecordSummary>& records);

} // namespace workmoments
