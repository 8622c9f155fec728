#include "workmoments/mcwf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "workmoments/errors.hpp"
#include "workmoments/parallel.hpp"

namespace workmoments {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kMaxStepProbability = 0.1;

/// Neumaier compensated sum.
struct CompensatedSum {
    double sum{0.0};
    double carry{0.0};

    void add(double x) noexcept {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    void add(const CompensatedSum& o) noexcept {
        add(o.sum);
        add(o.carry);
    }
    double value() const noexcept { return sum + carry; }
};

ComplexMatrix effective_generator(const SystemParams& p, const TransitionRates& rates, double t) {
    // -i H_eff with H_eff = H_S - (i/2)(Gd |e><e| + Gu |g><g|)
    ComplexMatrix a = system_hamiltonian(p, t);
    a(kExcited, kExcited) -= 0.5 * kI * rates.down;
    a(kGround, kGround) -= 0.5 * kI * rates.up;
    a *= -kI;
    return a;
}

/// exp of the fourth-order Magnus generator over [t, t + h].
ComplexMatrix magnus_step(const SystemParams& p, const TransitionRates& rates, double t, double h) {
    const double offset = std::sqrt(3.0) / 6.0;
    const ComplexMatrix a1 = effective_generator(p, rates, t + (0.5 - offset) * h);
    const ComplexMatrix a2 = effective_generator(p, rates, t + (0.5 + offset) * h);
    ComplexMatrix omega = (0.5 * h) * (a1 + a2);
    omega.add_scaled(std::sqrt(3.0) / 12.0 * h * h, commutator(a2, a1));
    return matrix_exponential(omega);
}

constexpr std::size_t kRenormalizeMask = 255;

/// m psi with plain real arithmetic (no Annex G complex multiply).
std::array<Complex, 2> step_state(const std::array<Complex, 4>& m, const std::array<Complex, 2>& psi) {
    const double gr = psi[0].real(), gi = psi[0].imag();
    const double er = psi[1].real(), ei = psi[1].imag();
    const double r0 = m[0].real() * gr - m[0].imag() * gi + m[1].real() * er - m[1].imag() * ei;
    const double i0 = m[0].real() * gi + m[0].imag() * gr + m[1].real() * ei + m[1].imag() * er;
    const double r1 = m[2].real() * gr - m[2].imag() * gi + m[3].real() * er - m[3].imag() * ei;
    const double i1 = m[2].real() * gi + m[2].imag() * gr + m[3].real() * ei + m[3].imag() * er;
    return {Complex(r0, i0), Complex(r1, i1)};
}

void normalize(std::array<Complex, 2>& psi) {
    const double inv = 1.0 / std::sqrt(std::norm(psi[0]) + std::norm(psi[1]));
    psi[0] *= inv;
    psi[1] *= inv;
}

std::array<Complex, 2> basis_state(Level level) {
    return level == Level::ground ? std::array<Complex, 2>{1.0, 0.0} : std::array<Complex, 2>{0.0, 1.0};
}

double level_energy(Level level) { return level == Level::excited ? 1.0 : 0.0; }

struct ChunkResult {
    std::map<double, std::uint64_t> counts;
    std::array<CompensatedSum, 3> sum_w;
    std::array<CompensatedSum, 3> sum_w_sq;
    std::array<CompensatedSum, 3> sum_state;
    std::array<CompensatedSum, 3> sum_state_sq;
    std::uint64_t excited{0};
    std::uint64_t emissions{0};
    std::uint64_t absorptions{0};
    std::vector<RecordSummary> records;
};

double standard_error(double sum, double sum_sq, std::uint64_t n) {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double nd = static_cast<double>(n);
    const double var = std::max(0.0, (sum_sq - sum * sum / nd) / (nd - 1.0));
    return std::sqrt(var / nd);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

std::uint32_t WorkRecord::emissions() const noexcept {
    return static_cast<std::uint32_t>(
        std::count_if(jumps.begin(), jumps.end(), [](const JumpEvent& j) { return j.kind == JumpKind::emission; }));
}

std::uint32_t WorkRecord::absorptions() const noexcept {
    return static_cast<std::uint32_t>(jumps.size()) - emissions();
}

Level sample_initial_level(const SystemParams& p, CounterRng& rng) {
    return rng.uniform() < ground_population(p.beta) ? Level::ground : Level::excited;
}

JumpSampler::JumpSampler(const SystemParams& p) : p_(p) {
    p_.validate();
    dt_ = p_.dt();
    const TransitionRates rates = transition_rates(p_);
    rate_down_dt_ = rates.down * dt_;
    rate_up_dt_ = rates.up * dt_;
    const double worst = std::max(rate_down_dt_, rate_up_dt_);
    if (worst > kMaxStepProbability) {
        throw StepSizeError("jump probability per step " + format_double(worst) +
                            " exceeds 0.1; increase steps");
    }

    no_jump_.resize(p_.steps);
    for (std::size_t k = 0; k < p_.steps; ++k) {
        const ComplexMatrix m = magnus_step(p_, rates, static_cast<double>(k) * dt_, dt_);
        no_jump_[k] = {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
    }

    if (!p_.ends_on_node()) {
        const Eigensystem eig = hermitian_eigensystem(system_hamiltonian(p_, p_.tau()));
        for (std::size_t k = 0; k < 2; ++k) {
            final_energies_[k] = eig.values[k] / p_.splitting();
            final_basis_[k] = {eig.vectors(0, k), eig.vectors(1, k)};
        }
    } else {
        final_basis_ = {basis_state(Level::ground), basis_state(Level::excited)};
    }
}

WorkRecord JumpSampler::run(CounterRng& rng) const {
    std::array<Complex, 2> unused;
    return run(rng, unused);
}

WorkRecord JumpSampler::run(CounterRng& rng, std::array<Complex, 2>& psi) const {
    WorkRecord rec;
    rec.initial_level = sample_initial_level(p_, rng);
    rec.initial_energy = level_energy(rec.initial_level);
    psi = basis_state(rec.initial_level);

    const bool jumps_possible = rate_down_dt_ > 0.0 || rate_up_dt_ > 0.0;
    // Jump when the running no-jump probability falls below `threshold`.
    double threshold = jumps_possible ? 1.0 - rng.uniform() : 0.0;
    double survival = 1.0;

    // psi is carried unnormalised between renormalisations.
    for (std::size_t k = 0; k < no_jump_.size(); ++k) {
        if (jumps_possible) {
            const double norm_g = std::norm(psi[0]);
            const double norm_e = std::norm(psi[1]);
            const double pop_e = norm_e / (norm_g + norm_e);
            const double p_down = rate_down_dt_ * pop_e;
            const double p_up = rate_up_dt_ * (1.0 - pop_e);
            const double q = p_down + p_up;
            const double next = survival * (1.0 - q);
            if (next < threshold) {
                const bool emission = rng.uniform() * q < p_down;
                rec.jumps.push_back({static_cast<double>(k + 1) * dt_,
                                     emission ? JumpKind::emission : JumpKind::absorption});
                psi = basis_state(emission ? Level::ground : Level::excited);
                threshold = 1.0 - rng.uniform();
                survival = 1.0;
                continue;
            }
            survival = next;
        }
        psi = step_state(no_jump_[k], psi);
        if ((k & kRenormalizeMask) == kRenormalizeMask) normalize(psi);
    }
    normalize(psi);

    const double prob_0 = std::norm(std::conj(final_basis_[0][0]) * psi[0] + std::conj(final_basis_[0][1]) * psi[1]);
    const std::size_t outcome = rng.uniform() < prob_0 ? 0 : 1;
    rec.final_level = outcome == 0 ? Level::ground : Level::excited;
    rec.final_energy = final_energies_[outcome];
    rec.work = rec.final_energy - rec.initial_energy + static_cast<double>(rec.emissions()) -
               static_cast<double>(rec.absorptions());
    return rec;
}

WorkRecord evolve_trajectory(const SystemParams& p, CounterRng& rng) {
    return JumpSampler(p).run(rng);
}

double histogram_moment(const std::map<double, std::uint64_t>& counts, int order) {
    double sum = 0.0;
    std::uint64_t n = 0;
    for (const auto& [w, c] : counts) {
        sum += std::pow(w, order) * static_cast<double>(c);
        n += c;
    }
    if (n == 0) throw DomainError("histogram_moment: empty histogram");
    return sum / static_cast<double>(n);
}

EnsembleResult run_ensemble(const SystemParams& p, std::uint64_t n_traj, std::uint64_t master_seed,
                            const EnsembleOptions& options) {
    if (n_traj == 0) throw DomainError("run_ensemble: n_traj must be >= 1");
    if (options.chunk_size == 0) throw DomainError("run_ensemble: chunk_size must be >= 1");
    const JumpSampler sampler(p);

    const std::uint64_t chunk = options.chunk_size;
    const std::size_t n_chunks = static_cast<std::size_t>((n_traj + chunk - 1) / chunk);
    std::vector<ChunkResult> partial(n_chunks);

    parallel_for(
        n_chunks,
        [&](std::size_t c) {
            ChunkResult& out = partial[c];
            const std::uint64_t begin = c * chunk;
            const std::uint64_t end = std::min<std::uint64_t>(n_traj, begin + chunk);
            if (options.keep_records) out.records.reserve(static_cast<std::size_t>(end - begin));
            std::array<Complex, 2> psi;
            for (std::uint64_t i = begin; i < end; ++i) {
                CounterRng rng(master_seed, i);
                const WorkRecord rec = sampler.run(rng, psi);
                ++out.counts[rec.work];
                double wk = 1.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    wk *= rec.work;
                    out.sum_w[k].add(wk);
                    out.sum_w_sq[k].add(wk * wk);
                }
                const Complex eg = psi[1] * std::conj(psi[0]);
                const std::array<double, 3> state{std::norm(psi[1]), eg.real(), eg.imag()};
                for (std::size_t k = 0; k < 3; ++k) {
                    out.sum_state[k].add(state[k]);
                    out.sum_state_sq[k].add(state[k] * state[k]);
                }
                const std::uint32_t em = rec.emissions();
                const std::uint32_t ab = rec.absorptions();
                out.emissions += em;
                out.absorptions += ab;
                if (rec.final_level == Level::excited) ++out.excited;
                if (options.keep_records)
                    out.records.push_back({rec.initial_level, rec.final_level, em, ab, rec.work});
            }
        },
        options.workers);

    // Merge in chunk order.
    ChunkResult total;
    EnsembleResult result;
    if (options.keep_records) result.records.reserve(static_cast<std::size_t>(n_traj));
    for (auto& part : partial) {
        for (const auto& [w, c] : part.counts) total.counts[w] += c;
        for (std::size_t k = 0; k < 3; ++k) {
            total.sum_w[k].add(part.sum_w[k]);
            total.sum_w_sq[k].add(part.sum_w_sq[k]);
            total.sum_state[k].add(part.sum_state[k]);
            total.sum_state_sq[k].add(part.sum_state_sq[k]);
        }
        total.excited += part.excited;
        total.emissions += part.emissions;
        total.absorptions += part.absorptions;
        if (options.keep_records)
            result.records.insert(result.records.end(), part.records.begin(), part.records.end());
    }

    WorkStatistics& st = result.stats;
    const double nd = static_cast<double>(n_traj);
    st.n_traj = n_traj;
    for (std::size_t k = 0; k < 3; ++k) {
        st.moments[k] = total.sum_w[k].value() / nd;
        st.stderr_[k] = standard_error(total.sum_w[k].value(), total.sum_w_sq[k].value(), n_traj);
        st.state_mean[k] = total.sum_state[k].value() / nd;
        st.state_stderr[k] = standard_error(total.sum_state[k].value(), total.sum_state_sq[k].value(), n_traj);
    }
    st.counts = std::move(total.counts);
    for (const auto& [w, c] : st.counts) st.histogram[w] = static_cast<double>(c) / nd;
    st.excited_fraction = static_cast<double>(total.excited) / nd;
    st.total_emissions = total.emissions;
    st.total_absorptions = total.absorptions;
    return result;
}

void write_records(std::ostream& os, const std::vector<RecordSummary>& records) {
    auto level = [](Level l) { return l == Level::ground ? 'g' : 'e'; };
    os << "initial_level,final_level,n_emission,n_absorption,work_over_hw0\n";
    for (const auto& r : records) {
        os << level(r.initial_level) << ',' << level(r.final_level) << ',' << r.emissions << ','
           << r.absorptions << ',' << format_double(r.work) << '\n';
    }
}

} // namespace workmoments
