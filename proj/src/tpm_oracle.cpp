#include "workmoments/tpm_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>

#include "workmoments/errors.hpp"
#include "workmoments/parallel.hpp"

namespace workmoments {

namespace {

constexpr Complex kI{0.0, 1.0};

ComplexMatrix mode_annihilation(std::size_t n_max) {
    ComplexMatrix b(n_max + 1);
    for (std::size_t n = 1; n <= n_max; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
    return b;
}

std::size_t ipow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
}

/// op acting on mode k, identity elsewhere (bath factor only).
ComplexMatrix embed_mode(const TotalSystemModel& m, std::size_t k, const ComplexMatrix& op) {
    const std::size_t d = m.n_max + 1;
    ComplexMatrix out = ComplexMatrix::identity(ipow(d, k));
    out = kron(out, op);
    return kron(out, ComplexMatrix::identity(ipow(d, m.n_modes() - k - 1)));
}

std::size_t bath_dimension(const TotalSystemModel& m) { return ipow(m.n_max + 1, m.n_modes()); }

ComplexMatrix bath_hamiltonian(const TotalSystemModel& m) {
    const ComplexMatrix b = mode_annihilation(m.n_max);
    const ComplexMatrix number = b.adjoint() * b;
    ComplexMatrix hb(bath_dimension(m));
    for (std::size_t k = 0; k < m.n_modes(); ++k)
        hb.add_scaled(m.mode_freqs[k] * m.system.splitting(), embed_mode(m, k, number));
    return hb;
}

ComplexMatrix coupling_hamiltonian(const TotalSystemModel& m) {
    const auto [a, a_dag] = ladder_operators();
    const ComplexMatrix b = mode_annihilation(m.n_max);
    const ComplexMatrix b_dag = b.adjoint();
    const double scale = m.system.splitting();
    ComplexMatrix hc(m.dimension());
    for (std::size_t k = 0; k < m.n_modes(); ++k) {
        const Complex g = m.couplings[k] * scale;
        const ComplexMatrix raise = embed_mode(m, k, b_dag);
        const ComplexMatrix lower = embed_mode(m, k, b);
        if (m.coupling == CouplingForm::full) {
            hc += kron(a + a_dag, g * raise + std::conj(g) * lower);
        } else {
            hc += kron(a, g * raise);
            hc += kron(a_dag, std::conj(g) * lower);
        }
    }
    return hc;
}

ComplexMatrix lift_system(const TotalSystemModel& m, const ComplexMatrix& s) {
    return kron(s, ComplexMatrix::identity(bath_dimension(m)));
}

ComplexMatrix measurement_hamiltonian(const TotalSystemModel& m, double t) {
    if (m.basis == MeasurementBasis::total) return build_total_hamiltonian(m, t);
    return lift_system(m, system_hamiltonian(m.system, t)) +
           kron(ComplexMatrix::identity(2), bath_hamiltonian(m));
}

/// Modified Gram-Schmidt on the columns.
void restore_unitarity(ComplexMatrix& u) {
    const std::size_t n = u.dim();
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            Complex dot{};
            for (std::size_t r = 0; r < n; ++r) dot += std::conj(u(r, prev)) * u(r, c);
            for (std::size_t r = 0; r < n; ++r) u(r, c) -= dot * u(r, prev);
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < n; ++r) norm += std::norm(u(r, c));
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < n; ++r) u(r, c) /= norm;
    }
}

double unitarity_error(const ComplexMatrix& u) {
    return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.dim()));
}

/// Block-diagonal part of rho in the cluster decomposition of `spectrum`.
ComplexMatrix dephase(const ComplexMatrix& rho, const MeasurementSpectrum& spectrum) {
    const ComplexMatrix& v = spectrum.eig.vectors;
    const ComplexMatrix r = v.adjoint() * rho * v;
    ComplexMatrix kept(rho.dim());
    for (const auto& cl : spectrum.clusters)
        for (std::size_t a : cl.members)
            for (std::size_t b : cl.members) kept(a, b) = r(a, b);
    return v * kept * v.adjoint();
}

char* format12(char (&buf)[64], double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

std::size_t TotalSystemModel::dimension() const noexcept {
    return 2 * ipow(n_max + 1, n_modes());
}

void TotalSystemModel::validate() const {
    system.validate();
    if (mode_freqs.empty() || mode_freqs.size() > 3) throw ConfigError("oracle_modes", "must be 1..3");
    if (couplings.size() != mode_freqs.size())
        throw ConfigError("oracle_couplings", "need one coupling per mode");
    if (n_max < 1) throw ConfigError("oracle_n_max", "must be >= 1");
    for (double w : mode_freqs)
        if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("oracle_mode_freqs", "must be finite and > 0");
    for (const Complex& g : couplings)
        if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
            throw ConfigError("oracle_couplings", "must be finite");
    // Overflow-safe cap check.
    std::size_t dim = 2;
    for (std::size_t k = 0; k < n_modes(); ++k) {
        if (dim > kMaxDimension / (n_max + 1)) throw ConfigError("oracle_n_max", "total dimension exceeds 4096");
        dim *= n_max + 1;
    }
}

ComplexMatrix build_total_hamiltonian(const TotalSystemModel& m, double t) {
    m.validate();
    ComplexMatrix h = lift_system(m, system_hamiltonian(m.system, t));
    h += kron(ComplexMatrix::identity(2), bath_hamiltonian(m));
    h += coupling_hamiltonian(m);
    return h;
}

ComplexMatrix total_power_operator(const TotalSystemModel& m, double t) {
    return lift_system(m, power_operator(m.system, t));
}

ComplexMatrix bare_hamiltonian(const TotalSystemModel& m) {
    return lift_system(m, system_hamiltonian(m.system, 0.0)) + kron(ComplexMatrix::identity(2), bath_hamiltonian(m));
}

ComplexMatrix product_thermal_state(const TotalSystemModel& m) {
    ComplexMatrix rho = thermal_state(m.system).matrix();
    for (std::size_t k = 0; k < m.n_modes(); ++k) {
        std::vector<double> weights(m.n_max + 1);
        double z = 0.0;
        for (std::size_t n = 0; n <= m.n_max; ++n) {
            weights[n] = std::exp(-m.system.beta * m.mode_freqs[k] * static_cast<double>(n));
            z += weights[n];
        }
        for (double& w : weights) w /= z;
        rho = kron(rho, ComplexMatrix::diagonal(std::span<const double>(weights)));
    }
    return rho;
}

ComplexMatrix time_ordered_propagator(const std::function<ComplexMatrix(double)>& hamiltonian, double tau,
                                      std::size_t steps) {
    if (steps == 0) throw DomainError("time_ordered_propagator: steps must be >= 1");
    const double h = tau / static_cast<double>(steps);
    const double offset = std::sqrt(3.0) / 6.0;
    ComplexMatrix u;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const ComplexMatrix a1 = -kI * hamiltonian(t + (0.5 - offset) * h);
        const ComplexMatrix a2 = -kI * hamiltonian(t + (0.5 + offset) * h);
        ComplexMatrix omega = (0.5 * h) * (a1 + a2);
        omega.add_scaled(std::sqrt(3.0) / 12.0 * h * h, commutator(a2, a1));
        ComplexMatrix step = matrix_exponential(omega);
        u = k == 0 ? std::move(step) : step * u;
    }
    return u;
}

MeasurementSpectrum measurement_spectrum(const ComplexMatrix& h, double omega0, double tolerance) {
    MeasurementSpectrum spectrum{hermitian_eigensystem(h), {}};
    const auto& vals = spectrum.eig.values;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double e = vals[i] / omega0;
        if (spectrum.clusters.empty() || e - spectrum.clusters.back().energy > tolerance) {
            spectrum.clusters.push_back({e, {i}});
        } else {
            spectrum.clusters.back().members.push_back(i);
        }
    }
    // Report each cluster at its mean energy.
    for (auto& cl : spectrum.clusters) {
        double sum = 0.0;
        for (std::size_t i : cl.members) sum += vals[i] / omega0;
        cl.energy = sum / static_cast<double>(cl.members.size());
    }
    return spectrum;
}

TwoPointMeasurement::TwoPointMeasurement(TotalSystemModel m, std::size_t steps) : m_(std::move(m)), steps_(steps) {
    m_.validate();
    if (steps_ == 0) throw DomainError("TwoPointMeasurement: steps must be >= 1");
    const double tau = m_.system.tau();
    const double w = m_.system.splitting();
    const ComplexMatrix hc = coupling_hamiltonian(m_);
    const ComplexMatrix fixed = kron(ComplexMatrix::identity(2), bath_hamiltonian(m_)) + hc;
    u_ = time_ordered_propagator(
        [&](double t) { return lift_system(m_, system_hamiltonian(m_.system, t)) + fixed; }, tau, steps_);
    unitarity_residual_ = unitarity_error(u_);
    restore_unitarity(u_);

    initial_ = measurement_spectrum(measurement_hamiltonian(m_, 0.0), w);
    final_ = measurement_spectrum(measurement_hamiltonian(m_, tau), w);
    rho_bar_ = dephase(product_thermal_state(m_), initial_);
}

TPMDistribution TwoPointMeasurement::distribution() const {
    TPMDistribution d;
    d.initial_clusters = initial_.clusters;
    d.final_clusters = final_.clusters;
    d.unitarity_residual = unitarity_residual_;

    const ComplexMatrix& v0 = initial_.eig.vectors;
    const ComplexMatrix& vt = final_.eig.vectors;
    const ComplexMatrix w = vt.adjoint() * u_ * v0;
    const ComplexMatrix r = v0.adjoint() * rho_bar_ * v0;

    for (const auto& ci : initial_.clusters) {
        for (const auto& cj : final_.clusters) {
            double p = 0.0;
            for (std::size_t b : cj.members) {
                Complex acc{};
                for (std::size_t a : ci.members)
                    for (std::size_t a2 : ci.members) acc += w(b, a) * r(a, a2) * std::conj(w(b, a2));
                p += acc.real();
            }
            d.entries.push_back({ci.energy, cj.energy, std::max(0.0, p)});
        }
    }
    return d;
}

Complex TwoPointMeasurement::generating_function(double u) const {
    const double x = u / m_.system.splitting();
    auto u_v = [&](double v) {
        return spectral_exponential(final_.eig, kI * v) * u_ * spectral_exponential(initial_.eig, -kI * v);
    };
    const ComplexMatrix plus = u_v(0.5 * x);
    const ComplexMatrix minus = u_v(-0.5 * x);
    return trace_product(plus * rho_bar_, minus.adjoint());
}

Complex TwoPointMeasurement::generating_function_commuting(double u) const {
    const double x = u / m_.system.splitting();
    const double tau = m_.system.tau();
    const ComplexMatrix hc = coupling_hamiltonian(m_);
    const ComplexMatrix fixed = kron(ComplexMatrix::identity(2), bath_hamiltonian(m_)) + hc;
    auto shifted = [&](double sign) {
        return [&, sign](double t) {
            ComplexMatrix h = lift_system(m_, system_hamiltonian(m_.system, t)) + fixed;
            h.add_scaled(sign * 0.5 * x, total_power_operator(m_, t));
            return h;
        };
    };
    const ComplexMatrix u_minus = time_ordered_propagator(shifted(-1.0), tau, steps_);
    const ComplexMatrix u_plus = time_ordered_propagator(shifted(+1.0), tau, steps_);
    return trace_product(u_minus * rho_bar_, u_plus.adjoint());
}

TwoPointMeasurement::CorrectionTerms TwoPointMeasurement::correction_terms() const {
    const ComplexMatrix hc = coupling_hamiltonian(m_);
    const ComplexMatrix fixed = kron(ComplexMatrix::identity(2), bath_hamiltonian(m_)) + hc;
    const TotalSystemModel& m = m_;
    auto hamiltonian = [m, fixed](double t) { return lift_system(m, system_hamiltonian(m.system, t)) + fixed; };

    RegressionProblem pb;
    pb.generator = [hamiltonian](double t, const ComplexMatrix& x) {
        ComplexMatrix out = commutator(hamiltonian(t), x);
        out *= -kI;
        return out;
    };
    pb.drivers = [m, hamiltonian](double t) {
        const ComplexMatrix h = hamiltonian(t);
        ComplexMatrix c1 = total_power_operator(m, t);
        ComplexMatrix c2 = commutator(h, c1);
        ComplexMatrix c3 = commutator(h, c2);
        return CorrelationDrivers{std::move(c1), std::move(c2), std::move(c3)};
    };
    pb.rho0 = rho_bar_;
    pb.duration = m_.system.tau();
    pb.steps = steps_;
    pb.check_positivity = false;
    pb.keep_states = false;
    const MomentsIntegrands in = coevolve(pb);
    const double w3 = std::pow(m_.system.splitting(), 3);
    return {in.C3_system / w3, in.W3_cross / w3};
}

TPMDistribution tpm_distribution(const TotalSystemModel& m, std::size_t steps) {
    return TwoPointMeasurement(m, steps).distribution();
}

Complex generating_function_exact(const TotalSystemModel& m, double u, std::size_t steps) {
    return TwoPointMeasurement(m, steps).generating_function(u);
}

Complex generating_function_commuting(const TotalSystemModel& m, double u, std::size_t steps) {
    return TwoPointMeasurement(m, steps).generating_function_commuting(u);
}

double moments_from_distribution(const TPMDistribution& d, int n) {
    if (n < 1 || n > 4) throw DomainError("moments_from_distribution: order must be 1..4");
    double sum = 0.0;
    for (const auto& e : d.entries) sum += std::pow(e.Etau - e.E0, n) * e.p;
    return sum;
}

double exponential_work_average(const TPMDistribution& d, double beta) {
    double sum = 0.0;
    for (const auto& e : d.entries) sum += std::exp(-beta * (e.Etau - e.E0)) * e.p;
    return sum;
}

FiniteDifferenceMoment moments_by_finite_difference(const std::function<Complex(double)>& g, int n, double h) {
    if (n < 1 || n > 3) throw DomainError("moments_by_finite_difference: order must be 1..3");
    if (!(h >= 1e-4 && h <= 1e-1)) throw DomainError("moments_by_finite_difference: h must lie in [1e-4, 1e-1]");

    const std::array<double, 3> steps{h, 0.5 * h, 0.25 * h};
    // Sample offsets (in units of the step): n = 1, 2 use {-1, 0, 1}, n = 3 uses {-2, -1, 1, 2}.
    const std::vector<int> offsets = n == 3 ? std::vector<int>{-2, -1, 1, 2} : std::vector<int>{-1, 0, 1};
    std::vector<double> points;
    for (double s : steps)
        for (int o : offsets) points.push_back(o * s);
    std::vector<Complex> values(points.size());
    parallel_for(points.size(), [&](std::size_t i) { values[i] = g(points[i]); });

    std::array<Complex, 3> diff{};
    for (std::size_t lvl = 0; lvl < 3; ++lvl) {
        const Complex* v = &values[lvl * offsets.size()];
        const double s = steps[lvl];
        switch (n) {
        case 1: diff[lvl] = (v[2] - v[0]) / (2.0 * s); break;
        case 2: diff[lvl] = (v[2] - 2.0 * v[1] + v[0]) / (s * s); break;
        default: diff[lvl] = (v[3] - 2.0 * v[2] + 2.0 * v[1] - v[0]) / (2.0 * s * s * s); break;
        }
    }
    const Complex r1_coarse = (4.0 * diff[1] - diff[0]) / 3.0;
    const Complex r1_fine = (4.0 * diff[2] - diff[1]) / 3.0;
    const Complex r2 = (16.0 * r1_fine - r1_coarse) / 15.0;

    Complex phase = 1.0;
    for (int k = 0; k < n; ++k) phase *= -kI;
    const Complex moment = phase * r2;
    FiniteDifferenceMoment out;
    out.value = moment.real();
    out.imaginary_residue = std::abs(moment.imag());
    out.richardson_gap = std::abs(r2 - r1_fine);
    if (out.richardson_gap > 1e-4 * std::max(1.0, std::abs(r2))) {
        throw StepSizeError("moments_by_finite_difference: Richardson levels disagree by " +
                            std::to_string(out.richardson_gap) + " at order " + std::to_string(n));
    }
    return out;
}

std::function<Complex(double)> memoize(std::function<Complex(double)> g) {
    struct Cache {
        std::function<Complex(double)> g;
        std::mutex mutex;
        std::map<double, Complex> values;
    };
    auto cache = std::make_shared<Cache>();
    cache->g = std::move(g);
    return [cache](double u) {
        {
            std::lock_guard lock(cache->mutex);
            if (auto it = cache->values.find(u); it != cache->values.end()) return it->second;
        }
        const Complex v = cache->g(u);
        std::lock_guard lock(cache->mutex);
        cache->values.emplace(u, v);
        return v;
    };
}

void write_distribution(std::ostream& os, const TPMDistribution& d) {
    char a[64], b[64], c[64];
    for (const auto& e : d.entries) os << format12(a, e.E0) << ' ' << format12(b, e.Etau) << ' ' << format12(c, e.p) << '\n';
}

} // namespace workmoments
