#include "doctest.h"

#include <cmath>
#include <map>
#include <sstream>

#include "support/oracles.hpp"
#include "workmoments/errors.hpp"
#include "workmoments/moments.hpp"
#include "workmoments/tpm_oracle.hpp"

using namespace workmoments;
using namespace testing_oracles;

namespace {

constexpr std::size_t kSteps = 4000;

TotalSystemModel model_with(double g) {
    TotalSystemModel m;
    m.couplings = {Complex(g, 0.0)};
    return m;
}

/// Work marginal of a distribution, keyed by the rounded work value.
std::map<long, double> work_marginal(const TPMDistribution& d) {
    std::map<long, double> out;
    for (const auto& e : d.entries) out[std::lround(e.Etau - e.E0)] += e.p;
    return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("build_total_hamiltonian: uncoupled spectrum is the sum of ladders") {
    auto m = model_with(0.0);
    const auto eig = hermitian_eigensystem(build_total_hamiltonian(m, 0.0));
    const std::vector<double> expected{0, 1, 1, 2, 2, 3, 3, 4};
    REQUIRE(eig.values.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(eig.values[i] - expected[i]) <= 1e-12);
}

TEST_CASE("build_total_hamiltonian: H and dH/dt do not commute under drive") {
    for (double g : {0.0, 0.02}) {
        auto m = model_with(g);
        const double t = 0.37;
        const auto c = commutator(build_total_hamiltonian(m, t), total_power_operator(m, t));
        CHECK(c.max_abs() > 1e-3);
    }
}

TEST_CASE("build_total_hamiltonian: rotating-wave coupling gives the Jaynes-Cummings block") {
    TotalSystemModel m;
    m.system.lambda0 = 0.0;
    m.couplings = {Complex(0.02, 0.01)};
    m.coupling = CouplingForm::rwa;
    const auto h = build_total_hamiltonian(m, 0.0);
    const std::size_t g1 = 0 * 4 + 1;  // |g> (x) |1>
    const std::size_t e0 = 1 * 4 + 0;  // |e> (x) |0>
    CHECK(h(g1, g1).real() == doctest::Approx(1.0));
    CHECK(h(e0, e0).real() == doctest::Approx(1.0));
    CHECK(std::abs(h(g1, e0)) == doctest::Approx(std::abs(Complex(0.02, 0.01))));
    CHECK(std::abs(h(g1, e0) - std::conj(h(e0, g1))) == 0.0);
    // Nothing else couples into the sector.
    for (std::size_t k = 0; k < h.dim(); ++k) {
        if (k == g1 || k == e0) continue;
        CHECK(std::abs(h(k, g1)) == 0.0);
        CHECK(std::abs(h(k, e0)) == 0.0);
    }
}

TEST_CASE("tpm_distribution: no drive and no coupling leaves energies unchanged") {
    auto m = model_with(0.0);
    m.system.lambda0 = 0.0;
    const auto d = tpm_distribution(m, 500);
    double off = 0.0, total = 0.0;
    for (const auto& e : d.entries) {
        total += e.p;
        if (std::abs(e.Etau - e.E0) > 1e-9) off += e.p;
    }
    CHECK(off <= 1e-14);
    CHECK(std::abs(total - 1.0) <= 1e-12);
    for (int n = 1; n <= 4; ++n) CHECK(std::abs(moments_from_distribution(d, n)) <= 1e-14);
}

TEST_CASE("tpm_distribution: closed drive has the two-level transition structure") {
    auto m = model_with(0.0);
    const auto d = tpm_distribution(m, kSteps);
    const auto w = work_marginal(d);
    const double pg = ground_weight(m.system.beta);
    const double p_ge = transition_probability(1.0, m.system.lambda0, 1.0, m.system.tau());
    for (const auto& [k, p] : w) CHECK(((k == -1 || k == 0 || k == 1) || p <= 1e-14));
    CHECK(rel(w.at(1) / pg, p_ge) <= 1e-6);
    CHECK(rel(w.at(-1) / (1 - pg), p_ge) <= 1e-6);
    CHECK(rel(moments_from_distribution(d, 1), closed_moment(p_ge, m.system.beta, 1)) <= 1e-6);
}

TEST_CASE("tpm_distribution: normalisation and unitarity at the default model") {
    const auto d = tpm_distribution(TotalSystemModel{}, kSteps);
    double total = 0.0;
    for (const auto& e : d.entries) {
        CHECK(e.p >= 0.0);
        total += e.p;
    }
    CHECK(std::abs(total - 1.0) <= 1e-10);
    CHECK(d.unitarity_residual <= 1e-8);
    CHECK(!d.initial_clusters.empty());
    CHECK(!d.final_clusters.empty());
}

TEST_CASE("generating functions: normalisation, symmetry and the Fourier route") {
    const TwoPointMeasurement tpm(TotalSystemModel{}, kSteps);
    const auto d = tpm.distribution();
    CHECK(std::abs(tpm.generating_function(0.0) - 1.0) <= 1e-12);
    CHECK(std::abs(tpm.generating_function_commuting(0.0) - 1.0) <= 1e-12);
    for (double u : {0.1, 0.5, 1.0}) {
        const Complex g = tpm.generating_function(u);
        Complex fourier = 0.0;
        for (const auto& e : d.entries) fourier += e.p * std::exp(Complex(0.0, u * (e.Etau - e.E0)));
        CHECK(std::abs(g - fourier) <= 1e-8);
        CHECK(std::abs(tpm.generating_function(-u) - std::conj(g)) <= 1e-10);
        CHECK(std::abs(tpm.generating_function_commuting(-u) - std::conj(tpm.generating_function_commuting(u))) <=
              1e-10);
    }
}

TEST_CASE("generating functions: free functions agree with the precomputed object") {
    TotalSystemModel m;
    const TwoPointMeasurement tpm(m, 800);
    CHECK(std::abs(generating_function_exact(m, 0.3, 800) - tpm.generating_function(0.3)) <= 1e-13);
    CHECK(std::abs(generating_function_commuting(m, 0.3, 800) - tpm.generating_function_commuting(0.3)) <= 1e-13);
}

TEST_CASE("moments: G and G0 agree at orders one and two and differ at three") {
    const TwoPointMeasurement tpm(TotalSystemModel{}, kSteps);
    const auto d = tpm.distribution();
    const auto g = memoize([&](double u) { return tpm.generating_function(u); });
    const auto g0 = memoize([&](double u) { return tpm.generating_function_commuting(u); });
    for (int n = 1; n <= 2; ++n) {
        const auto a = moments_by_finite_difference(g, n, 0.05);
        const auto b = moments_by_finite_difference(g0, n, 0.05);
        CAPTURE(n);
        CHECK(rel(b.value, a.value) <= 1e-6);
        CHECK(std::abs(a.value - moments_from_distribution(d, n)) <= 1e-6);
        CHECK(a.imaginary_residue <= 1e-6);
    }
    const auto a3 = moments_by_finite_difference(g, 3, 0.05);
    const auto b3 = moments_by_finite_difference(g0, 3, 0.05);
    CHECK(std::abs(a3.value - moments_from_distribution(d, 3)) <= 1e-6);

    const auto c = tpm.correction_terms();
    const double gap = a3.value - b3.value;
    CHECK(std::abs(gap - c.total()) <= 0.1 * std::abs(c.total()));
}

TEST_CASE("moments: the third-moment gap is far above the finite-difference noise without coupling") {
    const TwoPointMeasurement tpm(model_with(0.0), kSteps);
    const auto g = memoize([&](double u) { return tpm.generating_function(u); });
    const auto g0 = memoize([&](double u) { return tpm.generating_function_commuting(u); });
    const auto a = moments_by_finite_difference(g, 3, 0.05);
    const auto b = moments_by_finite_difference(g0, 3, 0.05);
    const double noise = std::max({a.richardson_gap, b.richardson_gap, a.imaginary_residue, b.imaginary_residue});
    CHECK(std::abs(a.value - b.value) > 10 * noise);

    // Without a bath the two routes reproduce the reduced master-equation values.
    SystemParams p;
    p.gamma_down = 0.0;
    const auto me = moments_full(p);
    CHECK(rel(a.value, me.W3) <= 1e-6);
    CHECK(rel(b.value, me.W3_0) <= 1e-6);
}

TEST_CASE("exponential work average: closed-system Jarzynski equality") {
    const auto d = tpm_distribution(model_with(0.0), kSteps);
    CHECK(std::abs(exponential_work_average(d, 2.0) - 1.0) <= 1e-8);
}

TEST_CASE("rotating-wave coupling without drive conserves excitations") {
    TotalSystemModel m;
    m.system.lambda0 = 0.0;
    m.couplings = {Complex(0.05, 0.0)};
    m.coupling = CouplingForm::rwa;
    const auto d = tpm_distribution(m, 2000);
    double leak = 0.0;
    for (const auto& e : d.entries)
        if (std::lround(e.Etau) != std::lround(e.E0)) leak += e.p;
    CHECK(leak <= 1e-10);
}

TEST_CASE("moments_by_finite_difference: analytic generating functions") {
    const auto one = [](double) { return Complex(1.0, 0.0); };
    const auto point = [](double u) { return std::exp(Complex(0.0, u)); };
    for (int n = 1; n <= 3; ++n) {
        CHECK(std::abs(moments_by_finite_difference(one, n, 0.05).value) <= 1e-12);
        CHECK(std::abs(moments_by_finite_difference(point, n, 0.05).value - 1.0) <= 1e-8);
    }
    CHECK_THROWS_AS(moments_by_finite_difference(point, 1, 0.5), DomainError);
    CHECK_THROWS_AS(moments_by_finite_difference(point, 1, 1e-5), DomainError);
    const auto wild = [](double u) { return std::exp(Complex(0.0, 60.0 * u)); };
    CHECK_THROWS_AS(moments_by_finite_difference(wild, 3, 0.1), StepSizeError);
}

TEST_CASE("moments_from_distribution: order range") {
    TPMDistribution d;
    d.entries.push_back({0.0, 1.0, 1.0});
    CHECK(moments_from_distribution(d, 4) == 1.0);
    CHECK_THROWS_AS(moments_from_distribution(d, 0), DomainError);
    CHECK_THROWS_AS(moments_from_distribution(d, 5), DomainError);
}

TEST_CASE("TotalSystemModel: validation keys and dimension cap") {
    auto key_of = [](const TotalSystemModel& m) -> std::string {
        try {
            m.validate();
        } catch (const ConfigError& e) {
            return e.key();
        }
        return {};
    };
    TotalSystemModel m;
    CHECK(key_of(m).empty());
    CHECK(m.dimension() == 8);
    m.mode_freqs = {1.0, 1.0};
    CHECK(key_of(m) == "oracle_couplings");
    m.couplings = {0.02, 0.02};
    m.n_max = 44;  // 2 * 45^2 = 4050
    CHECK(key_of(m).empty());
    m.n_max = 45;  // 2 * 46^2 = 4232
    CHECK(key_of(m) == "oracle_n_max");
    m = {};
    m.mode_freqs = {-1.0};
    CHECK(key_of(m) == "oracle_mode_freqs");
}

TEST_CASE("write_distribution: one line per entry with twelve significant digits") {
    TPMDistribution d;
    d.entries.push_back({0.0, 1.0, 0.123456789012345});
    std::ostringstream os;
    write_distribution(os, d);
    CHECK(os.str() == "0 1 0.123456789012\n");
}
