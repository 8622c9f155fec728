#include "doctest.h"

#include <cmath>
#include <numbers>

#include "support/matrices.hpp"
#include "workmoments/densemath.hpp"
#include "workmoments/errors.hpp"
#include "workmoments/model.hpp"

using namespace workmoments;
using namespace testing_oracles;

namespace {

bool near(const ComplexMatrix& a, const ComplexMatrix& b, double tol) { return max_abs_diff(a, b) <= tol; }

ComplexMatrix sx() { return {{0, 1}, {1, 0}}; }

} // namespace

TEST_CASE("kron: identities, diagonals and index convention") {
    CHECK(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)) == ComplexMatrix::identity(4));

    const std::vector<double> d{1.0, -1.0};
    const std::vector<double> expected{1.0, 1.0, -1.0, -1.0};
    CHECK(kron(ComplexMatrix::diagonal(std::span<const double>(d)), ComplexMatrix::identity(2)) ==
          ComplexMatrix::diagonal(std::span<const double>(expected)));

    // a acting on |e> (x) |1> in the 2 x 3 space gives |g> (x) |1>.
    const auto op = kron(ladder_operators().a, ComplexMatrix::identity(3));
    REQUIRE(op.dim() == 6);
    std::vector<Complex> v(6, 0.0);
    v[1 * 3 + 1] = 1.0;
    const auto out = op * std::span<const Complex>(v);
    for (std::size_t i = 0; i < 6; ++i) CHECK(out[i] == Complex(i == 0 * 3 + 1 ? 1.0 : 0.0));
}

TEST_CASE("kron: dimension cap") {
    CHECK_THROWS_AS(kron(ComplexMatrix::identity(65), ComplexMatrix::identity(64)), SizeError);
    CHECK_THROWS_AS(kron(ComplexMatrix::identity(3), ComplexMatrix::identity(3), 8), SizeError);
    CHECK_NOTHROW(kron(ComplexMatrix::identity(64), ComplexMatrix::identity(64)));
}

TEST_CASE("kron: associativity holds entry for entry") {
    // Gaussian-integer entries keep every product exact.
    Draws d(11);
    auto gaussian_integers = [&](std::size_t n) {
        ComplexMatrix m(n);
        for (auto& z : m.data()) z = Complex(static_cast<double>(d.index(17)) - 8, static_cast<double>(d.index(17)) - 8);
        return m;
    };
    for (int k = 0; k < 20; ++k) {
        const auto a = gaussian_integers(2 + d.index(2));
        const auto b = gaussian_integers(2 + d.index(3));
        const auto c = gaussian_integers(1 + d.index(3));
        CHECK(kron(kron(a, b), c) == kron(a, kron(b, c)));
    }
}

TEST_CASE("commutator: algebra on the two-level space") {
    const auto [a, ad] = ladder_operators();
    Draws d(3);
    const auto m = random_matrix(d, 3);
    CHECK(commutator(m, m).max_abs() == 0.0);
    CHECK(near(commutator(ad * a, a), -1.0 * a, 0.0));
    // Expanding in (|g>, |e>): [a + a^dag, a^dag - a] = 2 (|g><g| - |e><e|), traceless.
    const std::vector<double> z{2.0, -2.0};
    CHECK(near(commutator(a + ad, ad - a), ComplexMatrix::diagonal(std::span<const double>(z)), 0.0));
    CHECK(near(anticommutator(a, ad), ComplexMatrix::identity(2), 0.0));
    CHECK_THROWS_AS(commutator(ComplexMatrix(2), ComplexMatrix(3)), ShapeError);
}

TEST_CASE("commutator: traceless for random inputs") {
    Draws d(5);
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = 1 + d.index(12);
        CHECK(std::abs(commutator(random_matrix(d, n), random_matrix(d, n)).trace()) <= 1e-12);
    }
}

TEST_CASE("hermitian_eigensystem: closed-form spectra") {
    const std::vector<double> diag{0.0, 1.0};
    const auto e0 = hermitian_eigensystem(ComplexMatrix::diagonal(std::span<const double>(diag)));
    CHECK(e0.values[0] == doctest::Approx(0.0));
    CHECK(e0.values[1] == doctest::Approx(1.0));
    CHECK(std::abs(e0.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(e0.vectors(1, 1)) == doctest::Approx(1.0));

    const auto e1 = hermitian_eigensystem(0.05 * sx());
    CHECK(e1.values[0] == doctest::Approx(-0.05).epsilon(1e-13));
    CHECK(e1.values[1] == doctest::Approx(0.05).epsilon(1e-13));

    SystemParams p;
    const auto h = system_hamiltonian(p, std::numbers::pi / 2);
    const auto e2 = hermitian_eigensystem(h);
    const double root = std::sqrt(1.0 + 4 * 0.05 * 0.05);
    CHECK(std::abs(e2.values[0] - (1.0 - root) / 2) <= 1e-12);
    CHECK(std::abs(e2.values[1] - (1.0 + root) / 2) <= 1e-12);
    CHECK(e2.values[0] == doctest::Approx(-0.00249).epsilon(1e-2));
}

TEST_CASE("hermitian_eigensystem: rejects non-Hermitian input") {
    CHECK_THROWS_AS(hermitian_eigensystem(ComplexMatrix{{0, 1}, {0, 0}}), DomainError);
}

TEST_CASE("hermitian_eigensystem: residual, orthonormality and reconstruction on random draws") {
    Draws d(7);
    for (int k = 0; k < 30; ++k) {
        const std::size_t n = 1 + d.index(40);
        const auto h = random_hermitian(d, n);
        const auto eig = hermitian_eigensystem(h);
        double scale = 0.0;
        for (double v : eig.values) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 1; i < n; ++i) CHECK(eig.values[i - 1] <= eig.values[i]);
        CHECK(max_abs_diff(eig.reconstruct(), h) <= 1e-9 * scale);
        CHECK(max_abs_diff(eig.vectors.adjoint() * eig.vectors, ComplexMatrix::identity(n)) <= 1e-10);
        const auto hv = h * eig.vectors;
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r < n; ++r)
                CHECK(std::abs(hv(r, c) - eig.values[c] * eig.vectors(r, c)) <= 1e-9 * scale);
    }
}

TEST_CASE("matrix_exponential: closed forms") {
    CHECK(near(matrix_exponential(ComplexMatrix(3)), ComplexMatrix::identity(3), 0.0));

    const double theta = 0.7;
    const std::vector<double> d{1.0, -1.0};
    const auto diag = ComplexMatrix::diagonal(std::span<const double>(d));
    const std::vector<Complex> ed{std::exp(Complex(0, theta)), std::exp(Complex(0, -theta))};
    CHECK(near(matrix_exponential(Complex(0, theta) * diag), ComplexMatrix::diagonal(std::span<const Complex>(ed)),
               1e-14));

    CHECK(near(matrix_exponential(Complex(0, std::numbers::pi / 2) * sx()), Complex(0, 1) * sx(), 1e-14));
}

TEST_CASE("matrix_exponential: unitary for anti-Hermitian input, converged, matches spectral route") {
    Draws d(13);
    for (int k = 0; k < 30; ++k) {
        const std::size_t n = 1 + d.index(20);
        const auto h = d.uniform(0.1, 30.0) * random_hermitian(d, n);
        const auto u = matrix_exponential(Complex(0, -1) * h);
        CHECK(max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(n)) <= 1e-10);
        CHECK(exponential_refinement_residual(Complex(0, -1) * h) <= 1e-12);
        const auto via_eig = spectral_exponential(hermitian_eigensystem(h), Complex(0, -1));
        CHECK(max_abs_diff(u, via_eig) <= 1e-9);
    }
}

TEST_CASE("matrix_exponential: squaring cap") {
    ExponentialOptions opts;
    opts.max_squarings = 2;
    CHECK_THROWS_AS(matrix_exponential(1e6 * sx(), opts), NumericError);
}

TEST_CASE("ComplexMatrix: shape checks and invariants") {
    CHECK_THROWS_AS(ComplexMatrix(0), SizeError);
    CHECK_THROWS_AS(ComplexMatrix(2) + ComplexMatrix(3), ShapeError);
    CHECK_THROWS_AS(ComplexMatrix(2) * ComplexMatrix(3), ShapeError);
    const ComplexMatrix m{{1, Complex(0, 2)}, {Complex(0, -2), 3}};
    CHECK(m.is_hermitian());
    CHECK(m.trace() == Complex(4, 0));
    CHECK(trace_product(m, m) == (m * m).trace());
}
