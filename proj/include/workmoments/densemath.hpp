// densemath.hpp: dense complex matrices sized for small Hilbert spaces

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace workmoments {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxDimension = 4096;

/// Square complex matrix, row-major. Operators and density matrices of both
/// the reduced two-level system and the oracle's composite space live here.
class ComplexMatrix {
public:
    ComplexMatrix() : ComplexMatrix(1) {}
    explicit ComplexMatrix(std::size_t dim);
    /// Row-wise literal, e.g. {{0, 1}, {1, 0}}.
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static ComplexMatrix identity(std::size_t dim);
    static ComplexMatrix diagonal(std::span<const Complex> diag);
    static ComplexMatrix diagonal(std::span<const double> diag);
    /// |i><j| in dimension dim.
    static ComplexMatrix unit(std::size_t dim, std::size_t i, std::size_t j);

    std::size_t dim() const noexcept { return dim_; }

    Complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * dim_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * dim_ + j]; }

    std::span<Complex> data() noexcept { return data_; }
    std::span<const Complex> data() const noexcept { return data_; }

    ComplexMatrix adjoint() const;
    Complex trace() const noexcept;
    /// max_ij |m_ij|
    double max_abs() const noexcept;
    /// max_ij |m_ij - conj(m_ji)|
    double hermiticity_error() const noexcept;
    bool is_hermitian(double tol = 1e-12) const noexcept { return hermiticity_error() <= tol; }
    bool all_finite() const noexcept;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex s) noexcept;
    /// this += s * other
    ComplexMatrix& add_scaled(Complex s, const ComplexMatrix& other);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t dim_;
    std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, Complex s);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

std::vector<Complex> operator*(const ComplexMatrix& a, std::span<const Complex> v);

/// max_ij |a_ij - b_ij|
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

/// Tr{a b} without forming the product.
Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// Kronecker product with index convention (i_a * dim_b + i_b).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t max_dim = kMaxDimension);

/// ab - ba
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
/// ab + ba
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

struct Eigensystem {
    std::vector<double> values;   // ascending
    ComplexMatrix vectors;        // column k belongs to values[k]

    /// sum_k values[k] v_k v_k^dagger
    ComplexMatrix reconstruct() const;
};

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
/// Throws DomainError if h deviates from Hermitian by more than 1e-10.
Eigensystem hermitian_eigensystem(const ComplexMatrix& h);

struct ExponentialOptions {
    std::size_t max_squarings = 64;
    std::size_t series_order = 18;
};

/// Scaling-and-squaring with a fixed-order Taylor series.
ComplexMatrix matrix_exponential(const ComplexMatrix& a, const ExponentialOptions& opts = {});

/// Relative difference between the exponential at the chosen scaling level and
/// one level finer (one extra halving). Used to validate convergence.
double exponential_refinement_residual(const ComplexMatrix& a, const ExponentialOptions& opts = {});

/// V diag(exp(factor * lambda_k)) V^dagger for a Hermitian matrix given by its
/// eigensystem, e.g. factor = i*u for exp(i u H).
ComplexMatrix spectral_exponential(const Eigensystem& eig, Complex factor);

} // namespace workmoments
