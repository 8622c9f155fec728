#include "workmoments/densemath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "workmoments/errors.hpp"

namespace workmoments {

namespace {

void check_dim(std::size_t dim) {
    if (dim == 0 || dim > kMaxDimension) {
        throw SizeError("matrix dimension " + std::to_string(dim) + " outside [1, " +
                        std::to_string(kMaxDimension) + "]");
    }
}

void check_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.dim() != b.dim()) {
        throw ShapeError(std::string(op) + ": dimension mismatch " + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()));
    }
}

double one_norm(const ComplexMatrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.dim(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < a.dim(); ++i) col += std::abs(a(i, j));
        best = std::max(best, col);
    }
    return best;
}

ComplexMatrix taylor_exponential(const ComplexMatrix& a, std::size_t squarings, std::size_t order) {
    const double scale = std::ldexp(1.0, -static_cast<int>(squarings));
    ComplexMatrix x = a;
    x *= scale;
    // Horner: I + x(I + x/2(I + x/3(...)))
    const std::size_t n = a.dim();
    ComplexMatrix result = ComplexMatrix::identity(n);
    for (std::size_t k = order; k >= 1; --k) {
        result = x * result;
        result *= 1.0 / static_cast<double>(k);
        for (std::size_t i = 0; i < n; ++i) result(i, i) += 1.0;
    }
    for (std::size_t s = 0; s < squarings; ++s) result = result * result;
    return result;
}

std::size_t squarings_for(const ComplexMatrix& a, const ExponentialOptions& opts) {
    if (!a.all_finite()) throw DomainError("matrix_exponential: non-finite entries");
    const double norm = one_norm(a);
    std::size_t s = 0;
    if (norm > 0.5) s = static_cast<std::size_t>(std::ceil(std::log2(norm / 0.5)));
    if (s > opts.max_squarings) {
        throw NumericError("matrix_exponential: norm " + std::to_string(norm) +
                           " needs more than " + std::to_string(opts.max_squarings) + " squarings");
    }
    return s;
}

} // namespace

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim) {
    check_dim(dim);
    data_.assign(dim * dim, Complex{});
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : ComplexMatrix(rows.size()) {
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != dim_) throw ShapeError("matrix literal is not square");
        std::copy(row.begin(), row.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
        ++i;
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
    ComplexMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag) {
    ComplexMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

ComplexMatrix ComplexMatrix::unit(std::size_t dim, std::size_t i, std::size_t j) {
    ComplexMatrix m(dim);
    m(i, j) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

Complex ComplexMatrix::trace() const noexcept {
    Complex t{};
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
}

double ComplexMatrix::hermiticity_error() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = i; j < dim_; ++j)
            m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
}

bool ComplexMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    check_same_dim(*this, other, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    check_same_dim(*this, other, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) noexcept {
    for (auto& z : data_) z *= s;
    return *this;
}

ComplexMatrix& ComplexMatrix::add_scaled(Complex s, const ComplexMatrix& other) {
    check_same_dim(*this, other, "add_scaled");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_same_dim(a, b, "operator*");
    const std::size_t n = a.dim();
    ComplexMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

std::vector<Complex> operator*(const ComplexMatrix& a, std::span<const Complex> v) {
    if (v.size() != a.dim()) throw ShapeError("matrix-vector product: dimension mismatch");
    std::vector<Complex> out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        Complex s{};
        for (std::size_t j = 0; j < a.dim(); ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_same_dim(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_same_dim(a, b, "trace_product");
    const std::size_t n = a.dim();
    Complex t{};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t += a(i, j) * b(j, i);
    return t;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t max_dim) {
    const std::size_t na = a.dim();
    const std::size_t nb = b.dim();
    if (na > max_dim / nb || na * nb > kMaxDimension) {
        throw SizeError("kron: product dimension " + std::to_string(na) + "x" + std::to_string(nb) +
                        " exceeds " + std::to_string(std::min(max_dim, kMaxDimension)));
    }
    ComplexMatrix out(na * nb);
    for (std::size_t ia = 0; ia < na; ++ia)
        for (std::size_t ja = 0; ja < na; ++ja) {
            const Complex s = a(ia, ja);
            if (s == Complex{}) continue;
            for (std::size_t ib = 0; ib < nb; ++ib)
                for (std::size_t jb = 0; jb < nb; ++jb) out(ia * nb + ib, ja * nb + jb) = s * b(ib, jb);
        }
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_same_dim(a, b, "commutator");
    return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_same_dim(a, b, "anticommutator");
    return a * b + b * a;
}

ComplexMatrix Eigensystem::reconstruct() const {
    const std::size_t n = vectors.dim();
    ComplexMatrix out(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += values[k] * vectors(i, k) * std::conj(vectors(j, k));
    return out;
}

Eigensystem hermitian_eigensystem(const ComplexMatrix& h) {
    if (!h.all_finite()) throw DomainError("hermitian_eigensystem: non-finite entries");
    const double herm = h.hermiticity_error();
    if (herm > 1e-10) {
        throw DomainError("hermitian_eigensystem: input not Hermitian (deviation " + std::to_string(herm) + ")");
    }
    const std::size_t n = h.dim();
    ComplexMatrix a = h;
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = avg;
            a(j, i) = std::conj(avg);
        }
    }
    ComplexMatrix v = ComplexMatrix::identity(n);

    double frob = 0.0;
    for (const auto& z : a.data()) frob += std::norm(z);
    frob = std::sqrt(frob);

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) <= 1e-16 * frob || off == 0.0) break;
        if (sweep == kMaxSweeps - 1) throw NumericError("hermitian_eigensystem: Jacobi sweeps did not converge");

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double r = std::abs(apq);
                if (r == 0.0 || r <= 1e-300) continue;
                // Unitary V = D * R with D = diag(1, e^{-i phi}) on (p, q) making the
                // pivot real, followed by a real Jacobi rotation R.
                const Complex phase = apq / r;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Complex vpp = c;
                const Complex vpq = s;
                const Complex vqp = -s * std::conj(phase);
                const Complex vqq = c * std::conj(phase);
                // A <- A V
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * vpp + akq * vqp;
                    a(k, q) = akp * vpq + akq * vqq;
                }
                // A <- V^dagger A
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(vpp) * apk + std::conj(vqp) * aqk;
                    a(q, k) = std::conj(vpq) * apk + std::conj(vqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = vkp * vpp + vkq * vqp;
                    v(k, q) = vkp * vpq + vkq * vqq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
    Eigensystem out{std::vector<double>(n), ComplexMatrix(n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

ComplexMatrix matrix_exponential(const ComplexMatrix& a, const ExponentialOptions& opts) {
    const std::size_t s = squarings_for(a, opts);
    ComplexMatrix result = taylor_exponential(a, s, opts.series_order);
    if (!result.all_finite()) throw NumericError("matrix_exponential: overflow");
    return result;
}

double exponential_refinement_residual(const ComplexMatrix& a, const ExponentialOptions& opts) {
    const std::size_t s = squarings_for(a, opts);
    const ComplexMatrix coarse = taylor_exponential(a, s, opts.series_order);
    const ComplexMatrix fine = taylor_exponential(a, s + 1, opts.series_order);
    return max_abs_diff(coarse, fine) / std::max(fine.max_abs(), 1e-300);
}

ComplexMatrix spectral_exponential(const Eigensystem& eig, Complex factor) {
    const std::size_t n = eig.vectors.dim();
    std::vector<Complex> phases(n);
    for (std::size_t k = 0; k < n; ++k) phases[k] = std::exp(factor * eig.values[k]);
    ComplexMatrix out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const Complex vik = eig.vectors(i, k) * phases[k];
            if (vik == Complex{}) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eig.vectors(j, k));
        }
    return out;
}

} // namespace workmoments
