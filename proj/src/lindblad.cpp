#include "workmoments/lindblad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "workmoments/errors.hpp"

namespace workmoments {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_2x2(const ComplexMatrix& x, const char* op) {
    if (x.dim() != 2) throw ShapeError(std::string(op) + ": expected a 2x2 matrix");
}

/// -i[h, x] for 2x2 operands.
ComplexMatrix unitary_part(const ComplexMatrix& h, const ComplexMatrix& x) {
    ComplexMatrix out(2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            Complex s{};
            for (std::size_t k = 0; k < 2; ++k) s += h(i, k) * x(k, j) - x(i, k) * h(k, j);
            out(i, j) = -kI * s;
        }
    return out;
}

/// Full augmented state of the co-evolution pass.
struct ChainState {
    std::array<ComplexMatrix, 6> m;  // rho, A1, A2, B1, B2, D
    std::array<double, 5> s{};        // W1, W2, W3_0, W3_cross, C3_system

    explicit ChainState(std::size_t dim)
        : m{ComplexMatrix(dim), ComplexMatrix(dim), ComplexMatrix(dim), ComplexMatrix(dim),
            ComplexMatrix(dim), ComplexMatrix(dim)} {}

    ChainState plus(double c, const ChainState& k) const {
        ChainState out = *this;
        for (std::size_t i = 0; i < m.size(); ++i) out.m[i].add_scaled(c, k.m[i]);
        for (std::size_t i = 0; i < s.size(); ++i) out.s[i] += c * k.s[i];
        return out;
    }
};

enum : std::size_t { kRho = 0, kA1, kA2, kB1, kB2, kD };

ChainState chain_derivative(const RegressionProblem& pb, double t, const CorrelationDrivers& dr,
                            const ChainState& y) {
    ChainState d(y.m[kRho].dim());
    for (std::size_t i = 0; i < y.m.size(); ++i) d.m[i] = pb.generator(t, y.m[i]);
    const ComplexMatrix& p = dr.power;
    d.m[kA1] += p * y.m[kRho];
    d.m[kA2] += y.m[kRho] * p;
    d.m[kB1] += p * y.m[kA1];
    d.m[kB2] += p * y.m[kA2];
    d.m[kD] += dr.commutator * y.m[kRho];
    d.s[0] = trace_product(p, y.m[kRho]).real();
    d.s[1] = 2.0 * trace_product(p, y.m[kA1]).real();
    d.s[2] = 3.0 * (trace_product(p, y.m[kB1]) + trace_product(p, y.m[kB2])).real();
    d.s[3] = 1.5 * trace_product(p, y.m[kD]).real();
    d.s[4] = 0.25 * trace_product(dr.double_commutator, y.m[kRho]).real();
    return d;
}

void hermitize(ComplexMatrix& rho) {
    const std::size_t n = rho.dim();
    for (std::size_t i = 0; i < n; ++i) {
        rho(i, i) = rho(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
            rho(i, j) = avg;
            rho(j, i) = std::conj(avg);
        }
    }
}

double min_eigenvalue_any(const ComplexMatrix& rho) {
    if (rho.dim() == 2) return min_eigenvalue_2x2(rho);
    return hermitian_eigensystem(rho).values.front();
}

constexpr double kPositivityFloor = -1e-6;

CumulativeMoments snapshot(const ChainState& y) {
    return {y.s[0], y.s[1], y.s[2], y.s[3], y.s[4]};
}

/// Superoperator of one homogeneous RK4 step acting on row-major vec(x).
using SuperOp = std::array<std::array<Complex, 4>, 4>;

std::array<Complex, 4> vec(const ComplexMatrix& x) {
    return {x(0, 0), x(0, 1), x(1, 0), x(1, 1)};
}

ComplexMatrix unvec(const std::array<Complex, 4>& v) {
    return ComplexMatrix{{v[0], v[1]}, {v[2], v[3]}};
}

ComplexMatrix apply_superop(const SuperOp& s, const ComplexMatrix& x) {
    const auto v = vec(x);
    std::array<Complex, 4> out{};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) out[r] += s[r][c] * v[c];
    return unvec(out);
}

SuperOp identity_superop() {
    SuperOp s{};
    for (std::size_t r = 0; r < 4; ++r) s[r][r] = 1.0;
    return s;
}

SuperOp compose(const SuperOp& a, const SuperOp& b) {
    SuperOp out{};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t c = 0; c < 4; ++c) out[r][c] += a[r][k] * b[k][c];
    return out;
}

/// Gauss-Jordan with partial pivoting.
SuperOp invert(SuperOp a) {
    SuperOp inv = identity_superop();
    for (std::size_t col = 0; col < 4; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) throw NumericError("superoperator is singular");
        std::swap(a[col], a[piv]);
        std::swap(inv[col], inv[piv]);
        const Complex d = a[col][col];
        for (std::size_t c = 0; c < 4; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < 4; ++r) {
            if (r == col) continue;
            const Complex f = a[r][col];
            for (std::size_t c = 0; c < 4; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

ComplexMatrix rk4_homogeneous(const SystemParams& p, double t, double h, const ComplexMatrix& x) {
    const ComplexMatrix k1 = lindblad_apply(p, t, x);
    const ComplexMatrix k2 = lindblad_apply(p, t + 0.5 * h, x + (0.5 * h) * k1);
    const ComplexMatrix k3 = lindblad_apply(p, t + 0.5 * h, x + (0.5 * h) * k2);
    const ComplexMatrix k4 = lindblad_apply(p, t + h, x + h * k3);
    ComplexMatrix out = x;
    out.add_scaled(h / 6.0, k1).add_scaled(h / 3.0, k2).add_scaled(h / 3.0, k3).add_scaled(h / 6.0, k4);
    return out;
}

SuperOp interval_propagator(const SystemParams& p, double t0, double h, std::size_t substeps) {
    SuperOp s{};
    const double dh = h / static_cast<double>(substeps);
    for (std::size_t c = 0; c < 4; ++c) {
        ComplexMatrix x = ComplexMatrix::unit(2, c / 2, c % 2);
        for (std::size_t k = 0; k < substeps; ++k) x = rk4_homogeneous(p, t0 + static_cast<double>(k) * dh, dh, x);
        const auto v = vec(x);
        for (std::size_t r = 0; r < 4; ++r) s[r][c] = v[r];
    }
    return s;
}

CorrelationDrivers reduced_drivers(const SystemParams& p, double t) {
    const ComplexMatrix h = system_hamiltonian(p, t);
    ComplexMatrix pw = power_operator(p, t);
    ComplexMatrix c2 = commutator(h, pw);
    ComplexMatrix c3 = commutator(h, c2);
    return {std::move(pw), std::move(c2), std::move(c3)};
}

} // namespace

ComplexMatrix dissipator_apply(const TransitionRates& rates, const ComplexMatrix& x) {
    require_2x2(x, "dissipator_apply");
    const double half = 0.5 * (rates.down + rates.up);
    ComplexMatrix out(2);
    out(kGround, kGround) = rates.down * x(kExcited, kExcited) - rates.up * x(kGround, kGround);
    out(kExcited, kExcited) = -rates.down * x(kExcited, kExcited) + rates.up * x(kGround, kGround);
    out(kGround, kExcited) = -half * x(kGround, kExcited);
    out(kExcited, kGround) = -half * x(kExcited, kGround);
    return out;
}

ComplexMatrix lindblad_apply(const SystemParams& p, double t, const ComplexMatrix& x) {
    require_2x2(x, "lindblad_apply");
    ComplexMatrix out = unitary_part(system_hamiltonian(p, t), x);
    out += dissipator_apply(transition_rates(p), x);
    return out;
}

DensityMatrix propagate_state(const SystemParams& p, const DensityMatrix& rho0, double t0, double t1,
                              std::size_t substeps) {
    if (!(t1 >= t0)) throw DomainError("propagate_state: requires t0 <= t1");
    if (substeps == 0) throw DomainError("propagate_state: substeps must be >= 1");
    require_2x2(rho0.matrix(), "propagate_state");
    const double h = (t1 - t0) / static_cast<double>(substeps);
    ComplexMatrix rho = rho0.matrix();
    for (std::size_t k = 0; k < substeps; ++k) {
        rho = rk4_homogeneous(p, t0 + static_cast<double>(k) * h, h, rho);
        hermitize(rho);
        const double lo = min_eigenvalue_2x2(rho);
        if (lo < kPositivityFloor) {
            throw NumericError("propagate_state: positivity lost at step " + std::to_string(k + 1) +
                               " (min eigenvalue " + std::to_string(lo) + ")");
        }
    }
    return DensityMatrix(std::move(rho));
}

MomentsIntegrands coevolve(const RegressionProblem& pb) {
    if (pb.steps == 0) throw DomainError("coevolve: steps must be >= 1");
    if (!(pb.duration >= 0.0) || !std::isfinite(pb.duration)) throw DomainError("coevolve: bad duration");
    const std::size_t n = pb.rho0.dim();
    const double h = pb.duration / static_cast<double>(pb.steps);

    MomentsIntegrands out;
    out.times.reserve(pb.steps + 1);
    out.cumulative.reserve(pb.steps + 1);
    if (pb.keep_states) out.rho.reserve(pb.steps + 1);

    ChainState y(n);
    y.m[kRho] = pb.rho0;
    auto record = [&](double t) {
        out.times.push_back(t);
        out.cumulative.push_back(snapshot(y));
        if (pb.keep_states) out.rho.push_back(y.m[kRho]);
        auto& diag = out.diagnostics;
        diag.max_trace_error = std::max(diag.max_trace_error, std::abs(y.m[kRho].trace() - 1.0));
        diag.max_chain_asymmetry =
            std::max(diag.max_chain_asymmetry, max_abs_diff(y.m[kA2], y.m[kA1].adjoint()));
    };
    record(0.0);

    CorrelationDrivers d_start = pb.drivers(0.0);
    for (std::size_t k = 0; k < pb.steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const double t_next = static_cast<double>(k + 1) * h;
        const CorrelationDrivers d_mid = pb.drivers(t + 0.5 * h);
        CorrelationDrivers d_end = pb.drivers(t_next);

        const ChainState k1 = chain_derivative(pb, t, d_start, y);
        const ChainState k2 = chain_derivative(pb, t + 0.5 * h, d_mid, y.plus(0.5 * h, k1));
        const ChainState k3 = chain_derivative(pb, t + 0.5 * h, d_mid, y.plus(0.5 * h, k2));
        const ChainState k4 = chain_derivative(pb, t_next, d_end, y.plus(h, k3));
        y = y.plus(h / 6.0, k1).plus(h / 3.0, k2).plus(h / 3.0, k3).plus(h / 6.0, k4);

        auto& diag = out.diagnostics;
        diag.max_hermiticity_error = std::max(diag.max_hermiticity_error, y.m[kRho].hermiticity_error());
        hermitize(y.m[kRho]);
        if (pb.check_positivity) {
            const double lo = min_eigenvalue_any(y.m[kRho]);
            diag.min_eigenvalue = std::min(diag.min_eigenvalue, lo);
            if (lo < kPositivityFloor) {
                throw NumericError("coevolve: positivity lost at step " + std::to_string(k + 1) +
                                   " (min eigenvalue " + std::to_string(lo) + ")");
            }
        }
        record(t_next);
        d_start = std::move(d_end);
    }

    out.W1 = y.s[0];
    out.W2 = y.s[1];
    out.W3_0 = y.s[2];
    out.W3_cross = y.s[3];
    out.C3_system = y.s[4];
    return out;
}

RegressionProblem reduced_problem(const SystemParams& p) {
    RegressionProblem pb;
    pb.generator = [p](double t, const ComplexMatrix& x) { return lindblad_apply(p, t, x); };
    pb.drivers = [p](double t) { return reduced_drivers(p, t); };
    pb.rho0 = thermal_state(p).matrix();
    pb.duration = p.tau();
    pb.steps = p.steps;
    return pb;
}

MomentsIntegrands coevolve_correlations(const SystemParams& p) {
    p.validate();
    return coevolve(reduced_problem(p));
}

std::vector<std::vector<double>> cumulative_weights(std::size_t intervals, double h, std::size_t stencil) {
    if (stencil < 2) throw DomainError("cumulative_weights: stencil must be >= 2");
    std::vector<std::vector<double>> w(intervals + 1);
    const std::size_t m = std::min(stencil, intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        // Rows shorter than the stencil borrow nodes beyond t_i.
        const std::size_t avail = std::max(i + 1, m);
        w[i].assign(avail, 0.0);
        for (std::size_t j = 0; j < i; ++j) {
            // Panel [j, j+1] integrated with the interpolant through m nodes
            // centred on the panel, shifted inward at the ends.
            const std::size_t lead = (m - 1) / 2;
            std::size_t first = j >= lead ? j - lead : 0;
            first = std::min(first, avail - m);
            for (std::size_t k = 0; k < m; ++k) {
                // Lagrange basis polynomial for node first+k, expanded in powers of x.
                std::vector<double> poly{1.0};
                double denom = 1.0;
                for (std::size_t l = 0; l < m; ++l) {
                    if (l == k) continue;
                    const double xl = static_cast<double>(first + l) - static_cast<double>(j);
                    std::vector<double> next(poly.size() + 1, 0.0);
                    for (std::size_t c = 0; c < poly.size(); ++c) {
                        next[c + 1] += poly[c];
                        next[c] -= xl * poly[c];
                    }
                    poly = std::move(next);
                    denom *= static_cast<double>(k) - static_cast<double>(l);
                }
                // Coordinates are shifted so the panel is [0, 1].
                double integral = 0.0;
                for (std::size_t c = 0; c < poly.size(); ++c) integral += poly[c] / static_cast<double>(c + 1);
                w[i][first + k] += h * integral / denom;
            }
        }
    }
    return w;
}

RegressionReference nested_regression_reference(const SystemParams& p, std::size_t intervals,
                                                 std::size_t substeps) {
    p.validate();
    if (intervals < 5) throw DomainError("nested_regression_reference: need at least 5 intervals");
    const double h = p.tau() / static_cast<double>(intervals);
    const auto w = cumulative_weights(intervals, h, 6);
    const std::size_t n = intervals + 1;

    std::vector<SuperOp> step(intervals);
    for (std::size_t j = 0; j < intervals; ++j)
        step[j] = interval_propagator(p, static_cast<double>(j) * h, h, substeps);

    // transport[i][k] = V(t_i, t_k). Forward for k <= i; the few k > i needed
    // by the short early rows come from inverting the forward map.
    std::vector<std::vector<SuperOp>> transport(n, std::vector<SuperOp>(n));
    for (std::size_t k = 0; k < n; ++k) {
        transport[k][k] = identity_superop();
        for (std::size_t i = k + 1; i < n; ++i) transport[i][k] = compose(step[i - 1], transport[i - 1][k]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < w[i].size(); ++k) transport[i][k] = invert(transport[k][i]);

    std::vector<ComplexMatrix> rho(n);
    std::vector<CorrelationDrivers> drv;
    drv.reserve(n);
    rho[0] = thermal_state(p).matrix();
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) rho[i] = apply_superop(step[i - 1], rho[i - 1]);
        drv.push_back(reduced_drivers(p, static_cast<double>(i) * h));
    }

    // sum_k w_ik V(t_i, t_k)[x_k]
    auto inner = [&](std::size_t i, const std::vector<ComplexMatrix>& x) {
        ComplexMatrix acc(2);
        for (std::size_t k = 0; k < w[i].size(); ++k) {
            if (w[i][k] == 0.0) continue;
            acc.add_scaled(w[i][k], apply_superop(transport[i][k], x[k]));
        }
        return acc;
    };

    std::vector<ComplexMatrix> p_rho(n), rho_p(n), c2_rho(n);
    for (std::size_t i = 0; i < n; ++i) {
        p_rho[i] = drv[i].power * rho[i];
        rho_p[i] = rho[i] * drv[i].power;
        c2_rho[i] = drv[i].commutator * rho[i];
    }
    std::vector<ComplexMatrix> a1(n), a2(n), dd(n), p_a1(n), p_a2(n);
    for (std::size_t i = 0; i < n; ++i) {
        a1[i] = inner(i, p_rho);
        a2[i] = inner(i, rho_p);
        dd[i] = inner(i, c2_rho);
        p_a1[i] = drv[i].power * a1[i];
        p_a2[i] = drv[i].power * a2[i];
    }

    RegressionReference ref;
    const auto& outer = w[intervals];
    for (std::size_t i = 0; i < n; ++i) {
        const ComplexMatrix& pw = drv[i].power;
        const ComplexMatrix b1 = inner(i, p_a1);
        const ComplexMatrix b2 = inner(i, p_a2);
        ref.W1 += outer[i] * trace_product(pw, rho[i]).real();
        ref.W2 += outer[i] * 2.0 * trace_product(pw, a1[i]).real();
        ref.W3_0 += outer[i] * 3.0 * (trace_product(pw, b1) + trace_product(pw, b2)).real();
        ref.W3_cross += outer[i] * 1.5 * trace_product(pw, dd[i]).real();
        ref.C3_system += outer[i] * 0.25 * trace_product(drv[i].double_commutator, rho[i]).real();
    }
    return ref;
}

} // namespace workmoments
