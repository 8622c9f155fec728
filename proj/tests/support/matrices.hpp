// matrices.hpp: random operators for property tests

#pragma once

#include "oracles.hpp"
#include "workmoments/densemath.hpp"

namespace testing_oracles {

inline workmoments::ComplexMatrix random_matrix(Draws& d, std::size_t n) {
    workmoments::ComplexMatrix m(n);
    for (auto& z : m.data()) z = d.complex_normal();
    return m;
}

inline workmoments::ComplexMatrix random_hermitian(Draws& d, std::size_t n) {
    const auto m = random_matrix(d, n);
    return 0.5 * (m + m.adjoint());
}

/// Random density matrix: G G^dagger / Tr.
inline workmoments::ComplexMatrix random_density(Draws& d, std::size_t n) {
    const auto g = random_matrix(d, n);
    auto rho = g * g.adjoint();
    const auto tr = rho.trace();
    rho *= 1.0 / tr;
    return 0.5 * (rho + rho.adjoint());
}

} // namespace testing_oracles
