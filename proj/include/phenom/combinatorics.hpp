#pragma once

// Exact binomial coefficients. The multiplicative form keeps intermediates
// small (every prefix product is itself a binomial coefficient, hence an
// integer), so no factorial tables and no overflow at any n we care about.

#include <cstddef>

#include "phenom/scalar.hpp"

namespace phenom {

inline BigInt binomial(std::size_t n, std::size_t k) {
    if (k > n) return BigInt(0);
    if (k > n - k) k = n - k;
    BigInt acc(1);
    for (std::size_t i = 1; i <= k; ++i) {
        acc *= static_cast<unsigned long>(n - k + i);
        acc /= static_cast<unsigned long>(i);
    }
    return acc;
}

template <backend_scalar T>
T binomial_as(std::size_t n, std::size_t k) {
    return scalar_traits<T>::from_ratio(binomial(n, k), BigInt(1));
}

}  // namespace phenom
