#pragma once

// Truncated moment sequences.
//
// A vector (a_0, ..., a_N) is admissible as the all-successes probabilities
// of an exchangeable binary process up to depth N exactly when a_0 = 1 and
// every forward difference (-1)^j Δ^j a_h = sum_i (-1)^i C(j,i) a_{h+i} is
// nonnegative for h + j <= N. Throughout this library "difference of order j
// at index h" means that alternating-sign combination, which equals
// E[p^h (1-p)^j] under any representing mixture, so nonnegativity is the
// whole admissibility story. Construction validates it once, O(N^2); after
// that everything may assume it.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "phenom/combinatorics.hpp"
#include "phenom/errors.hpp"
#include "phenom/scalar.hpp"

namespace phenom {

namespace detail {

// Every double is an exact dyadic rational m * 2^e. Alternating sums of
// doubles — finite differences — lose ~2^order relative accuracy to
// cancellation when evaluated in floating point, which is catastrophic
// already at order ~ 30. The float backend therefore carries such sums as
// scaled BigInts: the arithmetic is exact, and each result rounds once, on
// the way out. These helpers do the scaling.

// All values brought to one common exponent: value[i] = m[i] * 2^common.
inline std::pair<std::vector<BigInt>, int> to_common_scale(const double* v, std::size_t count) {
    std::vector<BigInt> m(count);
    std::vector<int> e(count, 0);
    int common = 0;
    bool seen = false;
    for (std::size_t i = 0; i < count; ++i) {
        int exp = 0;
        const double f = std::frexp(v[i], &exp);
        m[i] = static_cast<long long>(std::ldexp(f, 53));  // exact: f has <= 53 bits
        e[i] = exp - 53;
        if (v[i] != 0.0 && (!seen || e[i] < common)) {
            common = e[i];
            seen = true;
        }
    }
    for (std::size_t i = 0; i < count; ++i)
        if (m[i] != 0) m[i] <<= static_cast<unsigned>(e[i] - common);
    return {std::move(m), common};
}

// Round m * 2^e to the nearest representable double (within an ulp or two:
// the mantissa is truncated to 62 bits first, below double resolution).
inline double dyadic_to_double(BigInt m, int e) {
    if (m == 0) return 0.0;
    const bool negative = m < 0;
    if (negative) m = -m;
    const std::size_t bits = msb(m) + 1;
    if (bits > 62) {
        const std::size_t shift = bits - 62;
        m >>= shift;
        e += static_cast<int>(shift);
    }
    const double d = std::ldexp(m.convert_to<double>(), e);
    return negative ? -d : d;
}

}  // namespace detail

// Tag for sequences produced by the operator calculus from already-validated
// input. Those are completely monotone by construction (the operators carry
// the property exactly), so only the cheap invariants are re-checked; the
// O(N^2) difference table runs once, at original construction.
struct derived_from_valid_t {
    explicit derived_from_valid_t() = default;
};
inline constexpr derived_from_valid_t derived_from_valid{};

template <backend_scalar T>
class MomentSequence {
  public:
    explicit MomentSequence(std::vector<T> values) : values_(std::move(values)) {
        validate_cheap();
        validate_differences();
    }

    MomentSequence(std::vector<T> values, derived_from_valid_t) : values_(std::move(values)) {
        validate_cheap();
    }

    // Highest depth this sequence can answer questions about.
    std::size_t depth() const { return values_.size() - 1; }

    const std::vector<T>& values() const { return values_; }

    const T& at(std::size_t h) const {
        if (h >= values_.size())
            throw depth_exceeded("moment index " + std::to_string(h) +
                                 " exceeds truncation depth " + std::to_string(depth()));
        return values_[h];
    }

    // The h-th moment of the mixing distribution: E[p^h].
    const T& mixing_moment(std::size_t h) const { return at(h); }

    // sum_i (-1)^i C(j,i) a_{h+i}. Requires h + j <= depth. On the float
    // backend the alternating sum runs in exact dyadic arithmetic and rounds
    // once, so no accuracy is lost to cancellation at any order.
    T finite_difference(std::size_t order, std::size_t index) const {
        if (index + order > depth())
            throw depth_exceeded("difference of order " + std::to_string(order) + " at index " +
                                 std::to_string(index) + " needs depth " +
                                 std::to_string(index + order) + ", have " +
                                 std::to_string(depth()));
        if constexpr (scalar_traits<T>::is_exact) {
            T acc = scalar_traits<T>::zero();
            for (std::size_t i = 0; i <= order; ++i) {
                T term = binomial_as<T>(order, i) * values_[index + i];
                if (i % 2 == 0)
                    acc += term;
                else
                    acc -= term;
            }
            return acc;
        } else {
            auto [m, e] = detail::to_common_scale(values_.data() + index, order + 1);
            BigInt coeff(1), acc(0);
            for (std::size_t i = 0; i <= order; ++i) {
                if (i % 2 == 0)
                    acc += coeff * m[i];
                else
                    acc -= coeff * m[i];
                coeff = coeff * static_cast<unsigned long>(order - i) /
                        static_cast<unsigned long>(i + 1);
            }
            return detail::dyadic_to_double(acc, e);
        }
    }

  private:
    // Range and head: O(N), always run.
    void validate_cheap() const {
        const T tol = scalar_traits<T>::tolerance();
        if (values_.empty()) throw not_unit_at_zero("moment sequence is empty");
        if constexpr (!scalar_traits<T>::is_exact) {
            for (std::size_t h = 0; h < values_.size(); ++h)
                if (!std::isfinite(values_[h]))
                    throw not_a_probability("moment a_" + std::to_string(h) + " is not finite");
        }
        if (values_[0] < scalar_traits<T>::one() - tol ||
            values_[0] > scalar_traits<T>::one() + tol)
            throw not_unit_at_zero("a_0 must be 1, got " + scalar_traits<T>::repr(values_[0]));
        // Range only. Monotonicity — including the adjacent-pair case — is
        // the order-1 row of the difference table, so it belongs to the full
        // sweep and is deliberately not re-checked on derived sequences.
        for (std::size_t h = 0; h < values_.size(); ++h)
            if (values_[h] < -tol || values_[h] > scalar_traits<T>::one() + tol)
                throw not_a_probability("moment a_" + std::to_string(h) + " = " +
                                        scalar_traits<T>::repr(values_[h]) +
                                        " is outside [0, 1]");
    }

    // Full complete-monotonicity sweep: O(N^2), run on raw input only.
    void validate_differences() const {
        const T tol = scalar_traits<T>::tolerance();

        // In-place difference table: after pass j, work[h] holds the order-j
        // difference at h. First violation in (order, index) scan order wins.
        //
        // Float backend: an order-j difference is an alternating sum whose
        // terms total S_jh = sum_i C(j,i) a_{h+i}, so double arithmetic can
        // only resolve it to about S_jh * 2^-52. A fixed absolute tolerance
        // would reject correctly rounded values of genuinely valid sequences
        // once j is large (the noise is amplified ~2^j). The check therefore
        // measures the tolerance relative to max(1, S_jh), which keeps it
        // exact where doubles are exact and honest where they are not.
        std::vector<T> work = values_;
        const std::size_t n = depth();
        [[maybe_unused]] std::vector<T> scale;
        if constexpr (!scalar_traits<T>::is_exact) scale = values_;
        for (std::size_t j = 1; j <= n; ++j) {
            for (std::size_t h = 0; h + j <= n; ++h) {
                work[h] = work[h] - work[h + 1];
                T threshold = -tol;
                if constexpr (!scalar_traits<T>::is_exact) {
                    scale[h] = scale[h] + scale[h + 1];
                    if (scale[h] > scalar_traits<T>::one()) threshold = -tol * scale[h];
                }
                if (work[h] < threshold)
                    throw not_completely_monotone(
                        h, j,
                        "difference of order " + std::to_string(j) + " at index " +
                            std::to_string(h) + " is negative (" +
                            scalar_traits<T>::repr(work[h]) +
                            "); no exchangeable process has these moments");
            }
        }
    }

    std::vector<T> values_;
};

}  // namespace phenom
