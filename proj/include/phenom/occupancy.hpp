#pragma once

// Occupancy distributions: the probability of h successes among n trials,
// and the transforms built on top of it (generating polynomial, finite-n
// characteristic function, aggregation to coarser horizons).
//
// Two computation routes, deliberately kept distinct:
//   atomic   - sum over atoms of w * C(n,h) p^h (1-p)^(n-h)
//   moments  - C(n,h) * (difference of order n-h at index h)
// They agree on mixtures by construction; tests exploit that.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "phenom/combinatorics.hpp"
#include "phenom/errors.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/scalar.hpp"

namespace phenom {

template <backend_scalar T>
struct OccupancyRow {
    std::size_t trials = 0;
    std::vector<T> probs;  // index h = 0..trials
};

namespace detail {

// One binomial pmf entry, safe for the backend. The float path works in log
// space: at n ~ 1000 the naive C(n,h) p^h (1-p)^(n-h) product overflows or
// underflows double no matter how the factors are ordered.
template <backend_scalar T>
T binomial_term(std::size_t n, std::size_t h, const T& p) {
    if constexpr (scalar_traits<T>::is_exact) {
        if (p == 0) return h == 0 ? scalar_traits<T>::one() : scalar_traits<T>::zero();
        if (p == 1) return h == n ? scalar_traits<T>::one() : scalar_traits<T>::zero();
        return binomial_as<T>(n, h) * scalar_traits<T>::pow_ui(p, h) *
               scalar_traits<T>::pow_ui(scalar_traits<T>::one() - p, n - h);
    } else {
        if (p <= 0.0) return h == 0 ? 1.0 : 0.0;
        if (p >= 1.0) return h == n ? 1.0 : 0.0;
        double log_term = std::lgamma(double(n) + 1) - std::lgamma(double(h) + 1) -
                          std::lgamma(double(n - h) + 1) + double(h) * std::log(p) +
                          double(n - h) * std::log1p(-p);
        return std::exp(log_term);
    }
}

// Full pmf row for one atom. Exact backend uses the recurrence
// row[h+1] = row[h] * (n-h) p / ((h+1)(1-p)) from row[0] = (1-p)^n.
template <backend_scalar T>
std::vector<T> binomial_pmf_row(const T& p, std::size_t n) {
    std::vector<T> row(n + 1, scalar_traits<T>::zero());
    if constexpr (scalar_traits<T>::is_exact) {
        if (p == 0) {
            row[0] = scalar_traits<T>::one();
            return row;
        }
        if (p == 1) {
            row[n] = scalar_traits<T>::one();
            return row;
        }
        const T q = scalar_traits<T>::one() - p;
        row[0] = scalar_traits<T>::pow_ui(q, n);
        for (std::size_t h = 0; h < n; ++h)
            row[h + 1] = row[h] * scalar_traits<T>::from_int(n - h) * p /
                         (scalar_traits<T>::from_int(h + 1) * q);
    } else {
        for (std::size_t h = 0; h <= n; ++h) row[h] = binomial_term<T>(n, h, p);
    }
    return row;
}

}  // namespace detail

// P(exactly h successes in n trials).
template <backend_scalar T>
T occupancy_probability(const Phenomenon<T>& ph, std::size_t n, std::size_t h) {
    if (h > n)
        throw index_out_of_range("occupancy count " + std::to_string(h) + " exceeds trials " +
                                 std::to_string(n));
    if (ph.is_atomic()) {
        T acc = scalar_traits<T>::zero();
        for (const Atom<T>& a : ph.atomic().atoms())
            acc += a.weight * detail::binomial_term<T>(n, h, a.p);
        return acc;
    }
    ph.require_depth(n);
    if constexpr (scalar_traits<T>::is_exact) {
        return binomial_as<T>(n, h) * ph.moment_sequence().finite_difference(n - h, h);
    } else {
        // Exact dyadic evaluation of C(n,h) * difference, rounded once: the
        // binomial can exceed double range on its own long before the
        // product does, and the difference would otherwise cancel away.
        const std::vector<T>& v = ph.moment_sequence().values();
        const std::size_t order = n - h;
        auto [m, e] = detail::to_common_scale(v.data() + h, order + 1);
        BigInt coeff(1), acc(0);
        for (std::size_t i = 0; i <= order; ++i) {
            if (i % 2 == 0)
                acc += coeff * m[i];
            else
                acc -= coeff * m[i];
            coeff = coeff * static_cast<unsigned long>(order - i) /
                    static_cast<unsigned long>(i + 1);
        }
        return detail::dyadic_to_double(binomial(n, h) * acc, e);
    }
}

template <backend_scalar T>
OccupancyRow<T> occupancy_row(const Phenomenon<T>& ph, std::size_t n) {
    OccupancyRow<T> row{n, std::vector<T>(n + 1, scalar_traits<T>::zero())};
    if (ph.is_atomic()) {
        for (const Atom<T>& a : ph.atomic().atoms()) {
            std::vector<T> pmf = detail::binomial_pmf_row<T>(a.p, n);
            for (std::size_t h = 0; h <= n; ++h) row.probs[h] += a.weight * pmf[h];
        }
        return row;
    }
    ph.require_depth(n);
    // One in-place difference pass gives every needed order: after pass j,
    // work[n-j] is the order-j difference at index n-j, i.e. the h = n-j entry.
    const std::vector<T>& v = ph.moment_sequence().values();
    if constexpr (scalar_traits<T>::is_exact) {
        std::vector<T> work(v.begin(), v.begin() + n + 1);
        row.probs[n] = work[n];
        for (std::size_t j = 1; j <= n; ++j) {
            for (std::size_t h = 0; h + j <= n; ++h) work[h] = work[h] - work[h + 1];
            row.probs[n - j] = work[n - j];
        }
        for (std::size_t h = 0; h <= n; ++h) row.probs[h] *= binomial_as<T>(n, h);
    } else {
        // Same table, but carried in exact dyadic arithmetic with one
        // rounding per entry; see finite_difference for why doubles alone
        // cannot survive the cancellation.
        auto [work, e] = detail::to_common_scale(v.data(), n + 1);
        row.probs[n] = detail::dyadic_to_double(work[n], e);
        for (std::size_t j = 1; j <= n; ++j) {
            for (std::size_t h = 0; h + j <= n; ++h) work[h] -= work[h + 1];
            row.probs[n - j] = detail::dyadic_to_double(binomial(n, n - j) * work[n - j], e);
        }
    }
    return row;
}

// Sanity gate for rows from outside (or from tests): nonnegative entries
// summing to one within backend tolerance.
template <backend_scalar T>
void validate_occupancy_row(const OccupancyRow<T>& row) {
    const T tol = scalar_traits<T>::tolerance();
    if (row.probs.size() != row.trials + 1)
        throw index_out_of_range("occupancy row over " + std::to_string(row.trials) +
                                 " trials must have " + std::to_string(row.trials + 1) +
                                 " entries, has " + std::to_string(row.probs.size()));
    T sum = scalar_traits<T>::zero();
    for (std::size_t h = 0; h < row.probs.size(); ++h) {
        if (row.probs[h] < -tol)
            throw not_a_probability("occupancy probability at h = " + std::to_string(h) +
                                    " is negative: " + scalar_traits<T>::repr(row.probs[h]));
        sum += row.probs[h];
    }
    if (sum < scalar_traits<T>::one() - tol || sum > scalar_traits<T>::one() + tol)
        throw not_a_probability("occupancy row sums to " + scalar_traits<T>::repr(sum) +
                                ", expected 1");
}

// Marginalize an n-trial row down to m <= n trials: any m-subset of the n
// trials is itself exchangeable, so the coefficient is hypergeometric.
template <backend_scalar T>
OccupancyRow<T> aggregate(const OccupancyRow<T>& row, std::size_t m) {
    const std::size_t n = row.trials;
    if (m > n)
        throw index_out_of_range("cannot aggregate a row over " + std::to_string(n) +
                                 " trials up to " + std::to_string(m));
    OccupancyRow<T> out{m, std::vector<T>(m + 1, scalar_traits<T>::zero())};
    const BigInt total = binomial(n, m);
    for (std::size_t k = 0; k <= m; ++k) {
        T acc = scalar_traits<T>::zero();
        for (std::size_t h = k; h + (m - k) <= n; ++h) {
            T coeff = scalar_traits<T>::from_ratio(binomial(h, k) * binomial(n - h, m - k), total);
            acc += coeff * row.probs[h];
        }
        out.probs[k] = acc;
    }
    return out;
}

template <backend_scalar T>
struct PascalWitness {
    std::size_t k = 0;
    T lhs;  // n * P(k successes in n-1)
    T rhs;  // (n-k) * P(k in n) + (k+1) * P(k+1 in n)
};

// Consistency of adjacent horizons: n * w_k^(n-1) = (n-k) w_k^(n) + (k+1) w_{k+1}^(n).
// Returns the first failing k, or nullopt when the recurrence holds.
template <backend_scalar T>
std::optional<PascalWitness<T>> pascal_witness(const std::vector<T>& coarse,
                                               const std::vector<T>& fine) {
    const std::size_t n = fine.size() - 1;
    if (coarse.size() != n)
        throw index_out_of_range("rows must sit at adjacent horizons");
    const T tol = scalar_traits<T>::tolerance();
    for (std::size_t k = 0; k + 1 <= n; ++k) {
        T lhs = scalar_traits<T>::from_int(n) * coarse[k];
        T rhs = scalar_traits<T>::from_int(n - k) * fine[k] +
                scalar_traits<T>::from_int(k + 1) * fine[k + 1];
        T diff = lhs - rhs;
        if (diff < -tol || diff > tol) return PascalWitness<T>{k, lhs, rhs};
    }
    return std::nullopt;
}

template <backend_scalar T>
std::optional<PascalWitness<T>> check_pascal_recurrence(const Phenomenon<T>& ph, std::size_t n) {
    if (n == 0) throw index_out_of_range("recurrence needs n >= 1");
    return pascal_witness(occupancy_row(ph, n - 1).probs, occupancy_row(ph, n).probs);
}

// Coefficients of Omega_n(1+z) = sum_h C(n,h) a_h z^h: entry h is C(n,h) * a_h.
// Evaluating at z = e^{it} - 1 gives the finite-n characteristic function.
template <backend_scalar T>
std::vector<T> omega_polynomial(const Phenomenon<T>& ph, std::size_t n) {
    ph.require_depth(n);
    std::vector<T> coeffs(n + 1, scalar_traits<T>::zero());
    for (std::size_t h = 0; h <= n; ++h) coeffs[h] = binomial_as<T>(n, h) * ph.moment(h);
    return coeffs;
}

// Characteristic function of the success count at horizon n:
// psi_n(t) = sum_h P(h in n) e^{iht}. For the success *fraction* h/n,
// evaluate at t/n; as n grows, psi_n(t/n) approaches psi_eval(t).
template <backend_scalar T>
std::complex<double> psi_n_eval(const Phenomenon<T>& ph, std::size_t n, double t) {
    OccupancyRow<T> row = occupancy_row(ph, n);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t h = 0; h <= n; ++h)
        acc += scalar_traits<T>::to_double(row.probs[h]) *
               std::exp(std::complex<double>(0.0, double(h) * t));
    return acc;
}

struct PsiValue {
    std::complex<double> value;
    double tail_bound = 0.0;  // rigorous bound on the truncation error
};

// Limit characteristic function psi(t) = sum_h a_h (it)^h / h!. For atomic
// input the series collapses to sum_i w_i e^{i p_i t} exactly (tail 0); for
// moment data the partial sum to the truncation depth is returned along with
// the tail bound sum_{h > N} |t|^h / h! (every |a_h| <= 1).
template <backend_scalar T>
PsiValue psi_eval(const Phenomenon<T>& ph, double t,
                  std::optional<std::size_t> truncation = std::nullopt) {
    if (ph.is_atomic()) {
        std::complex<double> acc(0.0, 0.0);
        for (const Atom<T>& a : ph.atomic().atoms())
            acc += scalar_traits<T>::to_double(a.weight) *
                   std::exp(std::complex<double>(0.0, scalar_traits<T>::to_double(a.p) * t));
        return PsiValue{acc, 0.0};
    }
    const std::size_t depth = ph.moment_sequence().depth();
    std::size_t N = truncation ? *truncation : depth;
    if (N > depth)
        throw depth_exceeded("truncation " + std::to_string(N) + " exceeds available depth " +
                             std::to_string(depth));
    const std::vector<T>& a = ph.moment_sequence().values();
    std::complex<double> term(1.0, 0.0);  // (it)^h / h!
    std::complex<double> acc(0.0, 0.0);
    const std::complex<double> it(0.0, t);
    for (std::size_t h = 0; h <= N; ++h) {
        acc += scalar_traits<T>::to_double(a[h]) * term;
        term *= it / double(h + 1);
    }
    // Tail: u = |t|^h/h! summed for h > N; once the ratio |t|/(h+1) drops
    // below 1 the rest is closed off by a geometric bound.
    double u = std::abs(term);  // |t|^(N+1)/(N+1)!
    double tail = 0.0;
    std::size_t h = N + 1;
    const double at = std::abs(t);
    while (true) {
        double ratio = at / double(h + 1);
        if (ratio < 0.5 || u < 1e-300) {
            tail += u / (1.0 - ratio);  // u * (1 + r + r^2 + ...) with growing h only shrinks r
            break;
        }
        tail += u;
        u *= ratio;
        ++h;
    }
    return PsiValue{acc, tail};
}

}  // namespace phenom
