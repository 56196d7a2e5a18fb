#pragma once

// The operator calculus on phenomena.
//
//   complement          - swap the roles of success and failure
//   condition_success   - condition on one observed success
//   condition_failure   - condition on one observed failure
//   condition_evidence  - r successes and s failures at once
//
// All four preserve the representation kind. On moment sequences each
// success consumes one unit of depth and so does each failure; complement is
// depth-neutral. Algebra worth knowing (and tested): complement is an
// involution, success- and failure-conditioning commute, and conditioning on
// a failure is the complement-conjugate of conditioning on a success.

#include <cstddef>
#include <string>
#include <vector>

#include "phenom/combinatorics.hpp"
#include "phenom/errors.hpp"
#include "phenom/occupancy.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/scalar.hpp"

namespace phenom {

struct EvidenceCount {
    std::size_t successes = 0;  // r
    std::size_t failures = 0;   // s
    std::size_t total() const { return successes + failures; }
};

namespace detail {

// Differences of order s at indices r..(depth-s), i.e. the unnormalized
// moment vector after conditioning on (r successes, s failures).
template <backend_scalar T>
std::vector<T> conditioned_numerators(const MomentSequence<T>& seq, std::size_t r,
                                      std::size_t s) {
    const std::vector<T>& a = seq.values();
    std::vector<T> work(a.begin() + r, a.end());
    for (std::size_t j = 1; j <= s; ++j)
        for (std::size_t h = 0; h + j < work.size(); ++h) work[h] = work[h] - work[h + 1];
    work.resize(work.size() - s);
    return work;
}

}  // namespace detail

template <backend_scalar T>
Phenomenon<T> complement(const Phenomenon<T>& ph) {
    if (ph.is_atomic()) {
        std::vector<Atom<T>> atoms = ph.atomic().atoms();
        for (Atom<T>& a : atoms) a.p = scalar_traits<T>::one() - a.p;
        return Phenomenon<T>(AtomicMixture<T>(std::move(atoms)));
    }
    // New moments are the all-failures probabilities: b_j = (difference of
    // order j at index 0). One in-place table pass, capturing the head.
    const std::vector<T>& a = ph.moment_sequence().values();
    std::vector<T> work = a;
    std::vector<T> out(a.size(), scalar_traits<T>::zero());
    out[0] = work[0];
    for (std::size_t j = 1; j < a.size(); ++j) {
        for (std::size_t h = 0; h + j < a.size(); ++h) work[h] = work[h] - work[h + 1];
        out[j] = work[0];
    }
    return Phenomenon<T>(MomentSequence<T>(std::move(out), derived_from_valid));
}

template <backend_scalar T>
Phenomenon<T> condition_evidence(const Phenomenon<T>& ph, const EvidenceCount& ev) {
    const std::size_t r = ev.successes, s = ev.failures;
    if (ph.is_atomic()) {
        std::vector<Atom<T>> atoms = ph.atomic().atoms();
        T sum = scalar_traits<T>::zero();
        for (Atom<T>& a : atoms) {
            a.weight = a.weight * scalar_traits<T>::pow_ui(a.p, r) *
                       scalar_traits<T>::pow_ui(scalar_traits<T>::one() - a.p, s);
            sum += a.weight;
        }
        if (!(sum > scalar_traits<T>::tolerance()))
            throw impossible_evidence("evidence (" + std::to_string(r) + " successes, " +
                                      std::to_string(s) +
                                      " failures) has probability zero under this mixture");
        for (Atom<T>& a : atoms) a.weight = a.weight / sum;
        return Phenomenon<T>(AtomicMixture<T>(std::move(atoms)));
    }
    ph.require_depth(r + s);
    std::vector<T> g = detail::conditioned_numerators(ph.moment_sequence(), r, s);
    const T den = g[0];
    if (!(den > scalar_traits<T>::tolerance()))
        throw impossible_evidence("evidence (" + std::to_string(r) + " successes, " +
                                  std::to_string(s) +
                                  " failures) has probability zero under these moments");
    for (T& v : g) v = v / den;
    return Phenomenon<T>(MomentSequence<T>(std::move(g), derived_from_valid));
}

template <backend_scalar T>
Phenomenon<T> condition_success(const Phenomenon<T>& ph) {
    return condition_evidence(ph, EvidenceCount{1, 0});
}

template <backend_scalar T>
Phenomenon<T> condition_failure(const Phenomenon<T>& ph) {
    return condition_evidence(ph, EvidenceCount{0, 1});
}

// P(exactly h successes in n trials) under ph. Same quantity as
// occupancy_probability; this name reads better in posterior formulas.
template <backend_scalar T>
T bracket(const Phenomenon<T>& ph, std::size_t h, std::size_t n) {
    return occupancy_probability(ph, n, h);
}

// P(next trial succeeds | r successes, s failures observed).
template <backend_scalar T>
T predictive_probability(const Phenomenon<T>& ph, const EvidenceCount& ev) {
    const std::size_t r = ev.successes, s = ev.failures;
    T num, den;
    if (ph.is_atomic()) {
        num = scalar_traits<T>::zero();
        den = scalar_traits<T>::zero();
        for (const Atom<T>& a : ph.atomic().atoms()) {
            T like = a.weight * scalar_traits<T>::pow_ui(a.p, r) *
                     scalar_traits<T>::pow_ui(scalar_traits<T>::one() - a.p, s);
            den += like;
            num += like * a.p;
        }
    } else {
        ph.require_depth(r + s + 1);
        den = ph.moment_sequence().finite_difference(s, r);
        num = ph.moment_sequence().finite_difference(s, r + 1);
    }
    if (!(den > scalar_traits<T>::tolerance()))
        throw impossible_evidence("evidence (" + std::to_string(r) + " successes, " +
                                  std::to_string(s) + " failures) has probability zero");
    return num / den;
}

// P(h successes in the next n trials | r successes, s failures already seen),
// in closed form over the *unconditioned* phenomenon:
//
//   C(h+r,r) C(n-h+s,s) / C(n+r+s,n) * P(h+r in n+r+s) / P(r in r+s)
//
// Tests pin this against the direct route bracket(condition_evidence(ph, ev), h, n).
template <backend_scalar T>
T conditional_occupancy(const Phenomenon<T>& ph, const EvidenceCount& ev, std::size_t n,
                        std::size_t h) {
    if (h > n)
        throw index_out_of_range("occupancy count " + std::to_string(h) + " exceeds trials " +
                                 std::to_string(n));
    const std::size_t r = ev.successes, s = ev.failures;
    ph.require_depth(n + r + s);
    const T den = bracket(ph, r, r + s);
    if (!(den > scalar_traits<T>::tolerance()))
        throw impossible_evidence("evidence (" + std::to_string(r) + " successes, " +
                                  std::to_string(s) + " failures) has probability zero");
    const T coeff = scalar_traits<T>::from_ratio(binomial(h + r, r) * binomial(n - h + s, s),
                                                 binomial(n + r + s, n));
    return coeff * bracket(ph, h + r, n + r + s) / den;
}

}  // namespace phenom
