#pragma once

// Sequential sampling of exchangeable sequences and the Monte Carlo check of
// the frequency-interval law.
//
// Sampling goes through the predictive chain: the next trial succeeds with
// the current predictive probability, then the state absorbs the outcome.
// The chain telescopes, so every ordering of h successes in n trials gets
// probability (occupancy of h)/C(n,h) — exchangeability holds by
// construction, with no mixing-measure draw needed. This also means
// truncated moment sequences sample correctly to their depth.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "phenom/errors.hpp"
#include "phenom/occupancy.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/rng.hpp"
#include "phenom/scalar.hpp"

namespace phenom {

namespace detail {

// Exact Bernoulli draw with probability num/den (den > 0): success iff the
// dyadic uniform u = k/2^53 satisfies u * den < num. On the exact backend
// the comparison is exact, so sampling introduces no rounding anywhere.
template <backend_scalar T>
bool draw_success(std::uint64_t k, const T& num, const T& den) {
    if constexpr (scalar_traits<T>::is_exact) {
        return Rational(BigInt(k), BigInt(1) << 53) * den < num;
    } else {
        return static_cast<double>(k) * 0x1.0p-53 * den < num;
    }
}

}  // namespace detail

template <backend_scalar T>
std::vector<bool> sample_sequence(const Phenomenon<T>& ph, std::size_t n, philox4x32& rng) {
    std::vector<bool> out;
    out.reserve(n);
    if (ph.is_atomic()) {
        const auto& atoms = ph.atomic().atoms();
        if constexpr (scalar_traits<T>::is_exact) {
            // Integer form of the predictive chain: rates n_i/D over a common
            // denominator and weights on one shared scale, so the comparison
            // u*den < num clears to integers and no gcd normalization runs in
            // the loop. The comparisons equal the rational ones exactly, so
            // the drawn bits are identical to the generic route's.
            BigInt rate_den(1), weight_den(1);
            for (const Atom<T>& a : atoms) {
                rate_den = lcm(rate_den, denominator(a.p));
                weight_den = lcm(weight_den, denominator(a.weight));
            }
            std::vector<BigInt> rate, anti, w;
            rate.reserve(atoms.size());
            anti.reserve(atoms.size());
            w.reserve(atoms.size());
            for (const Atom<T>& a : atoms) {
                rate.push_back(BigInt(numerator(a.p) * (rate_den / denominator(a.p))));
                anti.push_back(BigInt(rate_den - rate.back()));
                w.push_back(BigInt(numerator(a.weight) * (weight_den / denominator(a.weight))));
            }
            const BigInt unit = BigInt(1) << 53;
            for (std::size_t step = 0; step < n; ++step) {
                BigInt den(0), num(0);
                for (std::size_t i = 0; i < atoms.size(); ++i) {
                    den += w[i];
                    num += w[i] * rate[i];
                }
                const bool success = BigInt(rng.next_u53()) * den * rate_den < num * unit;
                for (std::size_t i = 0; i < atoms.size(); ++i)
                    w[i] *= success ? rate[i] : anti[i];
                out.push_back(success);
            }
            return out;
        } else {
            std::vector<T> w;
            w.reserve(atoms.size());
            for (const Atom<T>& a : atoms) w.push_back(a.weight);
            for (std::size_t step = 0; step < n; ++step) {
                T num = scalar_traits<T>::zero(), den = scalar_traits<T>::zero();
                for (std::size_t i = 0; i < atoms.size(); ++i) {
                    den += w[i];
                    num += w[i] * atoms[i].p;
                }
                const bool success = detail::draw_success<T>(rng.next_u53(), num, den);
                for (std::size_t i = 0; i < atoms.size(); ++i)
                    w[i] = w[i] * (success ? atoms[i].p : scalar_traits<T>::one() - atoms[i].p);
                out.push_back(success);
            }
            return out;
        }
    }
    ph.require_depth(n);
    // Unnormalized coefficient vector; entry 0 is the prefix likelihood and
    // entry 1 over entry 0 is the predictive probability.
    std::vector<T> v = ph.moment_sequence().values();
    for (std::size_t step = 0; step < n; ++step) {
        const bool success = detail::draw_success<T>(rng.next_u53(), v[1], v[0]);
        if (success) {
            v.erase(v.begin());
        } else {
            for (std::size_t h = 0; h + 1 < v.size(); ++h) v[h] = v[h] - v[h + 1];
            v.pop_back();
        }
        if (!(v[0] > scalar_traits<T>::zero()))
            throw impossible_evidence("predictive state degenerated at step " +
                                      std::to_string(step + 1));
        out.push_back(success);
    }
    return out;
}

struct SampleRun {
    std::uint64_t seed = 0;
    std::size_t length = 0;                  // trials per sequence
    std::size_t sequences = 0;               // number of sequences
    std::vector<std::size_t> success_counts; // one entry per sequence
};

// Every sequence gets its own Philox stream keyed by its index, so the run
// is reproducible regardless of batching or execution order.
template <backend_scalar T>
SampleRun sample_run(const Phenomenon<T>& ph, std::size_t n, std::size_t sequences,
                     std::uint64_t seed) {
    SampleRun run{seed, n, sequences, {}};
    run.success_counts.reserve(sequences);
    for (std::size_t j = 0; j < sequences; ++j) {
        philox4x32 rng(seed, j);
        const std::vector<bool> bits = sample_sequence(ph, n, rng);
        std::size_t h = 0;
        for (bool b : bits) h += b ? 1 : 0;
        run.success_counts.push_back(h);
    }
    return run;
}

template <backend_scalar T>
struct MonteCarloReport {
    std::uint64_t seed = 0;
    std::size_t length = 0;
    std::size_t trials = 0;
    double empirical = 0.0;      // fraction of runs with xi1 < h/n <= xi2
    T exact;                     // probability of that exact event
    double standard_error = 0.0; // sqrt(q(1-q)/trials) at the exact q
    SampleRun run;
};

// Empirical frequency of the event xi1 < h/n <= xi2 against its exact
// probability. The reference is the probability of the event being counted
// (the sum of occupancies strictly above n*xi1 and at most n*xi2), so the
// 3-sigma comparison is statistically square.
template <backend_scalar T>
MonteCarloReport<T> monte_carlo_theorem1(const Phenomenon<T>& ph, std::size_t n,
                                         std::size_t trials, const T& xi1, const T& xi2,
                                         std::uint64_t seed) {
    if (trials == 0) throw index_out_of_range("Monte Carlo needs at least one trial");
    if (!(xi1 < xi2))
        throw index_out_of_range("interval needs xi1 < xi2; got [" +
                                 scalar_traits<T>::repr(xi1) + ", " +
                                 scalar_traits<T>::repr(xi2) + "]");
    OccupancyRow<T> row = occupancy_row(ph, n);
    T exact = scalar_traits<T>::zero();
    const T lo = xi1 * scalar_traits<T>::from_int(n);
    const T hi = xi2 * scalar_traits<T>::from_int(n);
    for (std::size_t h = 0; h <= n; ++h) {
        const T hT = scalar_traits<T>::from_int(h);
        if (lo < hT && (hT < hi || hT == hi)) exact += row.probs[h];
    }

    SampleRun run = sample_run(ph, n, trials, seed);
    std::size_t inside = 0;
    for (std::size_t h : run.success_counts) {
        const T hT = scalar_traits<T>::from_int(h);
        if (lo < hT && (hT < hi || hT == hi)) ++inside;
    }
    const double q = scalar_traits<T>::to_double(exact);
    MonteCarloReport<T> report;
    report.seed = seed;
    report.length = n;
    report.trials = trials;
    report.empirical = static_cast<double>(inside) / static_cast<double>(trials);
    report.exact = exact;
    report.standard_error = std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
    report.run = std::move(run);
    return report;
}

}  // namespace phenom
