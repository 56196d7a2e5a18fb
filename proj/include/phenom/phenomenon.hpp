#pragma once

// A phenomenon is an exchangeable binary process, carried in one of two
// representations:
//
//   atomic   - a finite mixture of coin flips: atoms (p_i, weight_i). Closed
//              under every operator here and answers queries at any depth.
//   moments  - a truncated moment sequence. Depth-limited, but this is the
//              form external data arrives in when no mixture is known.
//
// Operators preserve the representation kind. Queries that need a mixture
// (limiting distributions, concentration) throw not_atomic on moment data
// rather than silently inventing one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "phenom/errors.hpp"
#include "phenom/moments.hpp"
#include "phenom/scalar.hpp"

namespace phenom {

template <backend_scalar T>
struct Atom {
    T p;       // per-trial success probability
    T weight;  // mixture mass, > 0
};

template <backend_scalar T>
class AtomicMixture {
  public:
    // Sorts by p, merges duplicates, drops zero weights, and checks the
    // result is a probability vector over probabilities.
    explicit AtomicMixture(std::vector<Atom<T>> atoms) : atoms_(std::move(atoms)) {
        const T tol = scalar_traits<T>::tolerance();
        for (const Atom<T>& a : atoms_) {
            if constexpr (!scalar_traits<T>::is_exact) {
                if (!std::isfinite(a.p) || !std::isfinite(a.weight))
                    throw atom_out_of_range("atom fields must be finite");
            }
            if (a.p < -tol || a.p > scalar_traits<T>::one() + tol)
                throw atom_out_of_range("atom p = " + scalar_traits<T>::repr(a.p) +
                                        " is outside [0, 1]");
            if (a.weight < scalar_traits<T>::zero())
                throw weights_not_normalized("atom weight " + scalar_traits<T>::repr(a.weight) +
                                             " is negative");
        }
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom<T>& x, const Atom<T>& y) { return x.p < y.p; });
        std::vector<Atom<T>> merged;
        for (const Atom<T>& a : atoms_) {
            if (a.weight == scalar_traits<T>::zero()) continue;
            if (!merged.empty() && merged.back().p == a.p)
                merged.back().weight += a.weight;
            else
                merged.push_back(a);
        }
        atoms_ = std::move(merged);
        if (atoms_.empty())
            throw weights_not_normalized("mixture has no atom with positive weight");
        T sum = scalar_traits<T>::zero();
        for (const Atom<T>& a : atoms_) sum += a.weight;
        if (sum < scalar_traits<T>::one() - tol || sum > scalar_traits<T>::one() + tol)
            throw weights_not_normalized("atom weights sum to " + scalar_traits<T>::repr(sum) +
                                         ", expected 1");
    }

    // Rescale a positive, not-necessarily-normalized weight set. Used after
    // conditioning, where weights arrive as prior * likelihood.
    static AtomicMixture normalized(std::vector<Atom<T>> atoms) {
        T sum = scalar_traits<T>::zero();
        for (const Atom<T>& a : atoms) sum += a.weight;
        if (!(sum > scalar_traits<T>::zero()))
            throw weights_not_normalized("cannot normalize: total weight is not positive");
        for (Atom<T>& a : atoms) a.weight = a.weight / sum;
        return AtomicMixture(std::move(atoms));
    }

    const std::vector<Atom<T>>& atoms() const { return atoms_; }

    // E[p^h] = sum_i w_i p_i^h.
    T moment(std::size_t h) const {
        T acc = scalar_traits<T>::zero();
        for (const Atom<T>& a : atoms_) acc += a.weight * scalar_traits<T>::pow_ui(a.p, h);
        return acc;
    }

    std::vector<T> moments_to(std::size_t depth) const {
        std::vector<T> out(depth + 1, scalar_traits<T>::zero());
        if constexpr (scalar_traits<T>::is_exact) {
            for (const Atom<T>& a : atoms_) {
                T power = scalar_traits<T>::one();
                for (std::size_t h = 0; h <= depth; ++h) {
                    out[h] += a.weight * power;
                    power *= a.p;
                }
            }
        } else {
            // Exact dyadic accumulation with one rounding per moment. Naive
            // double products drift by ~depth ulps, and the difference tables
            // downstream amplify any input error by ~2^order, so the moments
            // are made as accurate as doubles can carry them.
            std::vector<BigInt> acc_m(depth + 1, BigInt(0));
            std::vector<int> acc_e(depth + 1, 0);
            auto add = [](BigInt& M, int& E, BigInt m2, int e2) {
                if (m2 == 0) return;
                if (M == 0) {
                    M = std::move(m2);
                    E = e2;
                    return;
                }
                if (e2 < E) {
                    M <<= static_cast<unsigned>(E - e2);
                    E = e2;
                }
                M += m2 << static_cast<unsigned>(e2 - E);
            };
            for (const Atom<T>& a : atoms_) {
                int we = 0, pe = 0;
                const BigInt wm(static_cast<long long>(std::ldexp(std::frexp(a.weight, &we), 53)));
                const BigInt pm(static_cast<long long>(std::ldexp(std::frexp(a.p, &pe), 53)));
                BigInt pw(1);
                long long pwe = 0;
                for (std::size_t h = 0; h <= depth; ++h) {
                    add(acc_m[h], acc_e[h], wm * pw, static_cast<int>((we - 53) + pwe));
                    pw *= pm;
                    pwe += pe - 53;
                }
            }
            for (std::size_t h = 0; h <= depth; ++h)
                out[h] = detail::dyadic_to_double(acc_m[h], acc_e[h]);
        }
        return out;
    }

  private:
    std::vector<Atom<T>> atoms_;
};

template <backend_scalar T>
class Phenomenon {
  public:
    Phenomenon(AtomicMixture<T> m) : repr_(std::move(m)) {}
    Phenomenon(MomentSequence<T> seq) : repr_(std::move(seq)) {}

    bool is_atomic() const { return std::holds_alternative<AtomicMixture<T>>(repr_); }

    const AtomicMixture<T>& atomic() const {
        if (!is_atomic())
            throw not_atomic("operation needs an atomic mixture; this phenomenon carries "
                             "only a truncated moment sequence");
        return std::get<AtomicMixture<T>>(repr_);
    }

    const MomentSequence<T>& moment_sequence() const {
        return std::get<MomentSequence<T>>(repr_);
    }

    // nullopt means unbounded (atomic representation).
    std::optional<std::size_t> depth_budget() const {
        if (is_atomic()) return std::nullopt;
        return moment_sequence().depth();
    }

    // The probability that h given trials all succeed; equivalently the h-th
    // moment of the mixing distribution.
    T moment(std::size_t h) const {
        if (is_atomic()) return atomic().moment(h);
        return moment_sequence().at(h);
    }

    MomentSequence<T> moments_to(std::size_t depth) const {
        if (is_atomic())
            return MomentSequence<T>(atomic().moments_to(depth), derived_from_valid);
        require_depth(depth);
        const std::vector<T>& v = moment_sequence().values();
        return MomentSequence<T>(std::vector<T>(v.begin(), v.begin() + depth + 1),
                                 derived_from_valid);
    }

    void require_depth(std::size_t needed) const {
        if (!is_atomic() && needed > moment_sequence().depth())
            throw depth_exceeded("query needs depth " + std::to_string(needed) +
                                 " but the moment sequence is truncated at depth " +
                                 std::to_string(moment_sequence().depth()));
    }

  private:
    std::variant<AtomicMixture<T>, MomentSequence<T>> repr_;
};

// Deterministic coin: every trial succeeds with probability p.
template <backend_scalar T>
Phenomenon<T> constant_phenomenon(const T& p) {
    return Phenomenon<T>(AtomicMixture<T>({Atom<T>{p, scalar_traits<T>::one()}}));
}

// Moments of the uniform mixing density: a_h = 1/(h+1), truncated at depth.
template <backend_scalar T>
Phenomenon<T> uniform_phenomenon(std::size_t depth) {
    std::vector<T> values;
    values.reserve(depth + 1);
    for (std::size_t h = 0; h <= depth; ++h)
        values.push_back(scalar_traits<T>::from_ratio(BigInt(1), BigInt(h + 1)));
    return Phenomenon<T>(MomentSequence<T>(std::move(values)));
}

template <backend_scalar T>
Phenomenon<T> atomic_mixture(std::vector<Atom<T>> atoms) {
    return Phenomenon<T>(AtomicMixture<T>(std::move(atoms)));
}

}  // namespace phenom
