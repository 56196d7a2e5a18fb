#pragma once

// Hypothesis models: a phenomenon arising from mutually exclusive causes,
// each a phenomenon in its own right with a prior weight. Provides the
// mixture itself, exact Bayes posteriors under evidence, the two-hypothesis
// urn scenario, and the analytic long-run posterior limit as the observed
// frequency settles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phenom/errors.hpp"
#include "phenom/operators.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/scalar.hpp"

namespace phenom {

template <backend_scalar T>
struct HypothesisComponent {
    std::string label;
    T prior;
    Phenomenon<T> phenomenon;
};

template <backend_scalar T>
class HypothesisModel {
  public:
    explicit HypothesisModel(std::vector<HypothesisComponent<T>> components)
        : components_(std::move(components)) {
        const T tol = scalar_traits<T>::tolerance();
        if (components_.empty())
            throw weights_not_normalized("hypothesis model needs at least one component");
        T sum = scalar_traits<T>::zero();
        for (const auto& c : components_) {
            if (c.label.empty()) throw weights_not_normalized("component label must be nonempty");
            if (!(c.prior > scalar_traits<T>::zero()))
                throw weights_not_normalized("prior of hypothesis '" + c.label +
                                             "' must be positive");
            sum += c.prior;
        }
        if (sum < scalar_traits<T>::one() - tol || sum > scalar_traits<T>::one() + tol)
            throw weights_not_normalized("priors sum to " + scalar_traits<T>::repr(sum) +
                                         ", expected 1");
        for (std::size_t i = 0; i < components_.size(); ++i)
            for (std::size_t j = i + 1; j < components_.size(); ++j)
                if (components_[i].label == components_[j].label)
                    throw weights_not_normalized("duplicate hypothesis label '" +
                                                 components_[i].label + "'");
    }

    const std::vector<HypothesisComponent<T>>& components() const { return components_; }

  private:
    std::vector<HypothesisComponent<T>> components_;
};

// Coefficients multiply index-wise: the joint success of two independent
// phenomena is again exchangeable with a_h = b_h * c_h. Atomic inputs stay
// atomic (atoms p*q, weights multiply); anything else lands on the moments
// representation at the smaller depth.
template <backend_scalar T>
Phenomenon<T> product_independent(const Phenomenon<T>& ph1, const Phenomenon<T>& ph2) {
    if (ph1.is_atomic() && ph2.is_atomic()) {
        std::vector<Atom<T>> atoms;
        for (const Atom<T>& a : ph1.atomic().atoms())
            for (const Atom<T>& b : ph2.atomic().atoms())
                atoms.push_back(Atom<T>{a.p * b.p, a.weight * b.weight});
        return Phenomenon<T>(AtomicMixture<T>(std::move(atoms)));
    }
    std::optional<std::size_t> d1 = ph1.depth_budget(), d2 = ph2.depth_budget();
    std::size_t depth = d1 && d2 ? std::min(*d1, *d2) : (d1 ? *d1 : *d2);
    std::vector<T> a = ph1.moments_to(depth).values();
    const std::vector<T> b = ph2.moments_to(depth).values();
    for (std::size_t h = 0; h <= depth; ++h) a[h] *= b[h];
    return Phenomenon<T>(MomentSequence<T>(std::move(a), derived_from_valid));
}

// The marginal phenomenon: prior-weighted combination of the components.
// All-atomic models combine into one atom list; otherwise the result is a
// moment sequence at the shallowest component depth.
template <backend_scalar T>
Phenomenon<T> mixture_of_hypotheses(const HypothesisModel<T>& model) {
    bool all_atomic = true;
    std::optional<std::size_t> depth;
    for (const auto& c : model.components()) {
        if (auto d = c.phenomenon.depth_budget()) {
            all_atomic = false;
            depth = depth ? std::min(*depth, *d) : *d;
        }
    }
    if (all_atomic) {
        std::vector<Atom<T>> atoms;
        for (const auto& c : model.components())
            for (const Atom<T>& a : c.phenomenon.atomic().atoms())
                atoms.push_back(Atom<T>{a.p, c.prior * a.weight});
        return Phenomenon<T>(AtomicMixture<T>(std::move(atoms)));
    }
    std::vector<T> acc(*depth + 1, scalar_traits<T>::zero());
    for (const auto& c : model.components()) {
        const std::vector<T> vals = c.phenomenon.moments_to(*depth).values();
        for (std::size_t h = 0; h <= *depth; ++h) acc[h] += c.prior * vals[h];
    }
    return Phenomenon<T>(MomentSequence<T>(std::move(acc), derived_from_valid));
}

// Bayes over the components: posterior_i = prior_i * P(evidence | i) / P(evidence),
// with P(evidence) the bracket of the mixture. Returned in model order.
template <backend_scalar T>
std::vector<std::pair<std::string, T>> hypothesis_posterior(const HypothesisModel<T>& model,
                                                            const EvidenceCount& ev) {
    std::vector<std::pair<std::string, T>> out;
    out.reserve(model.components().size());
    T total = scalar_traits<T>::zero();
    for (const auto& c : model.components()) {
        T like = c.prior * bracket(c.phenomenon, ev.successes, ev.total());
        out.emplace_back(c.label, like);
        total += like;
    }
    if (!(total > scalar_traits<T>::tolerance()))
        throw impossible_evidence("evidence (" + std::to_string(ev.successes) + " successes, " +
                                  std::to_string(ev.failures) +
                                  " failures) has probability zero under every hypothesis");
    for (auto& [label, w] : out) w = w / total;
    return out;
}

// Two rival accounts of how an urn of n balls was filled from N available
// (H of them white): either the n balls were drawn at random without
// replacement (hypothesis "a", hypergeometric count of white balls), or the
// white proportion was preserved exactly (hypothesis "b", a constant
// phenomenon at H/N). Draws from the urn are then with replacement.
template <backend_scalar T>
HypothesisModel<T> urn_scenario(std::size_t N, std::size_t H, std::size_t n, const T& alpha,
                                const T& beta) {
    if (n == 0 || N == 0 || N % n != 0 || N / n < 2)
        throw invalid_urn_geometry("need N a multiple of n with N/n >= 2; got N = " +
                                   std::to_string(N) + ", n = " + std::to_string(n));
    if (H > N)
        throw invalid_urn_geometry("white count " + std::to_string(H) + " exceeds total " +
                                   std::to_string(N));
    if ((H * n) % N != 0)
        throw invalid_urn_geometry("proportional filling needs H*n/N integral; got H = " +
                                   std::to_string(H) + ", n = " + std::to_string(n) +
                                   ", N = " + std::to_string(N));
    const T tol = scalar_traits<T>::tolerance();
    T prior_sum = alpha + beta;
    if (!(alpha > scalar_traits<T>::zero()) || !(beta > scalar_traits<T>::zero()) ||
        prior_sum < scalar_traits<T>::one() - tol || prior_sum > scalar_traits<T>::one() + tol)
        throw invalid_urn_geometry("hypothesis priors must be positive and sum to 1");

    std::vector<Atom<T>> atoms;
    const BigInt denom = binomial(N, n);
    for (std::size_t l = 0; l <= n && l <= H; ++l) {
        if (n - l > N - H) continue;  // not enough black balls for this split
        BigInt ways = binomial(H, l) * binomial(N - H, n - l);
        atoms.push_back(Atom<T>{scalar_traits<T>::from_ratio(BigInt(l), BigInt(n)),
                                scalar_traits<T>::from_ratio(ways, denom)});
    }
    std::vector<HypothesisComponent<T>> comps;
    comps.push_back({"a", alpha, Phenomenon<T>(AtomicMixture<T>(std::move(atoms)))});
    comps.push_back(
        {"b", beta, constant_phenomenon(scalar_traits<T>::from_ratio(BigInt(H), BigInt(N)))});
    return HypothesisModel<T>(std::move(comps));
}

// Posterior vector after each prefix of a draw sequence (true = success).
// Entry k is the posterior given the first k draws; entry 0 is the prior.
// Per component only the unnormalized evidence likelihood is evolved, so the
// whole trajectory costs O(length * state size).
template <backend_scalar T>
std::vector<std::vector<std::pair<std::string, T>>> posterior_trajectory(
    const HypothesisModel<T>& model, const std::vector<bool>& draws) {
    struct State {
        // Atomic: unnormalized atom weights. Moments: unnormalized coefficient
        // vector; either way the first aggregate is the prefix likelihood.
        bool atomic;
        std::vector<T> weights;  // atomic only
        std::vector<T> ps;       // atomic only
        std::vector<T> coeffs;   // moments only
        bool dead = false;       // prefix impossible under this hypothesis
    };
    std::vector<State> states;
    for (const auto& c : model.components()) {
        State st;
        st.atomic = c.phenomenon.is_atomic();
        if (st.atomic) {
            for (const Atom<T>& a : c.phenomenon.atomic().atoms()) {
                st.ps.push_back(a.p);
                st.weights.push_back(a.weight);
            }
        } else {
            st.coeffs = c.phenomenon.moment_sequence().values();
        }
        states.push_back(std::move(st));
    }

    auto likelihood = [](const State& st) -> T {
        if (st.dead) return scalar_traits<T>::zero();
        if (st.atomic) {
            T sum = scalar_traits<T>::zero();
            for (const T& w : st.weights) sum += w;
            return sum;
        }
        return st.coeffs[0];
    };

    std::vector<std::vector<std::pair<std::string, T>>> trace;
    trace.reserve(draws.size() + 1);
    for (std::size_t k = 0; k <= draws.size(); ++k) {
        T total = scalar_traits<T>::zero();
        std::vector<std::pair<std::string, T>> row;
        row.reserve(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) {
            T like = model.components()[i].prior * likelihood(states[i]);
            row.emplace_back(model.components()[i].label, like);
            total += like;
        }
        if (!(total > scalar_traits<T>::tolerance()))
            throw impossible_evidence("draw prefix of length " + std::to_string(k) +
                                      " has probability zero under every hypothesis");
        for (auto& [label, w] : row) w = w / total;
        trace.push_back(std::move(row));

        if (k == draws.size()) break;
        const bool success = draws[k];
        for (State& st : states) {
            if (st.dead) continue;
            if (st.atomic) {
                T sum = scalar_traits<T>::zero();
                for (std::size_t j = 0; j < st.weights.size(); ++j) {
                    st.weights[j] = st.weights[j] * (success ? st.ps[j]
                                                            : scalar_traits<T>::one() - st.ps[j]);
                    sum += st.weights[j];
                }
                if (!(sum > scalar_traits<T>::tolerance())) st.dead = true;
            } else {
                if (st.coeffs.size() < 2)
                    throw depth_exceeded(
                        "hypothesis component ran out of moment depth after " +
                        std::to_string(k) + " draws; supply depth >= the draw count");
                if (success) {
                    st.coeffs.erase(st.coeffs.begin());
                } else {
                    for (std::size_t h = 0; h + 1 < st.coeffs.size(); ++h)
                        st.coeffs[h] = st.coeffs[h] - st.coeffs[h + 1];
                    st.coeffs.pop_back();
                }
                if (!(st.coeffs[0] > scalar_traits<T>::tolerance())) st.dead = true;
            }
        }
    }
    return trace;
}

// How to specify the long-run frequency for posterior_limit. Threshold
// frequencies where two atoms' log-likelihood rates coincide are irrational,
// so they get their own symbolic form instead of being squeezed through a
// rational.
template <backend_scalar T>
class FrequencySpec {
  public:
    static FrequencySpec exact(T f) {
        if (f < scalar_traits<T>::zero() || f > scalar_traits<T>::one())
            throw not_a_probability("frequency " + scalar_traits<T>::repr(f) +
                                    " is outside [0, 1]");
        FrequencySpec spec;
        spec.f_ = std::move(f);
        return spec;
    }

    // The frequency at which atoms p1 and p2 have equal log-likelihood rate:
    // f = log((1-p1)/(1-p2)) / (log(p2/p1) + log((1-p1)/(1-p2))).
    static FrequencySpec atom_tie(T p1, T p2) {
        auto interior = [](const T& p) {
            return p > scalar_traits<T>::zero() && p < scalar_traits<T>::one();
        };
        if (!interior(p1) || !interior(p2) || p1 == p2)
            throw not_a_probability("a rate tie needs two distinct atoms strictly inside (0, 1)");
        FrequencySpec spec;
        spec.tie_ = std::make_pair(std::move(p1), std::move(p2));
        return spec;
    }

    bool is_tie() const { return tie_.has_value(); }
    const T& frequency() const { return *f_; }
    const std::pair<T, T>& tie_atoms() const { return *tie_; }

    double frequency_as_double() const {
        if (!is_tie()) return scalar_traits<T>::to_double(*f_);
        const double p1 = scalar_traits<T>::to_double(tie_->first);
        const double p2 = scalar_traits<T>::to_double(tie_->second);
        const double num = std::log((1.0 - p1) / (1.0 - p2));
        return num / (std::log(p2 / p1) + num);
    }

  private:
    FrequencySpec() = default;
    std::optional<T> f_;
    std::optional<std::pair<T, T>> tie_;
};

template <backend_scalar T>
struct PosteriorLimit {
    std::vector<std::pair<std::string, T>> weights;  // per hypothesis, sums to 1
    std::vector<T> carrier;                          // atom values holding the limit mass
    bool near_tie = false;
};

namespace detail {

// Log-likelihood rate of atom p when the observed frequency settles at f,
// as a double: f log p + (1-f) log(1-p), with 0 log 0 = 0.
inline double likelihood_rate(double f, double p) {
    double rate = 0.0;
    if (f > 0.0) {
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        rate += f * std::log(p);
    }
    if (f < 1.0) {
        if (p >= 1.0) return -std::numeric_limits<double>::infinity();
        rate += (1.0 - f) * std::log1p(-p);
    }
    return rate;
}

// Exact likelihood comparison for rational f = a/b: order atoms by
// p^a (1-p)^(b-a), which orders rates without touching logarithms.
inline Rational rate_key(const Rational& p, const BigInt& a, const BigInt& b) {
    using boost::multiprecision::pow;
    const unsigned ua = a.convert_to<unsigned>();
    const unsigned ub = (b - a).convert_to<unsigned>();
    Rational q = 1 - p;
    return Rational(pow(numerator(p), ua) * pow(numerator(q), ub),
                    pow(denominator(p), ua) * pow(denominator(q), ub));
}

}  // namespace detail

// Long-run posterior as the empirical frequency settles at f: mass
// concentrates on the atoms maximizing the likelihood rate, split according
// to prior * component weight. Hypotheses owning no maximizing atom get
// exactly 0. near_tie reports when f sits within 1e-9 of a frequency where
// some other atom would join the maximizing set.
template <backend_scalar T>
PosteriorLimit<T> posterior_limit(const HypothesisModel<T>& model,
                                  const FrequencySpec<T>& spec) {
    struct Entry {
        std::size_t component;
        T p;
        T mass;  // prior * atom weight
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < model.components().size(); ++i) {
        const auto& c = model.components()[i];
        for (const Atom<T>& a : c.phenomenon.atomic().atoms())
            entries.push_back({i, a.p, c.prior * a.weight});
    }

    // Distinct atom values across the whole model.
    std::vector<T> values;
    for (const Entry& e : entries) values.push_back(e.p);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    // Decide the maximizing set.
    std::vector<bool> is_max(values.size(), false);
    const double fd = spec.frequency_as_double();
    if constexpr (scalar_traits<T>::is_exact) {
        if (!spec.is_tie()) {
            const Rational f = spec.frequency();
            const BigInt a = numerator(f), b = denominator(f);
            if (b > 1000000)
                throw not_a_probability(
                    "frequency denominator exceeds 10^6; exact rate comparison would need "
                    "astronomically large powers — round the frequency first");
            std::vector<Rational> keys;
            keys.reserve(values.size());
            for (const T& p : values) keys.push_back(detail::rate_key(p, a, b));
            const Rational best = *std::max_element(keys.begin(), keys.end());
            for (std::size_t i = 0; i < values.size(); ++i) is_max[i] = keys[i] == best;
        } else {
            // The tied pair is maximal by construction of the tie request unless some
            // third atom strictly dominates at the tie frequency; compare those
            // numerically (the tie frequency is irrational).
            const auto& [p1, p2] = spec.tie_atoms();
            bool found1 = false, found2 = false;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (values[i] == p1) found1 = true;
                if (values[i] == p2) found2 = true;
            }
            if (!found1 || !found2)
                throw not_a_probability("tie atoms must both occur in the model");
            const double pair_rate =
                detail::likelihood_rate(fd, scalar_traits<T>::to_double(p1));
            double best_other = -std::numeric_limits<double>::infinity();
            for (const T& p : values) {
                if (p == p1 || p == p2) continue;
                best_other = std::max(
                    best_other, detail::likelihood_rate(fd, scalar_traits<T>::to_double(p)));
            }
            if (best_other > pair_rate + 1e-12) {
                for (std::size_t i = 0; i < values.size(); ++i)
                    is_max[i] = detail::likelihood_rate(
                                    fd, scalar_traits<T>::to_double(values[i])) >
                                best_other - 1e-12;
            } else {
                for (std::size_t i = 0; i < values.size(); ++i)
                    is_max[i] = values[i] == p1 || values[i] == p2 ||
                                detail::likelihood_rate(
                                    fd, scalar_traits<T>::to_double(values[i])) >
                                    pair_rate - 1e-12;
            }
        }
    } else {
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> rates(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            rates[i] = detail::likelihood_rate(fd, values[i]);
            best = std::max(best, rates[i]);
        }
        for (std::size_t i = 0; i < values.size(); ++i) is_max[i] = rates[i] >= best - 1e-12;
    }

    // Near-tie scan in frequency space: would a small nudge of f bring
    // another atom into the maximizing set?
    bool near_tie = false;
    for (std::size_t i = 0; i < values.size() && !near_tie; ++i) {
        if (!is_max[i]) continue;
        const double q1 = scalar_traits<T>::to_double(values[i]);
        if (q1 <= 0.0 || q1 >= 1.0) continue;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (is_max[j]) continue;
            const double q2 = scalar_traits<T>::to_double(values[j]);
            if (q2 <= 0.0 || q2 >= 1.0) continue;
            const double num = std::log((1.0 - q1) / (1.0 - q2));
            const double tie_f = num / (std::log(q2 / q1) + num);
            if (tie_f >= 0.0 && tie_f <= 1.0 && std::abs(fd - tie_f) <= 1e-9) {
                near_tie = true;
                break;
            }
        }
    }

    std::vector<T> per_comp(model.components().size(), scalar_traits<T>::zero());
    T total = scalar_traits<T>::zero();
    std::vector<T> carrier;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (is_max[i]) carrier.push_back(values[i]);
    for (const Entry& e : entries) {
        bool in = false;
        for (const T& c : carrier)
            if (c == e.p) in = true;
        if (!in) continue;
        per_comp[e.component] += e.mass;
        total += e.mass;
    }

    PosteriorLimit<T> out;
    out.carrier = std::move(carrier);
    out.near_tie = near_tie;
    for (std::size_t i = 0; i < model.components().size(); ++i)
        out.weights.emplace_back(model.components()[i].label, per_comp[i] / total);
    return out;
}

}  // namespace phenom
