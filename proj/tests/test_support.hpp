#pragma once

// Shared fixtures for the unit tests: a rational literal, deterministic
// random phenomena driven by the library's own counter RNG (so fixtures are
// reproducible across platforms), and the twelve-ball urn model used as the
// standard worked example throughout.

#include <cstdint>
#include <string>
#include <vector>

#include "phenom/mixtures.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/rng.hpp"
#include "phenom/scalar.hpp"

namespace testsupport {

using phenom::Atom;
using phenom::AtomicMixture;
using phenom::BigInt;
using phenom::HypothesisModel;
using phenom::MomentSequence;
using phenom::Phenomenon;
using phenom::Rational;
using phenom::scalar_traits;

inline Rational operator""_r(const char* text, std::size_t) {
    return scalar_traits<Rational>::parse(text);
}

inline Rational rat(const std::string& text) { return scalar_traits<Rational>::parse(text); }

// Uniformly random grid rational in (0, 1): k/grid for k in 1..grid-1.
template <typename T>
T random_interior(phenom::philox4x32& rng, unsigned grid = 1000) {
    const unsigned k = 1 + rng.next_u32() % (grid - 1);
    return scalar_traits<T>::from_ratio(BigInt(k), BigInt(grid));
}

// Atomic mixture with 1..max_atoms distinct atoms and exactly normalized
// positive weights.
template <typename T>
Phenomenon<T> random_atomic(phenom::philox4x32& rng, unsigned max_atoms = 5) {
    const unsigned count = 1 + rng.next_u32() % max_atoms;
    std::vector<Atom<T>> atoms;
    unsigned long total = 0;
    std::vector<unsigned long> raw;
    for (unsigned i = 0; i < count; ++i) {
        raw.push_back(1 + rng.next_u32() % 99);
        total += raw.back();
    }
    for (unsigned i = 0; i < count; ++i)
        atoms.push_back(Atom<T>{random_interior<T>(rng),
                                scalar_traits<T>::from_ratio(BigInt(raw[i]), BigInt(total))});
    // AtomicMixture merges collisions, so the atom count may shrink; that is
    // fine for property tests.
    return Phenomenon<T>(AtomicMixture<T>(std::move(atoms)));
}

// Valid truncated moment sequence: the coefficient table of a random atomic
// mixture, rebuilt through the fully validating constructor.
template <typename T>
Phenomenon<T> random_moments(phenom::philox4x32& rng, std::size_t depth,
                             unsigned max_atoms = 4) {
    const Phenomenon<T> atoms = random_atomic<T>(rng, max_atoms);
    std::vector<T> values = atoms.moments_to(depth).values();
    return Phenomenon<T>(MomentSequence<T>(std::move(values)));
}

// The urn fixture: 12 balls, 4 white, drawn 6 at a time, priors 2/3 and 1/3.
template <typename T>
HypothesisModel<T> urn_model() {
    return phenom::urn_scenario<T>(12, 4, 6, scalar_traits<T>::from_ratio(BigInt(2), BigInt(3)),
                                   scalar_traits<T>::from_ratio(BigInt(1), BigInt(3)));
}

// The urn fixture collapsed to its marginal mixture:
// atoms {0, 1/6, 1/3, 1/2, 2/3} with weights {2, 16, 63, 16, 2}/99.
template <typename T>
Phenomenon<T> urn_mixture() {
    return phenom::mixture_of_hypotheses(urn_model<T>());
}

}  // namespace testsupport
