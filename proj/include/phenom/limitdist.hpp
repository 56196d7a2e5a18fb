#pragma once

// The limiting distribution of the success frequency, and its finite-n
// approximations. Atomic phenomena get an exact step CDF with the half-mass
// convention at jumps: at an atom p of mass m, the CDF reads
// (mass below p) + m/2. Finite-n CDFs use the matching midpoint convention
// at lattice points h = n*xi, which makes the classical uniform identities
// land exactly instead of within O(1/n).

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "phenom/errors.hpp"
#include "phenom/occupancy.hpp"
#include "phenom/operators.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/scalar.hpp"

namespace phenom {

// P(limiting frequency <= xi), half-mass at atoms.
template <backend_scalar T>
T limiting_cdf_exact(const AtomicMixture<T>& mix, const T& xi) {
    T acc = scalar_traits<T>::zero();
    for (const Atom<T>& a : mix.atoms()) {
        if (a.p < xi)
            acc += a.weight;
        else if (a.p == xi)
            acc += a.weight / scalar_traits<T>::from_int(2);
    }
    return acc;
}

template <backend_scalar T>
T limiting_cdf_exact(const Phenomenon<T>& ph, const T& xi) {
    return limiting_cdf_exact(ph.atomic(), xi);
}

// CDF of the frequency after n trials: sum of occupancies with h < n*xi,
// plus half the mass at h = n*xi when that lands on the lattice.
template <backend_scalar T>
T cdf_finite_n(const Phenomenon<T>& ph, const T& xi, std::size_t n) {
    OccupancyRow<T> row = occupancy_row(ph, n);
    const T scaled = xi * scalar_traits<T>::from_int(n);
    T acc = scalar_traits<T>::zero();
    for (std::size_t h = 0; h <= n; ++h) {
        const T hT = scalar_traits<T>::from_int(h);
        if (hT < scaled)
            acc += row.probs[h];
        else if (hT == scaled)
            acc += row.probs[h] / scalar_traits<T>::from_int(2);
    }
    return acc;
}

template <backend_scalar T>
struct Theorem1Result {
    T finite_n;             // P(xi1 < freq <= xi2) at horizon n, CDF convention
    std::optional<T> limit; // exact limiting value; present for atomic input
};

// The frequency-in-an-interval law: finite-n value now, exact limit when the
// mixing distribution is known in atomic form.
template <backend_scalar T>
Theorem1Result<T> theorem1_interval(const Phenomenon<T>& ph, const T& xi1, const T& xi2,
                                    std::size_t n) {
    if (!(xi1 < xi2))
        throw index_out_of_range("interval needs xi1 < xi2; got [" +
                                 scalar_traits<T>::repr(xi1) + ", " +
                                 scalar_traits<T>::repr(xi2) + "]");
    Theorem1Result<T> out{cdf_finite_n(ph, xi2, n) - cdf_finite_n(ph, xi1, n), std::nullopt};
    if (ph.is_atomic())
        out.limit = limiting_cdf_exact(ph.atomic(), xi2) - limiting_cdf_exact(ph.atomic(), xi1);
    return out;
}

// A limiting CDF, either exact (atomic mixing distribution) or a sampled
// finite-n approximation on a uniform grid.
template <backend_scalar T>
class LimitCdf {
  public:
    static LimitCdf atomic(AtomicMixture<T> mix) { return LimitCdf(std::move(mix)); }

    static LimitCdf sampled(std::size_t horizon, std::vector<std::pair<T, T>> points) {
        if (points.size() < 2)
            throw index_out_of_range("a sampled CDF needs at least two grid points");
        return LimitCdf(horizon, std::move(points));
    }

    bool is_atomic() const { return std::holds_alternative<AtomicMixture<T>>(repr_); }

    const AtomicMixture<T>& mixture() const {
        if (!is_atomic())
            throw not_atomic("this CDF is a sampled approximation; no atomic form available");
        return std::get<AtomicMixture<T>>(repr_);
    }

    std::size_t sample_horizon() const { return std::get<Sampled>(repr_).horizon; }

    const std::vector<std::pair<T, T>>& points() const {
        if (is_atomic())
            throw not_atomic("exact atomic CDF carries no grid; evaluate it instead");
        return std::get<Sampled>(repr_).points;
    }

    // Exact for atomic; linear interpolation on the grid otherwise.
    T eval(const T& xi) const {
        if (is_atomic()) return limiting_cdf_exact(std::get<AtomicMixture<T>>(repr_), xi);
        const auto& pts = std::get<Sampled>(repr_).points;
        if (xi <= pts.front().first) return xi < scalar_traits<T>::zero()
                                                ? scalar_traits<T>::zero()
                                                : pts.front().second;
        if (xi >= pts.back().first)
            return xi > scalar_traits<T>::one() ? scalar_traits<T>::one() : pts.back().second;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (xi <= pts[i].first) {
                const T span = pts[i].first - pts[i - 1].first;
                const T t = (xi - pts[i - 1].first) / span;
                return pts[i - 1].second + t * (pts[i].second - pts[i - 1].second);
            }
        }
        return pts.back().second;
    }

  private:
    struct Sampled {
        std::size_t horizon;
        std::vector<std::pair<T, T>> points;
    };
    explicit LimitCdf(AtomicMixture<T> mix) : repr_(std::move(mix)) {}
    LimitCdf(std::size_t horizon, std::vector<std::pair<T, T>> points)
        : repr_(Sampled{horizon, std::move(points)}) {}
    std::variant<AtomicMixture<T>, Sampled> repr_;
};

template <backend_scalar T>
LimitCdf<T> limit_cdf(const Phenomenon<T>& ph) {
    return LimitCdf<T>::atomic(ph.atomic());
}

// Finite-n grid approximation, usable for any representation deep enough.
template <backend_scalar T>
LimitCdf<T> sampled_limit_cdf(const Phenomenon<T>& ph, std::size_t n,
                              std::size_t grid_points = 1001) {
    if (grid_points < 2) throw index_out_of_range("grid needs at least two points");
    OccupancyRow<T> row = occupancy_row(ph, n);
    std::vector<std::pair<T, T>> pts;
    pts.reserve(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k) {
        const T xi = scalar_traits<T>::from_ratio(BigInt(k), BigInt(grid_points - 1));
        const T scaled = xi * scalar_traits<T>::from_int(n);
        T acc = scalar_traits<T>::zero();
        for (std::size_t h = 0; h <= n; ++h) {
            const T hT = scalar_traits<T>::from_int(h);
            if (hT < scaled)
                acc += row.probs[h];
            else if (hT == scaled)
                acc += row.probs[h] / scalar_traits<T>::from_int(2);
        }
        pts.emplace_back(xi, acc);
    }
    return LimitCdf<T>::sampled(n, std::move(pts));
}

// Reflection xi -> 1-xi: atoms reflect; grids reflect point-wise, using
// CDF(xi) -> 1 - CDF(1-xi).
template <backend_scalar T>
LimitCdf<T> cdf_complement(const LimitCdf<T>& cdf) {
    if (cdf.is_atomic()) {
        std::vector<Atom<T>> atoms = cdf.mixture().atoms();
        for (Atom<T>& a : atoms) a.p = scalar_traits<T>::one() - a.p;
        return LimitCdf<T>::atomic(AtomicMixture<T>(std::move(atoms)));
    }
    std::vector<std::pair<T, T>> pts = cdf.points();
    for (auto& [xi, phi] : pts) {
        xi = scalar_traits<T>::one() - xi;
        phi = scalar_traits<T>::one() - phi;
    }
    std::reverse(pts.begin(), pts.end());
    return LimitCdf<T>::sampled(cdf.sample_horizon(), std::move(pts));
}

// Conditioning acts on the mixing distribution by likelihood reweighting;
// only the atomic representation supports it.
template <backend_scalar T>
LimitCdf<T> cdf_condition(const LimitCdf<T>& cdf, const EvidenceCount& ev) {
    Phenomenon<T> conditioned =
        condition_evidence(Phenomenon<T>(cdf.mixture()), ev);
    return LimitCdf<T>::atomic(conditioned.atomic());
}

template <backend_scalar T>
struct MomentConvergence {
    T finite_n;  // E[(successes/n)^m]
    T limit;     // m-th moment of the mixing distribution
};

template <backend_scalar T>
MomentConvergence<T> moment_convergence(const Phenomenon<T>& ph, std::size_t m, std::size_t n) {
    ph.require_depth(std::max(m, n));
    OccupancyRow<T> row = occupancy_row(ph, n);
    T acc = scalar_traits<T>::zero();
    for (std::size_t h = 0; h <= n; ++h)
        acc += scalar_traits<T>::pow_ui(scalar_traits<T>::from_ratio(BigInt(h), BigInt(n)), m) *
               row.probs[h];
    return MomentConvergence<T>{acc, ph.moment(m)};
}

template <backend_scalar T>
struct ConcentrationResult {
    Phenomenon<T> phenomenon;  // the reweighted mixture after all rounds
    T frequency;               // f = r/(r+s)
    bool hypothesis_holds;     // an atom equals f or atoms bracket it
    T mass_near_f;             // total weight within +-delta of f, post-rounds
};

// Iterated conditioning with the same evidence block: round after round of
// (r successes, s failures) drives the mixture toward the atoms nearest the
// evidence frequency f = r/(r+s). When no atom sits at (or around) f the
// computation still runs; hypothesis_holds reports the situation.
template <backend_scalar T>
ConcentrationResult<T> concentration(const Phenomenon<T>& ph, const EvidenceCount& ev,
                                     std::size_t rounds, const T& delta) {
    if (ev.total() == 0)
        throw index_out_of_range("concentration needs at least one trial of evidence");
    const AtomicMixture<T>& mix = ph.atomic();
    const T f = scalar_traits<T>::from_ratio(BigInt(ev.successes), BigInt(ev.total()));

    std::vector<Atom<T>> atoms = mix.atoms();
    T sum = scalar_traits<T>::zero();
    for (Atom<T>& a : atoms) {
        a.weight = a.weight * scalar_traits<T>::pow_ui(a.p, ev.successes * rounds) *
                   scalar_traits<T>::pow_ui(scalar_traits<T>::one() - a.p, ev.failures * rounds);
        sum += a.weight;
    }
    if (!(sum > scalar_traits<T>::tolerance()))
        throw impossible_evidence("no atom survives " + std::to_string(rounds) +
                                  " rounds of this evidence");
    for (Atom<T>& a : atoms) a.weight = a.weight / sum;
    AtomicMixture<T> result(std::move(atoms));

    bool holds = false, below = false, above = false;
    for (const Atom<T>& a : mix.atoms()) {
        if (a.p == f) holds = true;
        if (a.p < f) below = true;
        if (a.p > f) above = true;
    }
    holds = holds || (below && above);

    T near = scalar_traits<T>::zero();
    for (const Atom<T>& a : result.atoms()) {
        const T dist = a.p > f ? a.p - f : f - a.p;
        if (dist <= delta) near += a.weight;
    }
    return ConcentrationResult<T>{Phenomenon<T>(std::move(result)), f, holds, near};
}

template <backend_scalar T>
ConcentrationResult<T> concentration(const Phenomenon<T>& ph, const EvidenceCount& ev,
                                     std::size_t rounds) {
    return concentration(ph, ev, rounds, scalar_traits<T>::from_ratio(BigInt(1), BigInt(20)));
}

}  // namespace phenom
