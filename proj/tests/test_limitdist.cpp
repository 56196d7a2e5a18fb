#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "phenom/errors.hpp"
#include "phenom/limitdist.hpp"
#include "phenom/mixtures.hpp"
#include "phenom/occupancy.hpp"
#include "phenom/operators.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/scalar.hpp"
#include "test_support.hpp"

using namespace phenom;
using testsupport::operator""_r;

namespace {

// Point masses at 0, 1/2, 1 with weights 1/4, 1/2, 1/4.
Phenomenon<Rational> three_spikes() {
    return Phenomenon<Rational>(AtomicMixture<Rational>({{"0"_r, "1/4"_r},
                                                         {"1/2"_r, "1/2"_r},
                                                         {"1"_r, "1/4"_r}}));
}

}  // namespace

TEST_CASE("the limiting CDF carries half the mass at each atom") {
    const auto ph = three_spikes();
    CHECK(limiting_cdf_exact(ph, "-1/10"_r) == 0);
    CHECK(limiting_cdf_exact(ph, "0"_r) == "1/8"_r);
    CHECK(limiting_cdf_exact(ph, "1/4"_r) == "1/4"_r);
    CHECK(limiting_cdf_exact(ph, "1/2"_r) == "1/2"_r);
    CHECK(limiting_cdf_exact(ph, "3/4"_r) == "3/4"_r);
    CHECK(limiting_cdf_exact(ph, "1"_r) == "7/8"_r);
    CHECK(limiting_cdf_exact(ph, "11/10"_r) == 1);

    const auto urn = testsupport::urn_mixture<Rational>();
    CHECK(limiting_cdf_exact(urn, "0"_r) == "1/99"_r);
    CHECK(limiting_cdf_exact(urn, "1/6"_r) == "10/99"_r);
    CHECK(limiting_cdf_exact(urn, "1/3"_r) == "1/2"_r);
    CHECK(limiting_cdf_exact(urn, "2/3"_r) == "98/99"_r);
    CHECK(limiting_cdf_exact(urn, "9/10"_r) == 1);
}

TEST_CASE("the finite-n CDF of the uniform sequence is the midpoint staircase") {
    const auto u = uniform_phenomenon<Rational>(12);
    for (std::size_t h = 0; h <= 10; ++h)
        CHECK(cdf_finite_n(u, Rational(h, 10), 10) == Rational(2 * h + 1, 22));
    // Off the lattice there is no half-mass term.
    CHECK(cdf_finite_n(u, "1/4"_r, 10) == "3/11"_r);
}

TEST_CASE("interval probabilities report finite-n and limit values") {
    CHECK_THROWS_AS(theorem1_interval(three_spikes(), "1/2"_r, "1/2"_r, 4), index_out_of_range);
    CHECK_THROWS_AS(theorem1_interval(three_spikes(), "3/5"_r, "2/5"_r, 4), index_out_of_range);

    // Moment representation: finite-n value only.
    const auto u = uniform_phenomenon<Rational>(64);
    const auto ur = theorem1_interval(u, "1/5"_r, "1/2"_r, 64);
    CHECK(ur.finite_n == "3/10"_r);
    CHECK(!ur.limit.has_value());

    // Atomic: the exact limit rides along.
    const auto spikes = theorem1_interval(three_spikes(), "1/4"_r, "3/4"_r, 8);
    CHECK(spikes.finite_n == "105/256"_r);
    REQUIRE(spikes.limit.has_value());
    CHECK(*spikes.limit == "1/2"_r);

    const auto urn = testsupport::urn_mixture<Rational>();
    const auto res = theorem1_interval(urn, "1/4"_r, "1/2"_r, 6);
    CHECK(res.finite_n ==
          occupancy_probability(urn, 6, 2) + occupancy_probability(urn, 6, 3) / 2);
    REQUIRE(res.limit.has_value());
    CHECK(*res.limit == "71/99"_r);
}

TEST_CASE("atomic limit CDFs evaluate exactly and refuse grid queries") {
    const auto urn = testsupport::urn_mixture<Rational>();
    const auto cdf = limit_cdf(urn);
    REQUIRE(cdf.is_atomic());
    CHECK(cdf.eval("1/3"_r) == "1/2"_r);
    CHECK(cdf.eval("0"_r) == "1/99"_r);
    CHECK(cdf.eval("-1"_r) == 0);
    CHECK(cdf.eval("2"_r) == 1);
    CHECK(cdf.mixture().atoms().size() == 5);
    CHECK_THROWS_AS(cdf.points(), not_atomic);

    CHECK_THROWS_AS(limit_cdf(uniform_phenomenon<Rational>(6)), not_atomic);
}

TEST_CASE("sampled limit CDFs interpolate their finite-n grid") {
    const auto u = uniform_phenomenon<Rational>(32);
    const auto cdf = sampled_limit_cdf(u, 32, 11);
    REQUIRE(!cdf.is_atomic());
    CHECK(cdf.sample_horizon() == 32);
    REQUIRE(cdf.points().size() == 11);
    for (std::size_t k = 0; k < 11; ++k) {
        CHECK(cdf.points()[k].first == Rational(k, 10));
        CHECK(cdf.points()[k].second == cdf_finite_n(u, Rational(k, 10), 32));
    }
    CHECK_THROWS_AS(cdf.mixture(), not_atomic);

    // Clamping outside [0, 1], plateau values at the ends, interpolation
    // halfway between grid nodes.
    CHECK(cdf.eval("-1/10"_r) == 0);
    CHECK(cdf.eval("11/10"_r) == 1);
    CHECK(cdf.eval("0"_r) == "1/66"_r);
    CHECK(cdf.eval("1"_r) == "65/66"_r);
    CHECK(cdf.eval("3/20"_r) == "1/6"_r);

    CHECK_THROWS_AS(sampled_limit_cdf(u, 8, 1), index_out_of_range);
    CHECK_THROWS_AS(LimitCdf<Rational>::sampled(5, {{"0"_r, "0"_r}}), index_out_of_range);
}

TEST_CASE("complementing a CDF reflects it through one half") {
    const auto urn = testsupport::urn_mixture<Rational>();
    const auto cdf = limit_cdf(urn);
    const auto flipped = cdf_complement(cdf);
    for (const auto& xi :
         {"0"_r, "1/6"_r, "1/4"_r, "1/3"_r, "1/2"_r, "2/3"_r, "5/6"_r, "1"_r})
        CHECK(flipped.eval(xi) == 1 - cdf.eval(1 - xi));
    const auto back = cdf_complement(flipped);
    const auto& orig = cdf.mixture().atoms();
    const auto& twice = back.mixture().atoms();
    REQUIRE(twice.size() == orig.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
        CHECK(twice[i].p == orig[i].p);
        CHECK(twice[i].weight == orig[i].weight);
    }

    const auto sampled = sampled_limit_cdf(uniform_phenomenon<Rational>(16), 16, 9);
    const auto sflip = cdf_complement(sampled);
    CHECK(sflip.sample_horizon() == 16);
    REQUIRE(sflip.points().size() == 9);
    for (std::size_t k = 0; k < 9; ++k) {
        CHECK(sflip.points()[k].first == Rational(k, 8));
        CHECK(sflip.points()[k].second == 1 - sampled.points()[8 - k].second);
    }
    const auto sback = cdf_complement(sflip);
    for (std::size_t k = 0; k < 9; ++k)
        CHECK(sback.points()[k].second == sampled.points()[k].second);
}

TEST_CASE("conditioning a CDF reweights the mixing distribution") {
    const auto urn = testsupport::urn_mixture<Rational>();
    const auto conditioned = cdf_condition(limit_cdf(urn), EvidenceCount{2, 1});
    const auto direct = condition_evidence(urn, EvidenceCount{2, 1});
    const auto& got = conditioned.mixture().atoms();
    const auto& want = direct.atomic().atoms();
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].p == want[i].p);
        CHECK(got[i].weight == want[i].weight);
    }

    const auto sampled = sampled_limit_cdf(uniform_phenomenon<Rational>(8), 8, 5);
    CHECK_THROWS_AS(cdf_condition(sampled, EvidenceCount{1, 0}), not_atomic);
}

TEST_CASE("frequency moments converge to mixing moments at rate 1/n") {
    const auto u = uniform_phenomenon<Rational>(250);
    const auto at10 = moment_convergence(u, 2, 10);
    CHECK(at10.finite_n == "7/20"_r);
    CHECK(at10.limit == "1/3"_r);
    for (std::size_t n : {10u, 50u, 250u}) {
        const auto mc = moment_convergence(u, 2, n);
        CHECK(mc.finite_n - mc.limit == Rational(1, 6 * n));
    }

    // The mean needs no limit at all: it is exact at every horizon.
    const auto urn = testsupport::urn_mixture<Rational>();
    for (std::size_t n : {1u, 6u, 17u}) {
        const auto mc = moment_convergence(urn, 1, n);
        CHECK(mc.finite_n == "1/3"_r);
        CHECK(mc.limit == "1/3"_r);
    }

    // Second moment: the finite-n excess is (a1 - a2)/n exactly.
    for (std::size_t n : {2u, 9u}) {
        const auto mc = moment_convergence(urn, 2, n);
        CHECK(mc.finite_n - mc.limit == (urn.moment(1) - urn.moment(2)) / Rational(n));
    }
    const auto u30 = uniform_phenomenon<Rational>(30);
    for (std::size_t n : {5u, 30u}) {
        const auto mc = moment_convergence(u30, 2, n);
        CHECK(mc.finite_n - mc.limit == (u30.moment(1) - u30.moment(2)) / Rational(n));
    }

    const auto mc0 = moment_convergence(urn, 0, 4);
    CHECK(mc0.finite_n == 1);
    CHECK(mc0.limit == 1);

    CHECK_THROWS_AS(moment_convergence(uniform_phenomenon<Rational>(5), 7, 5), depth_exceeded);
    CHECK_THROWS_AS(moment_convergence(uniform_phenomenon<Rational>(5), 2, 6), depth_exceeded);
}

TEST_CASE("repeated evidence concentrates the mixture on the observed frequency") {
    const auto ph = Phenomenon<Rational>(
        AtomicMixture<Rational>({{"1/5"_r, "1/2"_r}, {"7/10"_r, "1/2"_r}}));
    const auto res = concentration(ph, EvidenceCount{7, 3}, 20);
    const Rational tiny = scalar_traits<Rational>::pow_ui("1/10"_r, 50);
    CHECK(res.frequency == "7/10"_r);
    CHECK(res.hypothesis_holds);
    CHECK(res.mass_near_f > 1 - tiny);
    for (std::size_t m = 1; m <= 4; ++m) {
        const Rational target = scalar_traits<Rational>::pow_ui("7/10"_r, m);
        const Rational diff = res.phenomenon.moment(m) - target;
        CHECK(diff < tiny);
        CHECK(diff > -tiny);
    }
}

TEST_CASE("atoms bracketing the frequency count as explaining it") {
    const auto ph = Phenomenon<Rational>(
        AtomicMixture<Rational>({{"3/5"_r, "1/2"_r}, {"4/5"_r, "1/2"_r}}));
    const auto res = concentration(ph, EvidenceCount{7, 3}, 3);
    CHECK(res.hypothesis_holds);
    CHECK(res.mass_near_f == 0);  // both atoms sit 1/10 away, past the default 1/20
    const auto wide = concentration(ph, EvidenceCount{7, 3}, 3, "1/10"_r);
    CHECK(wide.mass_near_f == 1);
}

TEST_CASE("a frequency no atom explains is reported, not thrown") {
    const auto ph = Phenomenon<Rational>(
        AtomicMixture<Rational>({{"1/10"_r, "1/2"_r}, {"1/5"_r, "1/2"_r}}));
    const auto res = concentration(ph, EvidenceCount{7, 3}, 5);
    CHECK(!res.hypothesis_holds);
    CHECK(res.mass_near_f == 0);
    // The likelier atom still hoovers up the weight.
    const auto& atoms = res.phenomenon.atomic().atoms();
    REQUIRE(atoms.size() == 2);
    CHECK(atoms[1].p == "1/5"_r);
    CHECK(atoms[1].weight > 1 - scalar_traits<Rational>::pow_ui("1/10"_r, 9));
}

TEST_CASE("concentration rejects degenerate inputs") {
    const auto dead = Phenomenon<Rational>(
        AtomicMixture<Rational>({{"0"_r, "1/2"_r}, {"1"_r, "1/2"_r}}));
    CHECK_THROWS_AS(concentration(dead, EvidenceCount{1, 1}, 1), impossible_evidence);
    CHECK_THROWS_AS(concentration(three_spikes(), EvidenceCount{0, 0}, 3), index_out_of_range);
    CHECK_THROWS_AS(concentration(uniform_phenomenon<Rational>(6), EvidenceCount{1, 1}, 2),
                    not_atomic);
}

TEST_CASE("the finite-n grid hugs the limiting CDF away from the atoms") {
    const auto urn = mixture_of_hypotheses(urn_scenario<double>(12, 4, 6, 2.0 / 3.0, 1.0 / 3.0));
    const auto exact_cdf = limit_cdf(urn);
    const auto grid = sampled_limit_cdf(urn, 2000, 101);
    const std::vector<double> atoms{0.0, 1.0 / 6, 1.0 / 3, 0.5, 2.0 / 3};
    for (int k = 0; k <= 100; ++k) {
        const double xi = k / 100.0;
        double dist = 1.0;
        for (double a : atoms) dist = std::min(dist, std::abs(xi - a));
        if (dist < 0.05) continue;
        CHECK(std::abs(grid.eval(xi) - exact_cdf.eval(xi)) < 0.01);
    }
}
