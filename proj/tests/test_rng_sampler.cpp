#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "phenom/errors.hpp"
#include "phenom/mixtures.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/rng.hpp"
#include "phenom/sampler.hpp"
#include "phenom/scalar.hpp"
#include "test_support.hpp"

using namespace phenom;
using testsupport::operator""_r;

TEST_CASE("the block cipher reproduces the reference answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32::block(A4{0, 0, 0, 0}, A2{0, 0}) ==
          A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32::block(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            A2{0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32::block(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            A2{0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("the generator walks the counter and keeps streams apart") {
    const std::uint64_t seed = 0x123456789abcdef0ull;
    const std::array<std::uint32_t, 2> key{0x9abcdef0u, 0x12345678u};

    philox4x32 rng(seed);
    const auto first = philox4x32::block({0, 0, 0, 0}, key);
    for (int i = 0; i < 4; ++i) CHECK(rng.next_u32() == first[i]);
    const auto second = philox4x32::block({1, 0, 0, 0}, key);
    CHECK(rng.next_u32() == second[0]);

    philox4x32 stream7(seed, 7);
    const auto other = philox4x32::block({0, 0, 7, 0}, key);
    CHECK(stream7.next_u32() == other[0]);

    philox4x32 wide(seed, 0x500000001ull);
    const auto split = philox4x32::block({0, 0, 1, 5}, key);
    CHECK(wide.next_u32() == split[0]);

    philox4x32 a(1234, 0), b(1234, 1), c(1234, 0);
    const std::uint64_t va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
    CHECK(va != vb);
    CHECK(va == vc);
}

TEST_CASE("64-bit words splice low then high") {
    philox4x32 rng(0);
    CHECK(rng.next_u64() == ((std::uint64_t(0xe169c58du) << 32) | 0x6627e8d5u));
}

TEST_CASE("53-bit draws stay inside their range") {
    philox4x32 rng(99);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t k = rng.next_u53();
        CHECK(k < (std::uint64_t(1) << 53));
    }
    philox4x32 rng2(99);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng2.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("the exact Bernoulli draw cuts at the stated probability") {
    const std::uint64_t full = (std::uint64_t(1) << 53) - 1;
    const std::uint64_t half = std::uint64_t(1) << 52;

    CHECK(!detail::draw_success<Rational>(0, "0"_r, "1"_r));
    CHECK(!detail::draw_success<Rational>(full, "0"_r, "1"_r));
    CHECK(detail::draw_success<Rational>(0, "1"_r, "1"_r));
    CHECK(detail::draw_success<Rational>(full, "1"_r, "1"_r));
    CHECK(detail::draw_success<Rational>(half - 1, "1"_r, "2"_r));
    CHECK(!detail::draw_success<Rational>(half, "1"_r, "2"_r));

    CHECK(!detail::draw_success<double>(0, 0.0, 1.0));
    CHECK(detail::draw_success<double>(full, 1.0, 1.0));
    CHECK(detail::draw_success<double>(half - 1, 0.5, 1.0));
    CHECK(!detail::draw_success<double>(half, 0.5, 1.0));
}

TEST_CASE("degenerate phenomena sample deterministically") {
    philox4x32 rng(5);
    for (bool b : sample_sequence(constant_phenomenon("1"_r), 16, rng)) CHECK(b);
    for (bool b : sample_sequence(constant_phenomenon("0"_r), 16, rng)) CHECK(!b);
}

TEST_CASE("both representations sample identical sequences from one stream") {
    const auto atomic = testsupport::urn_mixture<Rational>();
    const auto moments = Phenomenon<Rational>(atomic.moments_to(40));
    for (std::uint64_t stream = 0; stream < 4; ++stream) {
        philox4x32 r1(2024, stream), r2(2024, stream);
        const auto s1 = sample_sequence(atomic, 40, r1);
        const auto s2 = sample_sequence(moments, 40, r2);
        CHECK(s1 == s2);
    }
}

TEST_CASE("sampling respects the depth budget") {
    philox4x32 rng(3);
    CHECK_THROWS_AS(sample_sequence(uniform_phenomenon<Rational>(3), 5, rng), depth_exceeded);
    CHECK_NOTHROW(sample_sequence(uniform_phenomenon<Rational>(5), 5, rng));
}

TEST_CASE("runs are reproducible and keyed per sequence index") {
    const auto ph = uniform_phenomenon<double>(12);
    const auto run1 = sample_run(ph, 12, 6, 77);
    const auto run2 = sample_run(ph, 12, 6, 77);
    const auto run3 = sample_run(ph, 12, 6, 78);
    CHECK(run1.seed == 77);
    CHECK(run1.length == 12);
    CHECK(run1.sequences == 6);
    REQUIRE(run1.success_counts.size() == 6);
    CHECK(run1.success_counts == run2.success_counts);
    CHECK(run1.success_counts != run3.success_counts);

    for (std::size_t j = 0; j < 6; ++j) {
        philox4x32 rng(77, j);
        const auto bits = sample_sequence(ph, 12, rng);
        std::size_t h = 0;
        for (bool b : bits) h += b ? 1 : 0;
        CHECK(run1.success_counts[j] == h);
    }
}

TEST_CASE("sampled sequences are exchangeable but not independent") {
    // Under the flat mixing distribution every success count 0..3 has
    // probability 1/4, and each ordering within a count class is equally
    // likely: 000 and 111 get 1/4 each, the six mixed patterns 1/12 each.
    const auto ph = uniform_phenomenon<double>(3);
    const std::size_t trials = 200000;
    std::array<std::size_t, 8> counts{};
    for (std::size_t j = 0; j < trials; ++j) {
        philox4x32 rng(31337, j);
        const auto bits = sample_sequence(ph, 3, rng);
        const std::size_t idx = (bits[0] ? 1 : 0) + (bits[1] ? 2 : 0) + (bits[2] ? 4 : 0);
        counts[idx] += 1;
    }

    const std::array<double, 8> expected_p{1.0 / 4, 1.0 / 12, 1.0 / 12, 1.0 / 12,
                                           1.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 4};
    double chi2 = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double e = trials * expected_p[i];
        const double d = counts[i] - e;
        chi2 += d * d / e;
    }
    CHECK(chi2 < 24.321886347856854);  // chi-square df 7, upper 0.001 point

    // Orderings within the one-success class, conditioned on its total.
    const double class_total = double(counts[1] + counts[2] + counts[4]);
    double chi2_within = 0.0;
    for (int idx : {1, 2, 4}) {
        const double d = counts[idx] - class_total / 3;
        chi2_within += d * d / (class_total / 3);
    }
    CHECK(chi2_within < 13.815510557964274);  // chi-square df 2, upper 0.001 point

    // An independent coin would put 3/8 on the mixed-count classes; the
    // exchangeable law puts 1/4 there. 200k draws separate those decisively.
    const double one_success_rate = class_total / trials;
    CHECK(one_success_rate < 0.30);
    CHECK(one_success_rate > 0.20);
}

TEST_CASE("the empirical mean tracks the mixing mean") {
    const auto ph = mixture_of_hypotheses(urn_scenario<double>(12, 4, 6, 2.0 / 3.0, 1.0 / 3.0));
    const std::size_t n = 20, runs = 4000;
    const auto run = sample_run(ph, n, runs, 7);
    double mean = 0.0;
    for (std::size_t h : run.success_counts) mean += double(h);
    mean /= double(runs) * double(n);

    const double a1 = 1.0 / 3.0, a2 = 37.0 / 297.0;
    const double var_freq = a1 * (1 - a1) / n + (1.0 - 1.0 / n) * (a2 - a1 * a1);
    const double bound = 4.0 * std::sqrt(var_freq / runs);
    CHECK(std::abs(mean - a1) < bound);
}

TEST_CASE("the Monte Carlo check matches its exact reference on the exact backend") {
    const auto ph = testsupport::urn_mixture<Rational>();
    const auto report = monte_carlo_theorem1(ph, 60, 2000, "1/4"_r, "21/50"_r, 42);
    CHECK(report.seed == 42);
    CHECK(report.length == 60);
    CHECK(report.trials == 2000);
    CHECK(report.exact ==
          testsupport::rat("342343197170283312747353162423598323379592333/"
                           "622234326143034528220544299781852595511885824"));
    const double q = scalar_traits<Rational>::to_double(report.exact);
    CHECK(std::abs(q - 0.5501837214483536) < 1e-15);
    CHECK(std::abs(report.standard_error - std::sqrt(q * (1 - q) / 2000.0)) < 1e-15);
    CHECK(std::abs(report.empirical - q) <= 3.0 * report.standard_error);
    REQUIRE(report.run.success_counts.size() == 2000);

    const auto again = monte_carlo_theorem1(ph, 60, 2000, "1/4"_r, "21/50"_r, 42);
    CHECK(again.empirical == report.empirical);
    CHECK(again.run.success_counts == report.run.success_counts);
}

TEST_CASE("the Monte Carlo check holds on the float backend") {
    // Dyadic interval ends, so the float event boundary is unambiguous:
    // 25 < h <= 56.25 counts h in 26..56.
    const auto ph = constant_phenomenon(0.5);
    const auto report = monte_carlo_theorem1(ph, 100, 5000, 0.25, 0.5625, 42);
    CHECK(std::abs(report.exact - 0.9033257659380771) < 1e-9);
    CHECK(std::abs(report.empirical - report.exact) <= 3.0 * report.standard_error);
}

TEST_CASE("the Monte Carlo check rejects empty or backwards requests") {
    const auto ph = testsupport::urn_mixture<Rational>();
    CHECK_THROWS_AS(monte_carlo_theorem1(ph, 10, 0, "1/4"_r, "1/2"_r, 1), index_out_of_range);
    CHECK_THROWS_AS(monte_carlo_theorem1(ph, 10, 50, "1/2"_r, "1/4"_r, 1), index_out_of_range);
    CHECK_THROWS_AS(monte_carlo_theorem1(ph, 10, 50, "1/2"_r, "1/2"_r, 1), index_out_of_range);
}
