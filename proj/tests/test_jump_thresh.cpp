#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "jumpvol/errors.hpp"
#include "jumpvol/jump_thresh.hpp"
#include "jumpvol/seeds.hpp"

using namespace jumpvol;

namespace
{

DiffusionSpec const baseline{1.0, 10.0, 1.0};
JumpSpec const baseline_jumps{5.0, TwoPointLaw{3.0}};

// Random increments: mostly small normals with a few large spikes.
std::vector<double> random_increments(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> len(4, 400);
    std::normal_distribution<double> normal(0.0, 0.1);
    std::bernoulli_distribution spike(0.02);
    std::vector<double> d(static_cast<std::size_t>(len(rng)));
    for (auto& x : d)
        x = normal(rng) + (spike(rng) ? 3.0 : 0.0);
    return d;
}

}  // namespace

TEST_CASE("interquartile_threshold: hand-computed quartiles")
{
    std::vector<double> const d{1, -2, 3, 4, -100};
    // |D| sorted {1,2,3,4,100}: Q1 at position 2 -> 2, Q3 at position 4 -> 4.
    double const eta = interquartile_threshold(d, 5.0);
    CHECK(eta == 10.0);
    auto const qv = estimate_jump_qv(d, eta);
    CHECK(qv.flagged == std::vector<std::size_t>{4});
    CHECK(qv.jump_qv_hat == 10000.0);

    // Interpolated positions: n = 6 puts Q1 at 2.25, Q3 at 4.75.
    std::vector<double> const six{1, 2, 3, 4, 5, 6};
    CHECK(interquartile_threshold(six, 1.0) == doctest::Approx(4.75 - 2.25));
}

TEST_CASE("interquartile_threshold: degenerate spread and short input")
{
    std::vector<double> const flat{0.3, -0.3, 0.3, 0.3, -0.3};
    double const eta = interquartile_threshold(flat);
    CHECK(std::isinf(eta));
    auto const qv = estimate_jump_qv(flat, eta);
    CHECK(qv.flagged.empty());
    CHECK(qv.jump_qv_hat == 0.0);

    std::vector<double> const three{1, 2, 3};
    CHECK_THROWS_AS(interquartile_threshold(three), InsufficientDataError);
    std::vector<double> const four{1, 2, 3, 4};
    CHECK_THROWS_AS(interquartile_threshold(four, 0.0), ConfigError);
}

TEST_CASE("estimate_jump_qv: direct formula")
{
    std::vector<double> const d{0.1, 5.0, 0.2};
    auto const qv = estimate_jump_qv(d, 1.0);
    CHECK(qv.jump_qv_hat == 25.0);
    CHECK(qv.flagged == std::vector<std::size_t>{1});
    CHECK(qv.eta == 1.0);

    auto const none = estimate_jump_qv(d, std::numeric_limits<double>::infinity());
    CHECK(none.jump_qv_hat == 0.0);
    CHECK(none.flagged.empty());

    CHECK_THROWS_AS(estimate_jump_qv(d, 0.0), ConfigError);
    CHECK_THROWS_AS(estimate_jump_qv(d, -1.0), ConfigError);
}

TEST_CASE("estimate_jump_qv: strict inequality at the threshold")
{
    std::vector<double> const d{1.0, -1.0, 1.0000000000000002};
    auto const qv = estimate_jump_qv(d, 1.0);
    CHECK(qv.flagged == std::vector<std::size_t>{2});
}

TEST_CASE("threshold properties on random data")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.01, 2.0);
    for (int trial = 0; trial < 300; ++trial)
    {
        auto const d = random_increments(rng);
        double total = 0.0;
        for (double x : d)
            total += x * x;

        // Monotone in eta.
        double const e1 = unit(rng), e2 = e1 + unit(rng);
        auto const q1 = estimate_jump_qv(d, e1);
        auto const q2 = estimate_jump_qv(d, e2);
        CHECK(q2.jump_qv_hat <= q1.jump_qv_hat);
        CHECK(q1.jump_qv_hat <= total);

        // Flags are exactly {i : |D_i| > eta}.
        std::size_t k = 0;
        for (std::size_t i = 0; i < d.size(); ++i)
        {
            if (std::abs(d[i]) > e1)
            {
                REQUIRE(k < q1.flagged.size());
                CHECK(q1.flagged[k++] == i);
            }
        }
        CHECK(k == q1.flagged.size());

        // Scale equivariance of the IQR rule.
        double const s = unit(rng) * 10.0;
        std::vector<double> scaled(d);
        for (auto& x : scaled)
            x *= s;
        double const eta = interquartile_threshold(d);
        double const eta_s = interquartile_threshold(scaled);
        CHECK(eta_s == doctest::Approx(s * eta).epsilon(1e-12));
        auto const base = estimate_jump_qv(d, eta);
        auto const sc = estimate_jump_qv(scaled, eta_s);
        if (base.flagged == sc.flagged)
            CHECK(sc.jump_qv_hat == doctest::Approx(s * s * base.jump_qv_hat).epsilon(1e-12));
    }
}

TEST_CASE("ThresholdRule parsing")
{
    CHECK(ThresholdRule::parse("iqr:5").kind() == ThresholdRule::Kind::iqr);
    CHECK(ThresholdRule::parse("iqr:5").value() == 5.0);
    CHECK(ThresholdRule::parse("iqr").value() == 5.0);
    CHECK(ThresholdRule::parse("fixed:0.5").value() == 0.5);
    CHECK(std::isinf(ThresholdRule::parse("fixed:inf").value()));
    CHECK(ThresholdRule::parse("fixed:0.5").to_string() == "fixed:0.5");
    CHECK_THROWS_AS(ThresholdRule::parse("fixed"), ConfigError);
    CHECK_THROWS_AS(ThresholdRule::parse("fixed:-1"), ConfigError);
    CHECK_THROWS_AS(ThresholdRule::parse("iqr:0"), ConfigError);
    CHECK_THROWS_AS(ThresholdRule::parse("median:3"), ConfigError);
    CHECK_THROWS_AS(ThresholdRule::parse("iqr:abc"), ConfigError);
}

TEST_CASE("IQR rule on the baseline configuration")
{
    double flagged = 0.0, jhat = 0.0, truth = 0.0;
    for (Seed s = 0; s < 1000; ++s)
    {
        auto const p = simulate_path(baseline, baseline_jumps, 5000, derive_seed(31, 0, s));
        auto const qv = estimate_jump_qv(p.increments, interquartile_threshold(p.increments));
        flagged += static_cast<double>(qv.flagged.size());
        jhat += qv.jump_qv_hat;
        truth += p.truth->jump_qv;
    }
    CHECK(flagged / 1000.0 >= 4.0);
    CHECK(flagged / 1000.0 <= 6.0);
    CHECK(std::abs(jhat - truth) / truth < 0.05);
}

TEST_CASE("qv_error_rate: grid and reps preconditions")
{
    std::vector<std::size_t> const ok{1000, 4000, 16000};
    std::vector<std::size_t> const two{1000, 16000};
    std::vector<std::size_t> const narrow{1000, 2000, 4000};
    CHECK_THROWS_AS(qv_error_rate(baseline, baseline_jumps, two, 200, 1), ConfigError);
    CHECK_THROWS_AS(qv_error_rate(baseline, baseline_jumps, narrow, 200, 1), ConfigError);
    CHECK_THROWS_AS(qv_error_rate(baseline, baseline_jumps, ok, 199, 1), ConfigError);
}

TEST_CASE("qv_error_rate: no jumps gives mean flagged sum and no slope")
{
    std::vector<std::size_t> const grid{100, 400, 1600};
    JumpSpec const none{0.0, TwoPointLaw{3.0}};
    auto const result = qv_error_rate(baseline, none, grid, 200, 8);
    CHECK(!result.slope);
    REQUIRE(result.points.size() == 3);
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        // With [J] = 0, |Jhat - [J]| is just the flagged sum.
        double mean = 0.0;
        for (std::size_t r = 0; r < 200; ++r)
        {
            auto const p = simulate_path(baseline, none, grid[k], derive_seed(8, k, r));
            mean += estimate_jump_qv(p.increments, interquartile_threshold(p.increments)).jump_qv_hat;
        }
        mean /= 200.0;
        CHECK(result.points[k].mae == doctest::Approx(mean).epsilon(1e-12));
        CHECK(result.points[k].mae < 0.05);
    }
}

TEST_CASE("qv_error_rate: result does not depend on worker count")
{
    std::vector<std::size_t> const grid{200, 800, 3200};
    auto const a = qv_error_rate(baseline, baseline_jumps, grid, 200, 4, ThresholdRule::iqr(), 1);
    auto const b = qv_error_rate(baseline, baseline_jumps, grid, 200, 4, ThresholdRule::iqr(), 3);
    REQUIRE(a.slope);
    REQUIRE(b.slope);
    CHECK(*a.slope == *b.slope);
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(a.points[k].mae == b.points[k].mae);
}

TEST_CASE("fixed threshold between diffusion scale and tau: Jhat - [J] is centered")
{
    // Jhat - [J] = sum over jump windows of 2 mu_i Z_i + Z_i^2 once every
    // jump is caught and no diffusion increment crosses eta; mean ~ 0.
    std::size_t const reps = 1000, n = 20000;
    std::vector<double> err(reps);
    for (std::size_t r = 0; r < reps; ++r)
    {
        auto const p = simulate_path(baseline, baseline_jumps, n, derive_seed(41, 0, r));
        err[r] = estimate_jump_qv(p.increments, 1.0).jump_qv_hat - p.truth->jump_qv;
    }
    double mean = 0.0;
    for (double e : err)
        mean += e;
    mean /= static_cast<double>(reps);
    double ss = 0.0;
    for (double e : err)
        ss += (e - mean) * (e - mean);
    double const se = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
    CHECK(std::abs(mean) < 2.0 * se);
}

TEST_CASE("least_squares_slope")
{
    std::vector<double> const x{0, 1, 2, 3};
    std::vector<double> const y{1, 3, 5, 7};
    CHECK(least_squares_slope(x, y) == doctest::Approx(2.0));
    std::vector<double> const flat{1, 1, 1, 1};
    CHECK_THROWS_AS(least_squares_slope(flat, y), ConfigError);
}
