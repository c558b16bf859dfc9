#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "jumpvol/errors.hpp"
#include "jumpvol/mc_harness.hpp"

using namespace jumpvol;

namespace
{

DiffusionSpec const baseline{1.0, 10.0, 1.0};

CoverageConfig single_cell(double lambda, double tau, std::size_t reps)
{
    CoverageConfig cfg;
    cfg.lambda_grid = {lambda};
    cfg.tau_grid = {tau};
    cfg.n_grid = {5000};
    cfg.reps = reps;
    return cfg;
}

}  // namespace

TEST_CASE("derive_seed: deterministic and sensitive to every argument")
{
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    // cell and rep are not interchangeable.
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("derive_seed: no collisions over a million (cell, rep) pairs")
{
    std::vector<Seed> seeds;
    seeds.reserve(1000000);
    for (std::uint64_t c = 0; c < 1000; ++c)
        for (std::uint64_t r = 0; r < 1000; ++r)
            seeds.push_back(derive_seed(20190101, c, r));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("derive_seed: indices must fit in 32 bits")
{
    CHECK_NOTHROW(derive_seed(0, 0xFFFFFFFFULL, 0xFFFFFFFFULL));
    CHECK_THROWS_AS(derive_seed(0, 1ULL << 32, 0), ConfigError);
    CHECK_THROWS_AS(derive_seed(0, 0, 1ULL << 32), ConfigError);
}

TEST_CASE("run_replication: same seed, same record")
{
    JumpSpec const jumps{5.0, TwoPointLaw{3.0}};
    auto const a = run_replication(baseline, jumps, 5000, {1.0, 1.0}, ThresholdRule::iqr(), 0.95, 99);
    auto const b = run_replication(baseline, jumps, 5000, {1.0, 1.0}, ThresholdRule::iqr(), 0.95, 99);
    CHECK(!a.degenerate);
    CHECK(a.theta_hat == b.theta_hat);
    CHECK(a.interval.lo == b.interval.lo);
    CHECK(a.interval.hi == b.interval.hi);
    CHECK(a.width == doctest::Approx(a.interval.hi - a.interval.lo));
}

TEST_CASE("run_replication: baseline default seed covers theta*")
{
    JumpSpec const jumps{5.0, TwoPointLaw{3.0}};
    auto const rec = run_replication(baseline, jumps, 5000, {1.0, 1.0}, ThresholdRule::iqr(), 0.95, 20190101);
    CHECK(!rec.degenerate);
    CHECK(rec.covered);
    CHECK(rec.kappa > 0.0);
    CHECK(rec.kappa < 1.0);
}

TEST_CASE("run_replication: degenerate temperature is recorded, not thrown")
{
    JumpSpec const jumps{5.0, TwoPointLaw{3.0}};
    // Every increment is flagged, so Jhat = T theta_hat and kappa = 0.
    auto const rec = run_replication(baseline, jumps, 500, {1.0, 1.0}, ThresholdRule::fixed(1e-9), 0.95, 1);
    CHECK(rec.degenerate);
    CHECK(!rec.reason.empty());
    CHECK(!rec.covered);
}

TEST_CASE("run_coverage: no jumps is calibrated")
{
    auto cfg = single_cell(0.0, 1.0, 1000);
    auto const rows = run_coverage(cfg, 4);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].degenerate_count == 0);
    CHECK(std::abs(rows[0].coverage - 0.95) < 3.0 * std::sqrt(0.95 * 0.05 / 1000.0));
}

TEST_CASE("run_coverage: lambda = 4, tau = 2 lands near nominal")
{
    auto const rows = run_coverage(single_cell(4.0, 2.0, 1000), 4);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].coverage >= 0.93);
    CHECK(rows[0].coverage <= 0.97);
    CHECK(rows[0].mc_stderr == doctest::Approx(std::sqrt(rows[0].coverage * (1.0 - rows[0].coverage) / 1000.0)));
}

TEST_CASE("run_coverage: one replication gives a 0 or 1 coverage")
{
    auto const rows = run_coverage(single_cell(4.0, 2.0, 1), 1);
    REQUIRE(rows.size() == 1);
    CHECK((rows[0].coverage == 0.0 || rows[0].coverage == 1.0));
    CHECK(rows[0].mc_stderr == 0.0);
}

TEST_CASE("run_coverage: cell order and worker independence")
{
    CoverageConfig cfg;
    cfg.lambda_grid = {4.0, 8.0};
    cfg.tau_grid = {1.0, 2.0, 4.0};
    cfg.n_grid = {500, 1000};
    cfg.reps = 30;
    auto const a = run_coverage(cfg, 1);
    auto const b = run_coverage(cfg, 4);
    REQUIRE(a.size() == 12);
    CHECK(a[0].lambda == 4.0);
    CHECK(a[0].tau == 1.0);
    CHECK(a[0].n == 500);
    CHECK(a[1].n == 1000);
    CHECK(a[2].tau == 2.0);
    CHECK(a[6].lambda == 8.0);

    std::ostringstream sa, sb;
    write_coverage_csv(sa, a);
    write_coverage_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("lambda,tau,n,reps,coverage,mean_width,mc_stderr,degenerate_count\n", 0) == 0);
}

TEST_CASE("run_coverage: degenerate replications are counted and excluded")
{
    auto cfg = single_cell(4.0, 2.0, 20);
    cfg.n_grid = {500};
    cfg.threshold = ThresholdRule::fixed(1e-9);
    auto const rows = run_coverage(cfg, 2);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].degenerate_count == 20);
    CHECK(std::isnan(rows[0].coverage));
    std::ostringstream os;
    write_coverage_csv(os, rows);
    CHECK(os.str().find(",nan,") != std::string::npos);
}

TEST_CASE("CoverageConfig validation")
{
    auto bad = single_cell(4.0, 2.0, 0);
    CHECK_THROWS_AS(run_coverage(bad), ConfigError);
    bad = single_cell(-1.0, 2.0, 10);
    CHECK_THROWS_AS(run_coverage(bad), ConfigError);
    bad = single_cell(4.0, 0.0, 10);
    CHECK_THROWS_AS(run_coverage(bad), ConfigError);
    bad = single_cell(4.0, 2.0, 10);
    bad.level = 1.0;
    CHECK_THROWS_AS(run_coverage(bad), ConfigError);
    bad = single_cell(4.0, 2.0, 10);
    bad.n_grid = {3};
    CHECK_THROWS_AS(run_coverage(bad), ConfigError);
    bad = single_cell(4.0, 2.0, 10);
    bad.tau_grid.clear();
    CHECK_THROWS_AS(run_coverage(bad), ConfigError);
}
