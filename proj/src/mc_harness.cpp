#include "jumpvol/mc_harness.hpp"

#include <cmath>
#include <ostream>

#include "jumpvol/errors.hpp"
#include "jumpvol/io.hpp"
#include "jumpvol/parallel.hpp"

namespace jumpvol
{

void CoverageConfig::validate() const
{
    diffusion.validate();
    prior.validate();
    if (reps < 1)
        throw ConfigError("coverage: reps must be at least 1");
    if (lambda_grid.empty() || tau_grid.empty() || n_grid.empty())
        throw ConfigError("coverage: grids must be nonempty");
    if (!(level > 0.0 && level < 1.0))
        throw ConfigError("coverage: level must be in (0, 1)");
    for (double lambda : lambda_grid)
        JumpSpec{lambda, TwoPointLaw{1.0}}.validate();
    for (double tau : tau_grid)
        JumpSpec{0.0, TwoPointLaw{tau}}.validate();
    for (std::size_t n : n_grid)
        if (n < 4)
            throw ConfigError("coverage: every n must be at least 4");
}

ReplicationRecord run_replication(DiffusionSpec const& diff,
                                  JumpSpec const& jumps,
                                  std::size_t n,
                                  InverseGammaParams const& prior,
                                  ThresholdRule const& threshold,
                                  double level,
                                  Seed seed)
{
    auto const path = simulate_path(diff, jumps, n, seed);
    ReplicationRecord rec;
    try
    {
        InferenceOptions options;
        options.prior = prior;
        options.threshold = threshold;
        options.level = level;
        auto const result = infer_volatility(path.increments, path.horizon, options);
        rec.theta_hat = result.theta_hat;
        rec.jump_qv_hat = result.qv.jump_qv_hat;
        rec.kappa = result.kappa;
        rec.interval = result.interval;
        rec.width = result.interval.width();
        rec.covered = result.interval.contains(diff.theta_star);
    }
    catch (DegenerateError const& e)
    {
        rec.degenerate = true;
        rec.reason = e.what();
    }
    return rec;
}

std::vector<CoverageRow> run_coverage(CoverageConfig const& config, unsigned workers)
{
    config.validate();

    struct Cell
    {
        double lambda;
        double tau;
        std::size_t n;
    };
    std::vector<Cell> cells;
    for (double lambda : config.lambda_grid)
        for (double tau : config.tau_grid)
            for (std::size_t n : config.n_grid)
                cells.push_back({lambda, tau, n});

    std::size_t const reps = config.reps;
    std::vector<ReplicationRecord> records(cells.size() * reps);
    parallel_for(records.size(), workers, [&](std::size_t job) {
        std::size_t const c = job / reps;
        std::size_t const r = job % reps;
        auto const& cell = cells[c];
        records[job] = run_replication(config.diffusion,
                                       JumpSpec{cell.lambda, TwoPointLaw{cell.tau}},
                                       cell.n,
                                       config.prior,
                                       config.threshold,
                                       config.level,
                                       derive_seed(config.base_seed, c, r));
    });

    std::vector<CoverageRow> rows;
    rows.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
    {
        CoverageRow row;
        row.lambda = cells[c].lambda;
        row.tau = cells[c].tau;
        row.n = cells[c].n;
        row.reps = reps;
        std::size_t covered = 0, used = 0;
        double width = 0.0;
        for (std::size_t r = 0; r < reps; ++r)
        {
            auto const& rec = records[c * reps + r];
            if (rec.degenerate)
            {
                ++row.degenerate_count;
                continue;
            }
            ++used;
            covered += rec.covered ? 1 : 0;
            width += rec.width;
        }
        if (used > 0)
        {
            row.coverage = static_cast<double>(covered) / static_cast<double>(used);
            row.mean_width = width / static_cast<double>(used);
        }
        else
        {
            row.coverage = std::nan("");
            row.mean_width = std::nan("");
        }
        double const p = row.coverage;
        row.mc_stderr = used > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(reps)) : std::nan("");
        rows.push_back(row);
    }
    return rows;
}

void write_coverage_csv(std::ostream& os, std::vector<CoverageRow> const& rows)
{
    os << "lambda,tau,n,reps,coverage,mean_width,mc_stderr,degenerate_count\n";
    for (auto const& row : rows)
    {
        os << format_double(row.lambda) << ',' << format_double(row.tau) << ',' << row.n << ','
           << row.reps << ',' << format_double(row.coverage) << ',' << format_double(row.mean_width)
           << ',' << format_double(row.mc_stderr) << ',' << row.degenerate_count << '\n';
    }
    if (!os)
        throw IoError("write_coverage_csv: stream write failed");
}

}  // namespace jumpvol
