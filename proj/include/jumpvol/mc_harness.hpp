#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "jumpvol/jump_thresh.hpp"
#include "jumpvol/sde_sim.hpp"
#include "jumpvol/seeds.hpp"
#include "jumpvol/vol_posterior.hpp"

namespace jumpvol
{

// One coverage experiment over a (lambda, tau, n) grid of two-point jump laws.
struct CoverageConfig
{
    DiffusionSpec diffusion;
    std::vector<double> lambda_grid{4.0, 8.0, 16.0, 32.0};
    std::vector<double> tau_grid{1.0, 2.0, 4.0, 8.0};
    std::vector<std::size_t> n_grid{5000};
    std::size_t reps = 1000;
    double level = 0.95;
    ThresholdRule threshold = ThresholdRule::iqr(5.0);
    InverseGammaParams prior{1.0, 1.0};
    Seed base_seed = 20190101;

    void validate() const;
};

struct ReplicationRecord
{
    bool degenerate = false;
    std::string reason;  //!< set when degenerate
    double theta_hat = 0.0;
    double jump_qv_hat = 0.0;
    double kappa = 0.0;
    CredibleInterval interval;
    bool covered = false;
    double width = 0.0;
};

/*!
 * One simulated path through the whole correction pipeline. Degenerate
 * inference is reported in the record instead of thrown.
 */
ReplicationRecord run_replication(DiffusionSpec const& diff,
                                  JumpSpec const& jumps,
                                  std::size_t n,
                                  InverseGammaParams const& prior,
                                  ThresholdRule const& threshold,
                                  double level,
                                  Seed seed);

struct CoverageRow
{
    double lambda = 0.0;
    double tau = 0.0;
    std::size_t n = 0;
    std::size_t reps = 0;
    double coverage = 0.0;  //!< over non-degenerate replications
    double mean_width = 0.0;
    double mc_stderr = 0.0;  //!< sqrt(p (1 - p) / reps)
    std::size_t degenerate_count = 0;
};

/*!
 * Rows in lambda-major, then tau, then n order. Cell c, replication r runs
 * with derive_seed(base_seed, c, r); records are reduced in index order, so
 * the output is bit-identical for any worker count.
 */
std::vector<CoverageRow> run_coverage(CoverageConfig const& config, unsigned workers = 1);

// Header `lambda,tau,n,reps,coverage,mean_width,mc_stderr,degenerate_count`.
void write_coverage_csv(std::ostream& os, std::vector<CoverageRow> const& rows);

}  // namespace jumpvol
