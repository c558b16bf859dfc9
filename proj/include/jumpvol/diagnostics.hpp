#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "jumpvol/jump_thresh.hpp"
#include "jumpvol/sde_sim.hpp"
#include "jumpvol/vol_posterior.hpp"

namespace jumpvol
{

/*!
 * A univariate density with its effective support.
 *
 * The support [lo, hi] is where the density exceeds 1e-12 of its peak
 * (or the true support, for compactly supported laws). Knots mark interior
 * points where quadrature should split: modes and discontinuities.
 */
class Density
{
  public:
    Density(std::function<double(double)> pdf, double lo, double hi, std::vector<double> knots = {});

    static Density normal(double mean, double variance);
    static Density normal(NormalApprox const& approx);
    static Density inverse_gamma(InverseGammaParams const& ig, double shift = 0.0);
    static Density posterior(GibbsPosterior const& post);
    static Density posterior(ModifiedPosterior const& post);
    static Density uniform(double lo, double hi);

    // Law of X - c for X with this density.
    Density shifted(double c) const;

    double operator()(double x) const { return pdf_(x); }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    std::span<double const> knots() const noexcept { return knots_; }

  private:
    std::function<double(double)> pdf_;
    double lo_;
    double hi_;
    std::vector<double> knots_;
};

/*!
 * Total variation distance (1/2) int |f - g| by adaptive quadrature over the
 * union of both effective supports.
 *
 * Throws ContractViolation if either density's mass over its support is
 * off from one by more than 1e-6.
 */
double tv_distance(Density const& f, Density const& g);

// Ground-truth quantities a posterior is measured against.
struct TruthSummary
{
    double theta_star = 0.0;
    double theta_dagger = 0.0;  //!< theta* + [J] / T
    double kappa_dagger = 1.0;  //!< (theta* / theta_dagger)^2
    double jump_qv = 0.0;
    std::size_t jump_count = 0;

    static TruthSummary make(double theta_star, double jump_qv, double horizon, std::size_t jump_count = 0);
    static TruthSummary from(DiffusionSpec const& diff, PathTruth const& truth);
};

struct DiagnosticOptions
{
    InverseGammaParams prior{1.0, 1.0};
    ThresholdRule threshold = ThresholdRule::iqr(5.0);
    double kappa_floor = default_kappa_floor;
    unsigned workers = 1;
};

struct BvmRow
{
    std::size_t n = 0;
    double tv_gibbs_mean = 0.0;  //!< d(Pi_n, N(theta_hat, 2 kappa' theta'^2 / n))
    double tv_gibbs_stderr = 0.0;
    double tv_modified_mean = 0.0;  //!< d(modified, N(theta_hat - Jhat/T, 2 theta*^2 / n))
    double tv_modified_stderr = 0.0;
    std::size_t used = 0;
    std::size_t degenerate = 0;
};

struct BvmTable
{
    std::vector<BvmRow> rows;
    bool gibbs_decreasing = false;
    bool modified_decreasing = false;
};

// Per-replication TV distances for one path, in the two pairings above.
struct BvmSample
{
    double tv_gibbs = 0.0;
    double tv_modified = 0.0;
};
BvmSample bvm_sample(DiffusionSpec const& diff, SamplePath const& path, DiagnosticOptions const& options);

/*!
 * Mean TV distance between the posteriors and their normal limits along an
 * increasing n grid. Replications hitting a degenerate temperature are
 * counted, not averaged. Needs reps >= 100.
 */
BvmTable bvm_convergence_check(DiffusionSpec const& diff,
                               JumpSpec const& jumps,
                               std::span<std::size_t const> n_grid,
                               std::size_t reps,
                               Seed seed,
                               DiagnosticOptions const& options = {});

// Leading term (2 theta'^2 / n)(1 - ([J] / (T theta'))^2) of Var(theta_hat | J).
double sandwich_variance(TruthSummary const& truth, double horizon, std::size_t n);

struct MseReport
{
    std::size_t n = 0;
    std::size_t reps = 0;
    double theta_dagger = 0.0;
    double empirical_mse = 0.0;  //!< mean of (theta_hat - theta_dagger)^2
    double mse_stderr = 0.0;
    double empirical_variance = 0.0;  //!< sample variance of theta_hat
    double variance_stderr = 0.0;
    double exact_mse = 0.0;         //!< closed form from the noncentral chi-square law
    double mse_formula = 0.0;       //!< 2 theta* theta_dagger / n
    double sandwich = 0.0;          //!< sandwich_variance()
    double mse_formula_discrepancy = 0.0;  //!< (empirical_mse - mse_formula) / mse_formula
    double sandwich_discrepancy = 0.0;     //!< (empirical_mse - sandwich) / sandwich
};

/*!
 * Monte Carlo of theta_hat against one fixed jump realization: only the
 * Brownian increments are redrawn. Needs reps >= 1000.
 */
MseReport mse_oracle(DiffusionSpec const& diff,
                     JumpRealization const& fixed_jumps,
                     std::size_t n,
                     std::size_t reps,
                     Seed seed,
                     unsigned workers = 1);

}  // namespace jumpvol
