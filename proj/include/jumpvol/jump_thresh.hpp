#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jumpvol/sde_sim.hpp"

namespace jumpvol
{

/*!
 * How the truncation level eta is chosen.
 *
 * Fixed uses eta directly (+inf disables jump detection). Iqr sets
 * eta = c * IQR(|D_1|, ..., |D_n|).
 */
class ThresholdRule
{
  public:
    enum class Kind
    {
        fixed,
        iqr
    };

    static ThresholdRule fixed(double eta);
    static ThresholdRule iqr(double multiplier = 5.0);

    // "iqr:5", "iqr", "fixed:0.5", "fixed:inf".
    static ThresholdRule parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    double value() const noexcept { return value_; }
    std::string to_string() const;

    // Realized eta for the given increments.
    double realize(std::span<double const> increments) const;

  private:
    ThresholdRule(Kind kind, double value) : kind_(kind), value_(value) {}

    Kind kind_;
    double value_;
};

struct QvEstimate
{
    double eta = 0.0;
    double jump_qv_hat = 0.0;
    std::vector<std::size_t> flagged;  //!< 0-based indices with |D_i| > eta
};

/*!
 * Interquartile-range threshold c * (Q3 - Q1) of the absolute increments.
 *
 * Quartiles interpolate linearly between order statistics at 1-based
 * position 1 + (n - 1) p. A zero IQR returns +inf: no outlier structure,
 * so nothing is flagged.
 */
double interquartile_threshold(std::span<double const> increments, double multiplier = 5.0);

// Sum of D_i^2 over |D_i| > eta (strict).
QvEstimate estimate_jump_qv(std::span<double const> increments, double eta);

struct QvRatePoint
{
    std::size_t n = 0;
    double mae = 0.0;
    double mae_stderr = 0.0;
};

struct QvRateResult
{
    std::vector<QvRatePoint> points;
    //! Least-squares slope of log MAE on log n; empty when the jump rate is
    //! zero (nothing to estimate) or some MAE is exactly zero.
    std::optional<double> slope;
};

/*!
 * Empirical convergence rate of the jump QV estimator.
 *
 * For each n, simulates \c reps paths with truth and averages |Jhat - [J]|.
 * The grid needs at least three distinct sizes spanning a decade, and reps
 * must be at least 200. Replication r at grid index k uses
 * derive_seed(seed, k, r), so the result does not depend on \c workers.
 */
QvRateResult qv_error_rate(DiffusionSpec const& diff,
                           JumpSpec const& jumps,
                           std::span<std::size_t const> n_grid,
                           std::size_t reps,
                           Seed seed,
                           ThresholdRule const& rule = ThresholdRule::iqr(),
                           unsigned workers = 1);

// Ordinary least-squares slope of y on x.
double least_squares_slope(std::span<double const> x, std::span<double const> y);

}  // namespace jumpvol
