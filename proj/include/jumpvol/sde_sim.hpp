#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "jumpvol/seeds.hpp"

namespace jumpvol
{

// Drift, volatility coefficient and observation horizon of the continuous part.
struct DiffusionSpec
{
    double beta = 1.0;
    double theta_star = 10.0;
    double horizon = 1.0;

    void validate() const;
};

// Sizes drawn uniformly from {-tau, +tau}.
struct TwoPointLaw
{
    double tau = 3.0;
};

struct FixedLaw
{
    double value = 1.0;
};

// Discrete law over nonzero values; probabilities must sum to one.
struct FiniteTableLaw
{
    std::vector<double> values;
    std::vector<double> probabilities;
};

using SizeLaw = std::variant<TwoPointLaw, FixedLaw, FiniteTableLaw>;

// Compound Poisson jump component.
struct JumpSpec
{
    double rate = 5.0;
    SizeLaw size_law = TwoPointLaw{};

    void validate() const;
};

// Exact jump times in (0, T), strictly increasing, with nonzero sizes.
struct JumpRealization
{
    std::vector<double> times;
    std::vector<double> sizes;

    std::size_t count() const noexcept { return times.size(); }
    void validate(double horizon) const;
};

// Hidden ground truth of a simulated path, binned onto the sampling grid.
struct PathTruth
{
    std::vector<double> mu;                 //!< summed jump sizes per window
    double jump_qv = 0.0;                   //!< sum of mu_i^2
    std::vector<std::size_t> jump_windows;  //!< 0-based i with mu_i != 0
    JumpRealization jumps;
};

struct SamplePath
{
    std::size_t n = 0;
    double delta = 0.0;
    double horizon = 0.0;
    std::vector<double> increments;
    std::optional<PathTruth> truth;
};

JumpRealization simulate_jumps(JumpSpec const& spec, double horizon, Seed seed);

// Bin jumps into the windows [t_{i-1}, t_i) of an n-point equally spaced grid.
PathTruth bin_jumps(JumpRealization const& jumps, double horizon, std::size_t n);

/*!
 * Simulate D_i = beta*dt + sqrt(theta*dt)*Z_i + mu_i on n equal windows.
 *
 * The jump realization is drawn from its own sub-stream of \c seed, so a
 * path and simulate_jumps(spec, horizon, substream(seed, 0)) agree.
 */
SamplePath simulate_path(DiffusionSpec const& diff,
                         JumpSpec const& jumps,
                         std::size_t n,
                         Seed seed);

// Same, against a fixed jump realization (the conditional law given J).
SamplePath simulate_path(DiffusionSpec const& diff,
                         JumpRealization const& jumps,
                         std::size_t n,
                         Seed seed);

// CSV with header `index,t_i,D_i[,mu_i]`; index is 1-based.
void write_path_csv(std::ostream& os, SamplePath const& path, bool with_truth);

/*!
 * Read increments from CSV. Requires a `D_i` column. The horizon is taken
 * from \c horizon if given, else from the last `t_i` value. A `mu_i`
 * column, when present, is loaded as truth.
 */
SamplePath read_path_csv(std::istream& is, std::optional<double> horizon = std::nullopt);

}  // namespace jumpvol
