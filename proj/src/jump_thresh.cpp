#include "jumpvol/jump_thresh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "jumpvol/errors.hpp"
#include "jumpvol/io.hpp"
#include "jumpvol/parallel.hpp"
#include "jumpvol/seeds.hpp"

namespace jumpvol
{
namespace
{

// Linear interpolation at 1-based position 1 + (n - 1) p of sorted data.
double sorted_quantile(std::vector<double> const& sorted, double p)
{
    double const pos = static_cast<double>(sorted.size() - 1) * p;
    auto const lo = static_cast<std::size_t>(std::floor(pos));
    auto const hi = std::min(lo + 1, sorted.size() - 1);
    double const frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

ThresholdRule ThresholdRule::fixed(double eta)
{
    if (!(eta > 0.0))
        throw ConfigError("threshold: fixed eta must be positive");
    return ThresholdRule(Kind::fixed, eta);
}

ThresholdRule ThresholdRule::iqr(double multiplier)
{
    if (!(multiplier > 0.0) || !std::isfinite(multiplier))
        throw ConfigError("threshold: iqr multiplier must be positive and finite");
    return ThresholdRule(Kind::iqr, multiplier);
}

ThresholdRule ThresholdRule::parse(std::string_view text)
{
    auto const colon = text.find(':');
    auto const name = text.substr(0, colon);
    std::optional<double> arg;
    if (colon != std::string_view::npos)
        arg = parse_double(text.substr(colon + 1));
    if (name == "iqr")
        return iqr(arg.value_or(5.0));
    if (name == "fixed")
    {
        if (!arg)
            throw ConfigError("threshold: fixed needs a value, e.g. fixed:0.5");
        return fixed(*arg);
    }
    throw ConfigError("threshold: unknown rule '" + std::string(text) + "'");
}

std::string ThresholdRule::to_string() const
{
    return (kind_ == Kind::fixed ? "fixed:" : "iqr:") + format_double(value_);
}

double ThresholdRule::realize(std::span<double const> increments) const
{
    if (kind_ == Kind::fixed)
        return value_;
    return interquartile_threshold(increments, value_);
}

double interquartile_threshold(std::span<double const> increments, double multiplier)
{
    if (increments.size() < 4)
        throw InsufficientDataError("interquartile_threshold: need at least 4 increments");
    if (!(multiplier > 0.0))
        throw ConfigError("interquartile_threshold: multiplier must be positive");

    std::vector<double> magnitudes(increments.size());
    std::transform(increments.begin(), increments.end(), magnitudes.begin(),
                   [](double d) { return std::abs(d); });
    std::sort(magnitudes.begin(), magnitudes.end());
    double const iqr = sorted_quantile(magnitudes, 0.75) - sorted_quantile(magnitudes, 0.25);
    if (iqr <= 0.0)
        return std::numeric_limits<double>::infinity();
    return multiplier * iqr;
}

QvEstimate estimate_jump_qv(std::span<double const> increments, double eta)
{
    if (!(eta > 0.0))
        throw ConfigError("estimate_jump_qv: eta must be positive");
    QvEstimate out;
    out.eta = eta;
    for (std::size_t i = 0; i < increments.size(); ++i)
    {
        double const d = increments[i];
        if (std::abs(d) > eta)
        {
            out.flagged.push_back(i);
            out.jump_qv_hat += d * d;
        }
    }
    return out;
}

double least_squares_slope(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("least_squares_slope: need matching inputs of length >= 2");
    double const m = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0)
        throw ConfigError("least_squares_slope: x has no spread");
    return sxy / sxx;
}

QvRateResult qv_error_rate(DiffusionSpec const& diff,
                           JumpSpec const& jumps,
                           std::span<std::size_t const> n_grid,
                           std::size_t reps,
                           Seed seed,
                           ThresholdRule const& rule,
                           unsigned workers)
{
    diff.validate();
    jumps.validate();
    std::set<std::size_t> const distinct(n_grid.begin(), n_grid.end());
    if (distinct.size() < 3)
        throw ConfigError("qv_error_rate: n_grid needs at least 3 distinct sizes");
    if (static_cast<double>(*distinct.rbegin()) < 10.0 * static_cast<double>(*distinct.begin()))
        throw ConfigError("qv_error_rate: n_grid must span at least one decade");
    if (*distinct.begin() < 4)
        throw ConfigError("qv_error_rate: every n must be at least 4");
    if (reps < 200)
        throw ConfigError("qv_error_rate: need reps >= 200");

    QvRateResult result;
    std::vector<double> errors(reps);
    for (std::size_t k = 0; k < n_grid.size(); ++k)
    {
        std::size_t const n = n_grid[k];
        parallel_for(reps, workers, [&](std::size_t r) {
            auto const path = simulate_path(diff, jumps, n, derive_seed(seed, k, r));
            auto const qv = estimate_jump_qv(path.increments, rule.realize(path.increments));
            errors[r] = std::abs(qv.jump_qv_hat - path.truth->jump_qv);
        });
        double sum = 0.0, sumsq = 0.0;
        for (double e : errors)
        {
            sum += e;
            sumsq += e * e;
        }
        double const m = static_cast<double>(reps);
        double const mean = sum / m;
        double const var = std::max(0.0, (sumsq - m * mean * mean) / (m - 1.0));
        result.points.push_back({n, mean, std::sqrt(var / m)});
    }

    bool const usable = jumps.rate > 0.0 && std::all_of(result.points.begin(), result.points.end(),
                                    [](QvRatePoint const& p) { return p.mae > 0.0; });
    if (usable)
    {
        std::vector<double> lx, ly;
        for (auto const& p : result.points)
        {
            lx.push_back(std::log(static_cast<double>(p.n)));
            ly.push_back(std::log(p.mae));
        }
        result.slope = least_squares_slope(lx, ly);
    }
    return result;
}

}  // namespace jumpvol
