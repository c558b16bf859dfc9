#include "jumpvol/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "jumpvol/errors.hpp"
#include "jumpvol/io.hpp"

namespace jumpvol
{
namespace
{

template<class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template<class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double draw_size(SizeLaw const& law, std::mt19937_64& rng)
{
    return std::visit(
        overloaded{
            [&](TwoPointLaw const& tp) {
                std::bernoulli_distribution coin(0.5);
                return coin(rng) ? tp.tau : -tp.tau;
            },
            [](FixedLaw const& f) { return f.value; },
            [&](FiniteTableLaw const& t) {
                std::discrete_distribution<std::size_t> pick(t.probabilities.begin(),
                                                             t.probabilities.end());
                return t.values[pick(rng)];
            },
        },
        law);
}

}  // namespace

void DiffusionSpec::validate() const
{
    if (!(std::isfinite(beta)))
        throw ConfigError("diffusion: beta must be finite");
    if (!(theta_star > 0.0) || !std::isfinite(theta_star))
        throw ConfigError("diffusion: theta_star must be positive and finite");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("diffusion: horizon must be positive and finite");
}

void JumpSpec::validate() const
{
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw ConfigError("jumps: rate must be nonnegative and finite");
    std::visit(overloaded{
                   [](TwoPointLaw const& tp) {
                       if (!(tp.tau > 0.0) || !std::isfinite(tp.tau))
                           throw ConfigError("jumps: two_point tau must be positive");
                   },
                   [](FixedLaw const& f) {
                       if (f.value == 0.0 || !std::isfinite(f.value))
                           throw ConfigError("jumps: fixed size must be nonzero and finite");
                   },
                   [](FiniteTableLaw const& t) {
                       if (t.values.empty() || t.values.size() != t.probabilities.size())
                           throw ConfigError("jumps: table needs matching nonempty values and probabilities");
                       for (double v : t.values)
                           if (v == 0.0 || !std::isfinite(v))
                               throw ConfigError("jumps: table sizes must be nonzero and finite");
                       for (double p : t.probabilities)
                           if (!(p >= 0.0))
                               throw ConfigError("jumps: table probabilities must be nonnegative");
                       double const total = std::accumulate(
                           t.probabilities.begin(), t.probabilities.end(), 0.0);
                       if (std::abs(total - 1.0) > 1e-12)
                           throw ConfigError("jumps: table probabilities must sum to 1");
                   },
               },
               size_law);
}

void JumpRealization::validate(double horizon) const
{
    if (times.size() != sizes.size())
        throw ConfigError("jump realization: times and sizes differ in length");
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        if (!(times[i] > 0.0 && times[i] < horizon))
            throw ConfigError("jump realization: times must lie in (0, horizon)");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw ConfigError("jump realization: times must be strictly increasing");
        if (sizes[i] == 0.0 || !std::isfinite(sizes[i]))
            throw ConfigError("jump realization: sizes must be nonzero and finite");
    }
}

JumpRealization simulate_jumps(JumpSpec const& spec, double horizon, Seed seed)
{
    spec.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("simulate_jumps: horizon must be positive");

    std::mt19937_64 rng(seed);
    JumpRealization out;
    double const mean_count = spec.rate * horizon;
    if (mean_count == 0.0)
        return out;

    std::poisson_distribution<std::size_t> count_dist(mean_count);
    std::size_t const count = count_dist(rng);
    std::uniform_real_distribution<double> when(0.0, horizon);

    out.times.resize(count);
    do
    {
        for (auto& t : out.times)
        {
            do
                t = when(rng);
            while (!(t > 0.0 && t < horizon));
        }
        std::sort(out.times.begin(), out.times.end());
    } while (std::adjacent_find(out.times.begin(), out.times.end()) != out.times.end());

    out.sizes.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.sizes.push_back(draw_size(spec.size_law, rng));
    return out;
}

PathTruth bin_jumps(JumpRealization const& jumps, double horizon, std::size_t n)
{
    jumps.validate(horizon);
    PathTruth truth;
    truth.mu.assign(n, 0.0);
    for (std::size_t k = 0; k < jumps.count(); ++k)
    {
        auto window = static_cast<std::size_t>(
            std::floor(jumps.times[k] * static_cast<double>(n) / horizon));
        window = std::min(window, n - 1);
        truth.mu[window] += jumps.sizes[k];
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        if (truth.mu[i] != 0.0)
        {
            truth.jump_windows.push_back(i);
            truth.jump_qv += truth.mu[i] * truth.mu[i];
        }
    }
    truth.jumps = jumps;
    return truth;
}

SamplePath simulate_path(DiffusionSpec const& diff,
                         JumpRealization const& jumps,
                         std::size_t n,
                         Seed seed)
{
    diff.validate();
    if (n < 2)
        throw ConfigError("simulate_path: need n >= 2 increments");

    SamplePath path;
    path.n = n;
    path.horizon = diff.horizon;
    path.delta = diff.horizon / static_cast<double>(n);
    path.truth = bin_jumps(jumps, diff.horizon, n);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    double const drift = diff.beta * path.delta;
    double const scale = std::sqrt(diff.theta_star * path.delta);
    auto const& mu = path.truth->mu;
    path.increments.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        path.increments[i] = drift + scale * normal(rng) + mu[i];
    return path;
}

SamplePath simulate_path(DiffusionSpec const& diff,
                         JumpSpec const& jumps,
                         std::size_t n,
                         Seed seed)
{
    diff.validate();
    auto realization = simulate_jumps(jumps, diff.horizon, substream(seed, 0));
    return simulate_path(diff, realization, n, substream(seed, 1));
}

void write_path_csv(std::ostream& os, SamplePath const& path, bool with_truth)
{
    bool const truth = with_truth && path.truth.has_value();
    os << (truth ? "index,t_i,D_i,mu_i\n" : "index,t_i,D_i\n");
    auto const n = static_cast<double>(path.n);
    for (std::size_t i = 0; i < path.n; ++i)
    {
        double const t = path.horizon * static_cast<double>(i + 1) / n;
        os << (i + 1) << ',' << format_double(t) << ',' << format_double(path.increments[i]);
        if (truth)
            os << ',' << format_double(path.truth->mu[i]);
        os << '\n';
    }
    if (!os)
        throw IoError("write_path_csv: stream write failed");
}

SamplePath read_path_csv(std::istream& is, std::optional<double> horizon)
{
    std::string line;
    if (!std::getline(is, line))
        throw IoError("read_path_csv: empty input");
    auto const header = split_csv_line(line);
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    auto const d_col = column("D_i");
    if (!d_col)
        throw ConfigError("read_path_csv: missing D_i column");
    auto const t_col = column("t_i");
    auto const mu_col = column("mu_i");

    std::vector<double> increments, mu;
    double last_t = 0.0;
    std::size_t row = 1;
    while (std::getline(is, line))
    {
        ++row;
        if (line.empty() || line == "\r")
            continue;
        auto const fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ConfigError("read_path_csv: row " + std::to_string(row)
                              + " has the wrong number of fields");
        increments.push_back(parse_double(fields[*d_col]));
        if (t_col)
            last_t = parse_double(fields[*t_col]);
        if (mu_col)
            mu.push_back(parse_double(fields[*mu_col]));
    }
    if (increments.empty())
        throw InsufficientDataError("read_path_csv: no increments");

    SamplePath path;
    path.n = increments.size();
    if (horizon)
        path.horizon = *horizon;
    else if (t_col)
        path.horizon = last_t;
    else
        throw ConfigError("read_path_csv: no t_i column; the horizon must be given");
    if (!(path.horizon > 0.0) || !std::isfinite(path.horizon))
        throw ConfigError("read_path_csv: horizon must be positive");
    path.delta = path.horizon / static_cast<double>(path.n);
    path.increments = std::move(increments);
    if (mu_col)
    {
        PathTruth truth;
        for (std::size_t i = 0; i < mu.size(); ++i)
        {
            if (mu[i] != 0.0)
            {
                truth.jump_windows.push_back(i);
                truth.jump_qv += mu[i] * mu[i];
            }
        }
        truth.mu = std::move(mu);
        path.truth = std::move(truth);
    }
    return path;
}

}  // namespace jumpvol
