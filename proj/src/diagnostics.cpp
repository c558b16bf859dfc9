#include "jumpvol/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jumpvol/errors.hpp"
#include "jumpvol/numerics.hpp"
#include "jumpvol/parallel.hpp"

namespace jumpvol
{
namespace
{

// Densities are cut where they drop below this fraction of their peak.
constexpr double tail_ratio = 1e-12;
constexpr int panels_per_support = 32;

// Root of log(u) - u + 1 = target (target < 0) on the side u > 1 or u < 1.
double ig_tail_ratio(double target, bool above_one)
{
    auto g = [](double u) { return std::log(u) - u + 1.0; };
    double lo, hi;
    if (above_one)
    {
        lo = 1.0;
        hi = 2.0;
        while (g(hi) > target)
            hi *= 2.0;
    }
    else
    {
        lo = 0.5;
        hi = 1.0;
        while (g(lo) > target)
            lo *= 0.5;
    }
    for (int i = 0; i < 200; ++i)
    {
        double const mid = 0.5 * (lo + hi);
        bool const inside = g(mid) > target;
        if (above_one == inside)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct Moments
{
    double mean = 0.0;
    double stderr_ = 0.0;
};

Moments summarize(std::span<double const> values)
{
    Moments out;
    if (values.empty())
        return out;
    double const m = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values)
        sum += v;
    out.mean = sum / m;
    if (values.size() > 1)
    {
        double ss = 0.0;
        for (double v : values)
            ss += (v - out.mean) * (v - out.mean);
        out.stderr_ = std::sqrt(ss / (m - 1.0) / m);
    }
    return out;
}

}  // namespace

Density::Density(std::function<double(double)> pdf, double lo, double hi, std::vector<double> knots)
    : pdf_(std::move(pdf)), lo_(lo), hi_(hi), knots_(std::move(knots))
{
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ContractViolation("Density: support must be a nonempty finite interval");
}

Density Density::normal(double mean, double variance)
{
    if (!(variance > 0.0))
        throw ContractViolation("Density::normal: variance must be positive");
    double const sd = std::sqrt(variance);
    double const reach = std::sqrt(-2.0 * std::log(tail_ratio)) * sd;
    NormalApprox const approx{mean, variance};
    return Density([approx](double x) { return approx.pdf(x); }, mean - reach, mean + reach, {mean});
}

Density Density::normal(NormalApprox const& approx)
{
    return normal(approx.mean, approx.variance);
}

Density Density::inverse_gamma(InverseGammaParams const& ig, double shift)
{
    ig.validate();
    // log f(x) - log f(mode) = (a + 1)(log u - u + 1) with u = mode / x.
    double const target = std::log(tail_ratio) / (ig.shape + 1.0);
    double const mode = ig.mode();
    double const lo = mode / ig_tail_ratio(target, true);
    double const hi = mode / ig_tail_ratio(target, false);
    return Density([ig, shift](double x) { return ig.pdf(x + shift); },
                   lo - shift,
                   hi - shift,
                   {mode - shift});
}

Density Density::posterior(GibbsPosterior const& post)
{
    return inverse_gamma(post.ig);
}

Density Density::posterior(ModifiedPosterior const& post)
{
    return inverse_gamma(post.base.ig, post.shift);
}

Density Density::uniform(double lo, double hi)
{
    if (!(hi > lo))
        throw ContractViolation("Density::uniform: need lo < hi");
    double const h = 1.0 / (hi - lo);
    return Density([=](double x) { return (x >= lo && x <= hi) ? h : 0.0; }, lo, hi);
}

Density Density::shifted(double c) const
{
    std::vector<double> knots(knots_);
    for (auto& k : knots)
        k -= c;
    auto pdf = pdf_;
    return Density([pdf, c](double x) { return pdf(x + c); }, lo_ - c, hi_ - c, std::move(knots));
}

double tv_distance(Density const& f, Density const& g)
{
    auto breakpoints_of = [](Density const& d) {
        std::vector<double> pts;
        double const step = (d.hi() - d.lo()) / panels_per_support;
        for (int i = 0; i <= panels_per_support; ++i)
            pts.push_back(d.lo() + step * i);
        pts.back() = d.hi();
        for (double k : d.knots())
            if (k > d.lo() && k < d.hi())
                pts.push_back(k);
        return pts;
    };
    auto const f_pts = breakpoints_of(f);
    auto const g_pts = breakpoints_of(g);

    auto check_mass = [](Density const& d, std::vector<double> const& pts, char const* which) {
        double const mass = numerics::integrate_pieces([&d](double x) { return d(x); }, pts, 1e-10, 1e-10).value;
        if (!(std::abs(mass - 1.0) <= 1e-6))
        {
            std::ostringstream msg;
            msg.precision(12);
            msg << "tv_distance: density " << which << " integrates to " << mass
                << " over its support";
            throw ContractViolation(msg.str());
        }
    };
    check_mass(f, f_pts, "A");
    check_mass(g, g_pts, "B");

    std::vector<double> pts(f_pts);
    pts.insert(pts.end(), g_pts.begin(), g_pts.end());
    auto const diff = numerics::integrate_pieces(
        [&](double x) { return std::abs(f(x) - g(x)); }, pts, 1e-10, 1e-10);
    return std::clamp(0.5 * diff.value, 0.0, 1.0);
}

TruthSummary TruthSummary::make(double theta_star, double jump_qv, double horizon, std::size_t jump_count)
{
    if (!(theta_star > 0.0) || !(horizon > 0.0) || !(jump_qv >= 0.0))
        throw ConfigError("TruthSummary: need theta_star > 0, horizon > 0, jump_qv >= 0");
    TruthSummary t;
    t.theta_star = theta_star;
    t.jump_qv = jump_qv;
    t.jump_count = jump_count;
    t.theta_dagger = theta_star + jump_qv / horizon;
    double const r = theta_star / t.theta_dagger;
    t.kappa_dagger = r * r;
    return t;
}

TruthSummary TruthSummary::from(DiffusionSpec const& diff, PathTruth const& truth)
{
    return make(diff.theta_star, truth.jump_qv, diff.horizon, truth.jump_windows.size());
}

BvmSample bvm_sample(DiffusionSpec const& diff, SamplePath const& path, DiagnosticOptions const& options)
{
    if (!path.truth)
        throw ConfigError("bvm_sample: path has no truth");
    auto const truth = TruthSummary::from(diff, *path.truth);
    double const n = static_cast<double>(path.n);
    double const theta_hat = compute_mle(path);
    auto const qv = estimate_jump_qv(path.increments, options.threshold.realize(path.increments));
    double const kappa = compute_kappa(theta_hat, qv, path.horizon, options.kappa_floor);
    auto const gibbs = gibbs_update(options.prior, path.n, theta_hat, kappa, options.kappa_floor);
    auto const modified = modify_posterior(gibbs, qv, path.horizon);

    BvmSample out;
    out.tv_gibbs = tv_distance(
        Density::posterior(gibbs),
        Density::normal(theta_hat,
                        2.0 * truth.kappa_dagger * truth.theta_dagger * truth.theta_dagger / n));
    out.tv_modified = tv_distance(
        Density::posterior(modified),
        Density::normal(theta_hat - modified.shift, 2.0 * truth.theta_star * truth.theta_star / n));
    return out;
}

BvmTable bvm_convergence_check(DiffusionSpec const& diff,
                               JumpSpec const& jumps,
                               std::span<std::size_t const> n_grid,
                               std::size_t reps,
                               Seed seed,
                               DiagnosticOptions const& options)
{
    diff.validate();
    jumps.validate();
    if (n_grid.empty() || !std::is_sorted(n_grid.begin(), n_grid.end())
        || std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end())
        throw ConfigError("bvm_convergence_check: n_grid must be strictly increasing");
    if (reps < 100)
        throw ConfigError("bvm_convergence_check: need reps >= 100");

    BvmTable table;
    for (std::size_t k = 0; k < n_grid.size(); ++k)
    {
        std::vector<BvmSample> samples(reps);
        std::vector<char> ok(reps, 0);
        parallel_for(reps, options.workers, [&](std::size_t r) {
            auto const path = simulate_path(diff, jumps, n_grid[k], derive_seed(seed, k, r));
            try
            {
                samples[r] = bvm_sample(diff, path, options);
                ok[r] = 1;
            }
            catch (DegenerateError const&)
            {
            }
        });
        std::vector<double> gibbs, modified;
        for (std::size_t r = 0; r < reps; ++r)
        {
            if (!ok[r])
                continue;
            gibbs.push_back(samples[r].tv_gibbs);
            modified.push_back(samples[r].tv_modified);
        }
        auto const g = summarize(gibbs);
        auto const m = summarize(modified);
        BvmRow row;
        row.n = n_grid[k];
        row.tv_gibbs_mean = g.mean;
        row.tv_gibbs_stderr = g.stderr_;
        row.tv_modified_mean = m.mean;
        row.tv_modified_stderr = m.stderr_;
        row.used = gibbs.size();
        row.degenerate = reps - gibbs.size();
        table.rows.push_back(row);
    }

    table.gibbs_decreasing = true;
    table.modified_decreasing = true;
    for (std::size_t k = 1; k < table.rows.size(); ++k)
    {
        table.gibbs_decreasing &= table.rows[k].tv_gibbs_mean < table.rows[k - 1].tv_gibbs_mean;
        table.modified_decreasing
            &= table.rows[k].tv_modified_mean < table.rows[k - 1].tv_modified_mean;
    }
    return table;
}

double sandwich_variance(TruthSummary const& truth, double horizon, std::size_t n)
{
    if (n == 0 || !(horizon > 0.0))
        throw ConfigError("sandwich_variance: need n >= 1 and horizon > 0");
    double const td = truth.theta_dagger;
    double const r = truth.jump_qv / (horizon * td);
    return 2.0 * td * td / static_cast<double>(n) * (1.0 - r * r);
}

MseReport mse_oracle(DiffusionSpec const& diff,
                     JumpRealization const& fixed_jumps,
                     std::size_t n,
                     std::size_t reps,
                     Seed seed,
                     unsigned workers)
{
    diff.validate();
    if (reps < 1000)
        throw ConfigError("mse_oracle: need reps >= 1000");
    if (n < 2)
        throw ConfigError("mse_oracle: need n >= 2");

    auto const binned = bin_jumps(fixed_jumps, diff.horizon, n);
    auto const truth = TruthSummary::from(diff, binned);

    std::vector<double> estimates(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        auto const path = simulate_path(diff, fixed_jumps, n, derive_seed(seed, 0, r));
        estimates[r] = compute_mle(path);
    });

    MseReport rep;
    rep.n = n;
    rep.reps = reps;
    rep.theta_dagger = truth.theta_dagger;

    double const m = static_cast<double>(reps);
    std::vector<double> sq(reps);
    for (std::size_t r = 0; r < reps; ++r)
    {
        double const e = estimates[r] - truth.theta_dagger;
        sq[r] = e * e;
    }
    auto const mse = summarize(sq);
    rep.empirical_mse = mse.mean;
    rep.mse_stderr = mse.stderr_;

    double mean = 0.0;
    for (double e : estimates)
        mean += e;
    mean /= m;
    double m2 = 0.0, m4 = 0.0;
    for (double e : estimates)
    {
        double const d = (e - mean) * (e - mean);
        m2 += d;
        m4 += d * d;
    }
    rep.empirical_variance = m2 / (m - 1.0);
    double const pop2 = m2 / m;
    rep.variance_stderr = std::sqrt(std::max(0.0, m4 / m - pop2 * pop2) / m);

    // theta_hat = sum D_i^2 / T with D_i ~ N(m_i, s2) independent given J.
    double const delta = diff.horizon / static_cast<double>(n);
    double const s2 = diff.theta_star * delta;
    double sum_m2 = 0.0;
    for (double mu : binned.mu)
    {
        double const mi = diff.beta * delta + mu;
        sum_m2 += mi * mi;
    }
    double const T = diff.horizon;
    double const exact_mean = (static_cast<double>(n) * s2 + sum_m2) / T;
    double const exact_var = (2.0 * static_cast<double>(n) * s2 * s2 + 4.0 * s2 * sum_m2) / (T * T);
    double const bias = exact_mean - truth.theta_dagger;
    rep.exact_mse = exact_var + bias * bias;

    rep.mse_formula = 2.0 * truth.theta_star * truth.theta_dagger / static_cast<double>(n);
    rep.sandwich = sandwich_variance(truth, diff.horizon, n);
    rep.mse_formula_discrepancy = (rep.empirical_mse - rep.mse_formula) / rep.mse_formula;
    rep.sandwich_discrepancy = (rep.empirical_mse - rep.sandwich) / rep.sandwich;
    return rep;
}

}  // namespace jumpvol
