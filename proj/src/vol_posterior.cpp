#include "jumpvol/vol_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "jumpvol/errors.hpp"
#include "jumpvol/numerics.hpp"

namespace jumpvol
{

void InverseGammaParams::validate() const
{
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw ConfigError("inverse gamma: shape must be positive and finite");
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw ConfigError("inverse gamma: rate must be positive and finite");
}

double InverseGammaParams::log_pdf(double x) const
{
    if (!(x > 0.0))
        return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double InverseGammaParams::pdf(double x) const
{
    if (!(x > 0.0))
        return 0.0;
    double const y = rate / x;
    return numerics::gamma_density(shape, y) * y / x;
}

double InverseGammaParams::cdf(double x) const
{
    if (!(x > 0.0))
        return 0.0;
    return numerics::gamma_q(shape, rate / x);
}

double InverseGammaParams::ccdf(double x) const
{
    if (!(x > 0.0))
        return 1.0;
    return numerics::gamma_p(shape, rate / x);
}

double InverseGammaParams::quantile(double p) const
{
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError("inverse gamma quantile: p must be in [0, 1]");
    if (p == 0.0)
        return 0.0;
    if (p == 1.0)
        return std::numeric_limits<double>::infinity();

    // Work in whichever tail keeps the target away from 1.
    bool const upper = p > 0.5;
    double const target = upper ? 1.0 - p : p;
    auto residual = [&](double x) {
        return upper ? target - ccdf(x) : cdf(x) - target;
    };

    double lo = mode();
    double hi = lo;
    for (int i = 0; residual(lo) > 0.0; ++i)
    {
        lo *= 0.5;
        if (i > 4000 || lo == 0.0)
            throw NumericError("inverse gamma quantile: cannot bracket from below");
    }
    for (int i = 0; residual(hi) < 0.0; ++i)
    {
        hi *= 2.0;
        if (i > 4000 || !std::isfinite(hi))
            throw NumericError("inverse gamma quantile: cannot bracket from above");
    }

    constexpr double eps = std::numeric_limits<double>::epsilon();
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < 4000 && hi - lo > 4.0 * eps * hi; ++i)
    {
        mid = (hi > 4.0 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        double const r = residual(mid);
        if (r == 0.0)
            break;
        (r < 0.0 ? lo : hi) = mid;
    }
    double const r = residual(mid);
    if (std::abs(r) > 1e-9)
    {
        std::ostringstream msg;
        msg.precision(17);
        msg << "inverse gamma quantile did not converge: shape=" << shape << " rate=" << rate
            << " p=" << p << " bracket=[" << lo << ", " << hi << "] residual=" << r;
        throw NumericError(msg.str());
    }
    return mid;
}

double InverseGammaParams::mean() const
{
    if (!(shape > 1.0))
        return std::numeric_limits<double>::infinity();
    return rate / (shape - 1.0);
}

double InverseGammaParams::variance() const
{
    if (!(shape > 2.0))
        return std::numeric_limits<double>::infinity();
    double const s1 = shape - 1.0;
    return rate * rate / (s1 * s1 * (shape - 2.0));
}

double NormalApprox::pdf(double x) const
{
    double const z = x - mean;
    return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

double compute_mle(std::span<double const> increments, double horizon)
{
    if (increments.empty())
        throw InsufficientDataError("compute_mle: no increments");
    if (!(horizon > 0.0))
        throw ConfigError("compute_mle: horizon must be positive");
    double sum = 0.0;
    for (double d : increments)
        sum += d * d;
    return sum / horizon;
}

double compute_mle(SamplePath const& path)
{
    return compute_mle(path.increments, path.horizon);
}

double compute_kappa(double theta_hat, QvEstimate const& qv, double horizon, double floor)
{
    if (!(horizon > 0.0))
        throw ConfigError("compute_kappa: horizon must be positive");
    if (!(theta_hat > 0.0))
        throw DegenerateDataError("compute_kappa: theta_hat is zero (all increments vanish)");
    // Jhat is a subset sum of T * theta_hat; clamp rounding excess.
    double const ratio = std::clamp(qv.jump_qv_hat / (horizon * theta_hat), 0.0, 1.0);
    double const kappa = (1.0 - ratio) * (1.0 - ratio);
    if (!(kappa > floor))
    {
        std::ostringstream msg;
        msg << "compute_kappa: kappa=" << kappa << " is below the floor " << floor
            << "; nearly all variation was flagged as jumps";
        throw DegenerateInferenceError(msg.str());
    }
    return kappa;
}

GibbsPosterior gibbs_update(InverseGammaParams const& prior,
                            std::size_t n,
                            double theta_hat,
                            double kappa,
                            double floor)
{
    prior.validate();
    if (!(kappa > floor) || !std::isfinite(kappa))
    {
        std::ostringstream msg;
        msg << "gibbs_update: kappa=" << kappa << " must be finite and above " << floor;
        throw DegenerateInferenceError(msg.str());
    }
    if (!(theta_hat >= 0.0))
        throw ConfigError("gibbs_update: theta_hat must be nonnegative");
    double const half_n = 0.5 * static_cast<double>(n) / kappa;
    GibbsPosterior post;
    post.ig = {prior.shape + half_n, prior.rate + half_n * theta_hat};
    post.kappa = kappa;
    post.n = n;
    post.theta_hat = theta_hat;
    return post;
}

GibbsPosterior gibbs_update(InverseGammaParams const& prior,
                            SamplePath const& path,
                            double kappa,
                            double floor)
{
    return gibbs_update(prior, path.n, compute_mle(path), kappa, floor);
}

ModifiedPosterior modify_posterior(GibbsPosterior const& post, QvEstimate const& qv, double horizon)
{
    if (!(horizon > 0.0))
        throw ConfigError("modify_posterior: horizon must be positive");
    post.ig.validate();
    return ModifiedPosterior{post, qv.jump_qv_hat / horizon};
}

CredibleInterval credible_interval(ModifiedPosterior const& post, double level, bool truncate_positive)
{
    if (!(level > 0.0 && level < 1.0))
        throw ConfigError("credible_interval: level must be in (0, 1)");
    double const alpha = 1.0 - level;
    double p_lo = 0.5 * alpha;
    double p_hi = 1.0 - 0.5 * alpha;
    if (truncate_positive && post.shift > 0.0)
    {
        // Mass the shifted law puts on (-shift, 0].
        double const below = post.base.ig.cdf(post.shift);
        if (!(below < 1.0))
            throw DegenerateInferenceError(
                "credible_interval: no posterior mass on theta > 0 to renormalize");
        p_lo = below + p_lo * (1.0 - below);
        p_hi = below + p_hi * (1.0 - below);
    }
    return {level, post.quantile(p_lo), post.quantile(p_hi)};
}

NormalApprox bvm_normal(double theta_hat, QvEstimate const& qv, double horizon, std::size_t n)
{
    if (!(horizon > 0.0) || n == 0)
        throw ConfigError("bvm_normal: need horizon > 0 and n >= 1");
    double const center = theta_hat - qv.jump_qv_hat / horizon;
    if (!(center > 0.0))
        throw DegenerateInferenceError("bvm_normal: plug-in center theta_hat - Jhat/T is not positive");
    return {center, 2.0 * center * center / static_cast<double>(n)};
}

InferenceResult infer_volatility(std::span<double const> increments,
                                 double horizon,
                                 InferenceOptions const& options)
{
    InferenceResult out;
    out.theta_hat = compute_mle(increments, horizon);
    out.qv = estimate_jump_qv(increments, options.threshold.realize(increments));
    out.kappa = compute_kappa(out.theta_hat, out.qv, horizon, options.kappa_floor);
    auto const gibbs = gibbs_update(
        options.prior, increments.size(), out.theta_hat, out.kappa, options.kappa_floor);
    out.posterior = modify_posterior(gibbs, out.qv, horizon);
    out.interval = credible_interval(out.posterior, options.level, options.truncate_positive);
    out.bvm = bvm_normal(out.theta_hat, out.qv, horizon, increments.size());
    return out;
}

}  // namespace jumpvol
