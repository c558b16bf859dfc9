#pragma once

#include <cstddef>
#include <span>

#include "jumpvol/jump_thresh.hpp"
#include "jumpvol/sde_sim.hpp"

namespace jumpvol
{

// Temperatures below this mean essentially all variation was flagged as jumps.
inline constexpr double default_kappa_floor = 1e-6;

// Inverse-gamma law, density proportional to x^(-shape-1) exp(-rate/x) on x > 0.
struct InverseGammaParams
{
    double shape = 1.0;
    double rate = 1.0;

    void validate() const;

    double log_pdf(double x) const;
    double pdf(double x) const;
    double cdf(double x) const;
    double ccdf(double x) const;
    //! Bisection on the regularized incomplete gamma. Throws NumericError
    //! if the CDF residual at the root exceeds 1e-9.
    double quantile(double p) const;
    double mean() const;      //!< requires shape > 1
    double variance() const;  //!< requires shape > 2
    double mode() const noexcept { return rate / (shape + 1.0); }
};

// Tempered posterior, prior times likelihood^(1/kappa).
struct GibbsPosterior
{
    InverseGammaParams ig;
    double kappa = 1.0;
    std::size_t n = 0;
    double theta_hat = 0.0;
};

/*!
 * The Gibbs posterior moved left by shift = Jhat / T.
 *
 * This is the exact law of theta - shift for theta drawn from the base, so
 * its support is (-shift, inf). Nothing is renormalized onto theta > 0.
 */
struct ModifiedPosterior
{
    GibbsPosterior base;
    double shift = 0.0;

    double pdf(double theta) const { return base.ig.pdf(theta + shift); }
    double log_pdf(double theta) const { return base.ig.log_pdf(theta + shift); }
    double cdf(double theta) const { return base.ig.cdf(theta + shift); }
    double quantile(double p) const { return base.ig.quantile(p) - shift; }
    double mean() const { return base.ig.mean() - shift; }
    double variance() const { return base.ig.variance(); }
};

struct NormalApprox
{
    double mean = 0.0;
    double variance = 1.0;

    double pdf(double x) const;
};

struct CredibleInterval
{
    double level = 0.95;
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

// theta_hat = T^{-1} sum D_i^2. Drift is ignored.
double compute_mle(std::span<double const> increments, double horizon);
double compute_mle(SamplePath const& path);

/*!
 * Temperature kappa = (1 - Jhat / (T theta_hat))^2.
 *
 * Throws DegenerateDataError for theta_hat <= 0 and DegenerateInferenceError
 * when kappa falls below \c floor.
 */
double compute_kappa(double theta_hat,
                     QvEstimate const& qv,
                     double horizon,
                     double floor = default_kappa_floor);

/*!
 * Conjugate update of an inverse-gamma prior under the tempered normal
 * likelihood: shape + n / (2 kappa), rate + n theta_hat / (2 kappa).
 *
 * Any finite kappa above \c floor is accepted; the correction pipeline
 * itself only produces kappa <= 1.
 */
GibbsPosterior gibbs_update(InverseGammaParams const& prior,
                            std::size_t n,
                            double theta_hat,
                            double kappa,
                            double floor = default_kappa_floor);
GibbsPosterior gibbs_update(InverseGammaParams const& prior,
                            SamplePath const& path,
                            double kappa,
                            double floor = default_kappa_floor);

ModifiedPosterior modify_posterior(GibbsPosterior const& post, QvEstimate const& qv, double horizon);

/*!
 * Equal-tailed credible interval of the shifted posterior.
 *
 * With \c truncate_positive the law is first restricted to theta > 0 and
 * renormalized; otherwise endpoints may be negative.
 */
CredibleInterval credible_interval(ModifiedPosterior const& post,
                                   double level,
                                   bool truncate_positive = false);

// N(theta_hat - Jhat/T, 2 (theta_hat - Jhat/T)^2 / n), the plug-in normal limit.
NormalApprox bvm_normal(double theta_hat, QvEstimate const& qv, double horizon, std::size_t n);

struct InferenceOptions
{
    InverseGammaParams prior{1.0, 1.0};
    ThresholdRule threshold = ThresholdRule::iqr(5.0);
    double level = 0.95;
    double kappa_floor = default_kappa_floor;
    bool truncate_positive = false;
};

struct InferenceResult
{
    double theta_hat = 0.0;
    QvEstimate qv;
    double kappa = 1.0;
    ModifiedPosterior posterior;
    CredibleInterval interval;
    NormalApprox bvm;
};

// threshold -> Jhat -> kappa -> Gibbs update -> shift -> interval -> normal limit.
InferenceResult infer_volatility(std::span<double const> increments,
                                 double horizon,
                                 InferenceOptions const& options = {});

}  // namespace jumpvol
