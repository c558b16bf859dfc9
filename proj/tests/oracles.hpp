#pragma once

// Test-only reference computations. Nothing here calls into the library's
// posterior or quadrature code, so agreement is a genuine cross-check.

#include <cmath>
#include <functional>
#include <span>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle
{

// Mean and central moments of an unnormalized density exp(log_g) on (0, inf).
struct PosteriorMoments
{
    double mean = 0.0;
    double variance = 0.0;
};

inline double maximize_log(std::function<double(double)> const& log_g)
{
    // Golden-section search on log(theta).
    double lo = std::log(1e-8), hi = std::log(1e8);
    double const phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = log_g(std::exp(x1)), f2 = log_g(std::exp(x2));
    for (int i = 0; i < 300; ++i)
    {
        if (f1 < f2)
        {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = log_g(std::exp(x2));
        }
        else
        {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = log_g(std::exp(x1));
        }
    }
    return std::exp(0.5 * (lo + hi));
}

inline PosteriorMoments quadrature_moments(std::function<double(double)> const& log_g)
{
    double const mode = maximize_log(log_g);
    double const peak = log_g(mode);
    // Curvature scale from a central second difference.
    double const h = 1e-4 * mode;
    double const curv = (log_g(mode + h) - 2.0 * peak + log_g(mode - h)) / (h * h);
    double const sd = 1.0 / std::sqrt(-curv);
    double const a = std::max(0.0, mode - 12.0 * sd);
    double const b = mode + 12.0 * sd;

    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    auto integrate = [&](auto&& w) {
        auto g = [&](double t) { return t > 0.0 ? w(t) * std::exp(log_g(t) - peak) : 0.0; };
        double total = 0.0;
        if (a > 0.0)
            total += ts.integrate(g, 0.0, a, 1e-14);
        total += ts.integrate(g, a, mode, 1e-14);
        total += ts.integrate(g, mode, b, 1e-14);
        total += es.integrate([&](double t) { return g(t); }, b, std::numeric_limits<double>::infinity(), 1e-14);
        return total;
    };
    double const z = integrate([](double) { return 1.0; });
    double const mean = integrate([](double t) { return t; }) / z;
    double const var = integrate([mean](double t) { return (t - mean) * (t - mean); }) / z;
    return {mean, var};
}

// Log of prior(theta) * L_n(theta)^(1/kappa), written straight from the
// likelihood of iid N(0, theta * dt) increments and an inverse-gamma prior.
inline std::function<double(double)>
tempered_log_posterior(std::span<double const> d, double horizon, double a, double b, double kappa)
{
    double const n = static_cast<double>(d.size());
    double const dt = horizon / n;
    double sumsq = 0.0;
    for (double x : d)
        sumsq += x * x;
    return [=](double theta) {
        double const loglik = -0.5 * n * std::log(theta) - sumsq / (2.0 * dt * theta);
        double const logprior = -(a + 1.0) * std::log(theta) - b / theta;
        return loglik / kappa + logprior;
    };
}

inline double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace oracle
