#include "jumpvol/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "jumpvol/errors.hpp"

namespace jumpvol::numerics
{

double gamma_p(double a, double x)
{
    if (x <= 0.0)
        return 0.0;
    return boost::math::gamma_p(a, x);
}

double gamma_q(double a, double x)
{
    if (x <= 0.0)
        return 1.0;
    return boost::math::gamma_q(a, x);
}

double gamma_density(double a, double x)
{
    if (x <= 0.0)
        return 0.0;
    return boost::math::gamma_p_derivative(a, x);
}

namespace
{

constexpr std::size_t max_panels = 20000;

struct Panel
{
    double lo;
    double hi;
    double value;
    double error;

    bool operator<(Panel const& other) const { return error < other.error; }
};

Panel kronrod_panel(std::function<double(double)> const& f, double lo, double hi)
{
    Panel p{lo, hi, 0.0, 0.0};
    // max_depth 0: one 31-point Kronrod rule with the embedded Gauss error estimate.
    p.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, lo, hi, 0, 0.0, &p.error);
    return p;
}

}  // namespace

Integral integrate(std::function<double(double)> const& f,
                   double lo,
                   double hi,
                   double rel_tol,
                   double abs_tol)
{
    double const ends[2] = {lo, hi};
    return integrate_pieces(f, ends, rel_tol, abs_tol);
}

Integral integrate_pieces(std::function<double(double)> const& f,
                          std::span<double const> breakpoints,
                          double rel_tol,
                          double abs_tol)
{
    std::vector<double> points(breakpoints.begin(), breakpoints.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    std::priority_queue<Panel> queue;
    Integral total;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
    {
        auto const p = kronrod_panel(f, points[i], points[i + 1]);
        total.value += p.value;
        total.error += p.error;
        queue.push(p);
    }
    while (!queue.empty() && total.error > std::max(abs_tol, rel_tol * std::abs(total.value)))
    {
        if (queue.size() >= max_panels)
            break;
        auto const worst = queue.top();
        double const mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi))
            break;  // panel cannot be split further in double precision
        queue.pop();
        auto const left = kronrod_panel(f, worst.lo, mid);
        auto const right = kronrod_panel(f, mid, worst.hi);
        total.value += left.value + right.value - worst.value;
        total.error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    // Re-sum to shed the drift from incremental updates.
    total = {};
    while (!queue.empty())
    {
        total.value += queue.top().value;
        total.error += queue.top().error;
        queue.pop();
    }
    return total;
}

}  // namespace jumpvol::numerics
