#include "aoi/analytic.hpp"

#include <cmath>
#include <string>

namespace aoi {

namespace {

// Moments of Y ~ Geo(p) on {1, 2, ...}.
double geo_mean(double p) { return 1.0 / p; }
double geo_second(double p) { return (2.0 - p) / (p * p); }

} // namespace

WaitThreshold::WaitThreshold(int beta) : beta_(beta)
{
    if (beta < 1) {
        throw ParameterError("waiting threshold must be a positive integer, got " + std::to_string(beta));
    }
}

double aoi_from_moments(double mean_interarrival, double second_moment, double cross_term)
{
    return (0.5 * second_moment + cross_term) / mean_interarrival - 0.5;
}

AoiBreakdown aoi_zw1(const ServiceRates& rates)
{
    const double g = rates.gamma();
    const double m = rates.mu();
    const double ei = geo_mean(m) + geo_mean(g);
    const double ei2 = geo_second(m) + geo_second(g) + 2.0 / (m * g);
    const double eit = ei / m;
    return {ei, ei2, eit, 2.0 / m + m / (g * (m + g)) - 1.0};
}

double p_busy(const ServiceRates& rates)
{
    const double gmb = rates.gamma() * rates.mu_bar();
    return gmb / (rates.mu() + gmb);
}

double expected_x_given_busy(const ServiceRates& rates)
{
    if (rates.mu() == 1.0) {
        throw ParameterError("E[X | busy] is undefined at mu = 1: the sampler is never busy on arrival");
    }
    return 1.0 / (rates.mu() + rates.gamma() * rates.mu_bar());
}

AoiBreakdown aoi_zw2(const ServiceRates& rates)
{
    const double g = rates.gamma();
    const double m = rates.mu();
    const double mb = rates.mu_bar();
    const double pb = p_busy(rates);
    const double ei = 1.0 / g + pb / m;
    const double ei2 = (2.0 / g - 1.0) * ei + 2.0 * pb / (m * m);
    const double eit = ei / m + pb / (m * m);
    const double delta = 1.0 / g + 1.0 / m - 1.0 + 2.0 * g * g * mb / (m * (g * mb * (g + m) + m * m));
    return {ei, ei2, eit, delta};
}

double mean_wait(const ServiceRates& rates, WaitThreshold w)
{
    const double m = rates.mu();
    const double b = w.value();
    return (b * m + ipow(rates.mu_bar(), static_cast<unsigned>(w.value())) - 1.0) / m;
}

double ezy(const ServiceRates& rates, WaitThreshold w)
{
    const double m = rates.mu();
    const double b = w.value();
    const double mbb = ipow(rates.mu_bar(), static_cast<unsigned>(w.value()));
    return (m + b * m + mbb * (2.0 - m + b * m) - 2.0) / (m * m);
}

double ez2(const ServiceRates& rates, WaitThreshold w)
{
    const double m = rates.mu();
    const double b = w.value();
    const double mbb = ipow(rates.mu_bar(), static_cast<unsigned>(w.value()));
    return -(m + 2.0 * b * m + mbb * (2.0 - m) - b * b * m * m - 2.0) / (m * m);
}

AoiBreakdown aoi_wait1(const ServiceRates& rates, WaitThreshold w)
{
    const double g = rates.gamma();
    const double m = rates.mu();
    const double b = w.value();
    const double ez = mean_wait(rates, w);

    const double ei = geo_mean(m) + ez + geo_mean(g);
    const double ei2 = geo_second(m) + geo_second(g) + 2.0 * geo_mean(g) * geo_mean(m) + 2.0 * ezy(rates, w) +
                       2.0 * ez * geo_mean(g) + ez2(rates, w);
    const double eit = ei / m;

    const double mbb = ipow(rates.mu_bar(), static_cast<unsigned>(w.value()));
    const double denominator = 2.0 * (g * (mbb + b * m) + m);
    double delta = 0.0;
    if (std::abs(denominator) < 1e-12) {
        delta = aoi_from_moments(ei, ei2, eit);
    } else {
        delta = (b * m * (-b * g + g - 2.0) - 2.0 * (b * g + 1.0)) / denominator + b + 1.0 / g + 2.0 / m - 1.0;
    }
    return {ei, ei2, eit, delta};
}

double beta_quadratic(const ServiceRates& rates, double beta)
{
    const double g = rates.gamma();
    const double m = rates.mu();
    const double a = m * m + g * m;
    return beta * beta * a + beta * (a - 2.0 * g) - 2.0;
}

int beta_max(const ServiceRates& rates)
{
    const double g = rates.gamma();
    const double m = rates.mu();
    const double a = m * m + g * m;
    const double root = (2.0 * g + std::sqrt((a - 2.0 * g) * (a - 2.0 * g) + 8.0 * a)) / (2.0 * a) - 0.5;
    // The root is exactly 1 at mu = 1; absorb the rounding that lands just below it.
    const int beta = static_cast<int>(std::floor(root + 1e-9));
    return beta < 1 ? 1 : beta;
}

double beta_max_growth_bound(const ServiceRates& rates)
{
    const double g = rates.gamma();
    const double m = rates.mu();
    const double a = m * m + g * m;
    const double linear = 2.0 * g / a - 1.0;
    return std::floor((linear > 0.0 ? linear : 0.0) + std::sqrt(2.0 / a));
}

OptimalWait optimal_beta(const ServiceRates& rates)
{
    OptimalWait best{1, aoi_wait1(rates, WaitThreshold(1)).average_aoi};
    const int upper = beta_max(rates);
    for (int beta = 2; beta <= upper; ++beta) {
        const double value = aoi_wait1(rates, WaitThreshold(beta)).average_aoi;
        if (value < best.average_aoi) {
            best = {beta, value};
        }
    }
    return best;
}

bool zw2_beats_zw1(const ServiceRates& rates)
{
    const double g = rates.gamma();
    const double m = rates.mu();
    const double gb = rates.gamma_bar();
    const double mb = rates.mu_bar();
    const bool fast_sampler = m >= g * (gb + std::sqrt((g + 1.0) * (g + 1.0) + 4.0)) / (2.0 * (g + 1.0));
    const bool slow_controller = g <= m * (-mb + std::sqrt(mb * (5.0 - m))) / (2.0 + mb);
    return fast_sampler || slow_controller;
}

bool waiting_beneficial(const ServiceRates& rates)
{
    const double g = rates.gamma();
    const double m = rates.mu();
    const bool slow_sampler = m <= (-g + std::sqrt(g * g + 2.0 * g)) / 2.0;
    // The second form divides by 1 - 2 mu and only holds for mu < 1/2.
    const bool fast_controller = m < 0.5 && g >= 2.0 * m * m / (1.0 - 2.0 * m);
    return slow_sampler || fast_controller;
}

} // namespace aoi
