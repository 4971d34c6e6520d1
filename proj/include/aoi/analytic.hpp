#pragma once

#include "aoi/core.hpp"

namespace aoi {

/// Threshold of the waiting function Z = (beta - Y)^+; beta = 1 never waits.
class WaitThreshold {
public:
    explicit WaitThreshold(int beta);

    [[nodiscard]] int value() const noexcept { return beta_; }

    friend bool operator==(const WaitThreshold&, const WaitThreshold&) = default;

private:
    int beta_;
};

/// Stationary cycle moments and the resulting average AoI.
struct AoiBreakdown {
    double mean_interarrival;  ///< E[I]
    double second_moment;      ///< E[I^2]
    double cross_term;         ///< E[I T]
    double average_aoi;
};

/// E[I^2/2 + I T] / E[I] - 1/2 from the three moments.
[[nodiscard]] double aoi_from_moments(double mean_interarrival, double second_moment, double cross_term);

// Zero-wait with one active request.
[[nodiscard]] AoiBreakdown aoi_zw1(const ServiceRates& rates);

/// Probability that a new update finds the sampler server busy under ZW-2.
[[nodiscard]] double p_busy(const ServiceRates& rates);

/// E[X | B]: mean request service time given the update arrives at a busy server.
/// Undefined (throws) at mu = 1, where the conditioning event is empty.
[[nodiscard]] double expected_x_given_busy(const ServiceRates& rates);

// Zero-wait with two active requests.
[[nodiscard]] AoiBreakdown aoi_zw2(const ServiceRates& rates);

/// E[Z], E[Z Y_prev] and E[Z^2] for Z = (beta - Y)^+, Y ~ Geo(mu).
[[nodiscard]] double mean_wait(const ServiceRates& rates, WaitThreshold w);
[[nodiscard]] double ezy(const ServiceRates& rates, WaitThreshold w);
[[nodiscard]] double ez2(const ServiceRates& rates, WaitThreshold w);

/// Wait-1(beta). The average AoI uses the closed form; when its denominator
/// degenerates the moment route is used instead.
[[nodiscard]] AoiBreakdown aoi_wait1(const ServiceRates& rates, WaitThreshold w);

/// Largest integer beta with q(beta) <= 0; an upper bound on the optimal threshold.
[[nodiscard]] int beta_max(const ServiceRates& rates);

/// q(beta) = beta^2 (mu^2 + gamma mu) + beta (mu^2 + gamma mu - 2 gamma) - 2.
[[nodiscard]] double beta_quadratic(const ServiceRates& rates, double beta);

/// Closed-form cap on beta_max that grows as O(1/mu).
[[nodiscard]] double beta_max_growth_bound(const ServiceRates& rates);

struct OptimalWait {
    int beta;
    double average_aoi;
};

/// Exhaustive search over 1..beta_max; ties go to the smaller beta.
[[nodiscard]] OptimalWait optimal_beta(const ServiceRates& rates);

/// Region where ZW-2 achieves an average AoI no larger than ZW-1.
[[nodiscard]] bool zw2_beats_zw1(const ServiceRates& rates);

/// Region where some beta >= 2 improves on zero-wait in the 1-Packet system.
[[nodiscard]] bool waiting_beneficial(const ServiceRates& rates);

} // namespace aoi
