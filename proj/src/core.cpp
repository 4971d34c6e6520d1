#include "aoi/core.hpp"

#include <cmath>

namespace aoi {

namespace {

bool is_probability(double p) noexcept
{
    return std::isfinite(p) && p > 0.0 && p <= 1.0;
}

} // namespace

ServiceRates::ServiceRates(double gamma, double mu) : gamma_(gamma), mu_(mu)
{
    if (!is_probability(gamma)) {
        throw ParameterError("gamma must lie in (0, 1], got " + std::to_string(gamma));
    }
    if (!is_probability(mu)) {
        throw ParameterError("mu must lie in (0, 1], got " + std::to_string(mu));
    }
}

void require_weakly_accessible(const ServiceRates& rates)
{
    if (rates.deterministic()) {
        throw ParameterError(
            "(gamma, mu) = (1, 1) is excluded: with deterministic unit services the "
            "weak accessibility condition fails and the average-cost solution is undefined");
    }
}

AgeCap::AgeCap(int cap) : cap_(cap)
{
    if (cap < 2) {
        throw ParameterError("age cap must be at least 2, got " + std::to_string(cap));
    }
}

std::int64_t sample_geometric(double p, Rng& rng)
{
    if (!is_probability(p)) {
        throw ParameterError("geometric parameter must lie in (0, 1], got " + std::to_string(p));
    }
    if (p == 1.0) {
        return 1;
    }
    // P(K > k) = (1-p)^k, so K = ceil(log(U) / log(1-p)) for U uniform on (0, 1].
    const double u = 1.0 - rng.uniform();
    const double k = std::ceil(std::log(u) / std::log1p(-p));
    return k < 1.0 ? 1 : static_cast<std::int64_t>(k);
}

double average_aoi_from_cycles(std::span<const CycleRecord> records)
{
    if (records.empty()) {
        throw InsufficientDataError("average AoI needs at least one cycle record");
    }
    double sum_i = 0.0;
    double sum_area = 0.0;
    for (const auto& r : records) {
        const auto i = static_cast<double>(r.interarrival);
        const auto t = static_cast<double>(r.system_time);
        sum_i += i;
        sum_area += 0.5 * i * i + i * t;
    }
    return sum_area / sum_i - 0.5;
}

} // namespace aoi
