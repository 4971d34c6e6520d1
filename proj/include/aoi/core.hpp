#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace aoi {

/// Thrown for out-of-domain model parameters (rates, caps, thresholds).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a statistic is requested from too little data.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A policy asked for an action the current occupancy forbids.
class InadmissibleActionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Controller decision at the start of a slot.
enum class Action : std::uint8_t { Idle = 0, Request = 1 };

[[nodiscard]] constexpr int to_int(Action a) noexcept { return static_cast<int>(a); }

/// Per-slot completion probabilities of the two servers.
///
/// `gamma` belongs to the controller server (request link), `mu` to the
/// sampler server (update link). Service times are geometric on {1,2,...}
/// with means 1/gamma and 1/mu slots.
class ServiceRates {
public:
    ServiceRates(double gamma, double mu);

    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] double gamma_bar() const noexcept { return 1.0 - gamma_; }
    [[nodiscard]] double mu_bar() const noexcept { return 1.0 - mu_; }

    /// Both servers deterministic; the MDP chain is not weakly accessible here.
    [[nodiscard]] bool deterministic() const noexcept { return gamma_ == 1.0 && mu_ == 1.0; }

    friend bool operator==(const ServiceRates&, const ServiceRates&) = default;

private:
    double gamma_;
    double mu_;
};

/// Rejects (gamma, mu) = (1, 1) for MDP construction.
void require_weakly_accessible(const ServiceRates& rates);

/// Largest tracked AoI value; ages saturate here in the MDP models.
class AgeCap {
public:
    explicit AgeCap(int cap);

    [[nodiscard]] int value() const noexcept { return cap_; }

    friend bool operator==(const AgeCap&, const AgeCap&) = default;

private:
    int cap_;
};

/// min(age + 1, cap): one slot of ageing under the cap.
[[nodiscard]] inline int clamp_age(int age, AgeCap cap) noexcept
{
    return age + 1 < cap.value() ? age + 1 : cap.value();
}

/// 64-bit seeded generator shared by all samplers in this library.
///
/// Uniform variates are built from the top 53 bits so that sequences are
/// identical across standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() noexcept
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

/// Draws k >= 1 with P(k) = p (1-p)^(k-1) by CDF inversion.
[[nodiscard]] std::int64_t sample_geometric(double p, Rng& rng);

/// One completed update cycle: interarrival I and system time T, in slots.
struct CycleRecord {
    std::int64_t interarrival;
    std::int64_t system_time;
};

/// Sample-average form of E[I^2/2 + I T] / E[I] - 1/2.
[[nodiscard]] double average_aoi_from_cycles(std::span<const CycleRecord> records);

/// Integer power by repeated squaring.
[[nodiscard]] constexpr double ipow(double base, unsigned exponent) noexcept
{
    double result = 1.0;
    while (exponent != 0) {
        if (exponent & 1U) {
            result *= base;
        }
        base *= base;
        exponent >>= 1U;
    }
    return result;
}

} // namespace aoi
