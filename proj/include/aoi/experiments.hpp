#pragma once

#include "aoi/analytic.hpp"
#include "aoi/core.hpp"
#include "aoi/rvi.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace aoi {

/// {1/n, 2/n, ..., 1}.
[[nodiscard]] std::vector<double> unit_grid(int n);

/// True when the actions never switch back from 1 to 0 along the sequence.
[[nodiscard]] bool is_threshold(std::span<const int> actions);

/// Position of the first request, if any.
[[nodiscard]] std::optional<std::size_t> first_request(std::span<const int> actions);

// Closed-form summary of one rate pair.
struct AnalyticRow {
    double gamma;
    double mu;
    double delta_zw1;
    double delta_zw2;
    int beta_star;
    double delta_wait1_star;
    bool zw2_beats_zw1;
    bool waiting_beneficial;
};

[[nodiscard]] AnalyticRow analytic_point(const ServiceRates& rates);

/// Row-major over gammas, then mus.
[[nodiscard]] std::vector<AnalyticRow> analytic_sweep(const std::vector<double>& gammas,
                                                      const std::vector<double>& mus, unsigned workers = 1);

void write_analytic_csv(const std::vector<AnalyticRow>& rows, std::ostream& out);

/// What the region figure shows, read off a full square grid.
struct RegionSummary {
    /// Smallest grid mu from which ZW-2 wins for every gamma.
    double zw2_everywhere_from_mu;
    /// Largest grid mu at which waiting pays for some gamma.
    double waiting_up_to_mu;
    /// Grid points where the ZW-2 predicate disagrees with the sign of the difference.
    std::size_t sign_mismatches;
};

[[nodiscard]] RegionSummary summarize_region(const std::vector<AnalyticRow>& rows);

/// Optimal 1-Packet actions in the empty states (delta = 1..cap) for one rate pair.
struct Structure1P {
    double gamma;
    double mu;
    double gain;
    std::vector<int> empty_actions;
    bool threshold;
};

[[nodiscard]] Structure1P structure_1p(const ServiceRates& rates, AgeCap cap, const SolveConfig& cfg);

/// Optimal 2-Packet actions in the families the structure figures inspect.
struct Structure2P {
    double gamma;
    double mu;
    double gain;
    int cap;
    std::vector<int> empty_actions;           ///< (delta,0,0,0,0), delta = 1..cap
    std::vector<int> one_request_actions;     ///< (delta,0,1,0,0), delta = 1..cap
    /// (delta,0,0,0,1,*,Delta_s): one_update_actions[delta-1][Delta_s], Delta_s = 0..cap.
    std::vector<std::vector<int>> one_update_actions;
    /// Threshold in Delta_s over 0..delta for every delta.
    bool one_update_threshold;
    bool one_request_idle;
};

[[nodiscard]] Structure2P structure_2p(const ServiceRates& rates, AgeCap cap, const SolveConfig& cfg);

struct CapPoint {
    int cap;
    double gain;
    std::size_t iterations;
};

[[nodiscard]] std::vector<CapPoint> cap_sweep(const ServiceRates& rates, const std::vector<int>& caps,
                                              const SolveConfig& cfg, unsigned workers = 1);

/// Largest relative deviation of the gains at caps > `above` from the gain at the largest cap.
[[nodiscard]] double saturation_deviation(const std::vector<CapPoint>& points, int above);

struct BetaPoint {
    int beta;
    double average_aoi;
};

[[nodiscard]] std::vector<BetaPoint> beta_sweep(const ServiceRates& rates, int max_beta);

/// The policies of the comparison figure at one rate pair.
struct ComparisonRow {
    double gamma;
    double mu;
    double zw1;
    double zw2;
    double one_packet;
    double two_packet;
    double wait1_star;
    int beta_star;
};

[[nodiscard]] std::vector<ComparisonRow> comparison(const std::vector<double>& gammas,
                                                     const std::vector<double>& mus, AgeCap cap,
                                                     const SolveConfig& cfg, unsigned workers = 1);

/// Largest amount by which the 2-Packet gain exceeds any other policy of its row.
[[nodiscard]] double dominance_violation(const ComparisonRow& row);

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);

} // namespace aoi
