#pragma once

#include "aoi/analytic.hpp"
#include "aoi/core.hpp"
#include "aoi/finite_mdp.hpp"
#include "aoi/mdp_one_packet.hpp"
#include "aoi/mdp_two_packet.hpp"
#include "aoi/rvi.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace aoi {

/// Policy and system configuration do not fit together.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Capacity : std::uint8_t { OnePacket = 1, TwoPacket = 2 };

[[nodiscard]] inline int max_active(Capacity c) noexcept { return static_cast<int>(c); }

struct SystemConfig {
    ServiceRates rates;
    Capacity capacity = Capacity::OnePacket;
    std::int64_t warmup = 1000;
    std::int64_t horizon = 1'000'000;
    std::uint64_t seed = 1;
};

struct ZeroWait1 {};
struct ZeroWait2 {};
struct Wait1 {
    WaitThreshold beta;
};
/// Lookup of an MDP policy table on the clamped state.
struct TablePolicy {
    PolicyTable table;
    AgeCap cap;
};

using PolicySpec = std::variant<ZeroWait1, ZeroWait2, Wait1, TablePolicy>;

[[nodiscard]] std::string policy_name(const PolicySpec& policy);

/// Occupancy and ages at the start of a slot, before the policy acts.
struct SlotView {
    std::int64_t slot;
    std::int64_t aoi;
    int controller_requests;      ///< 0..2, head in service
    int sampler_updates;          ///< 0..2, head in service
    std::int64_t head_age;        ///< valid when sampler_updates >= 1
    std::int64_t queued_age;      ///< valid when sampler_updates == 2

    [[nodiscard]] int active() const noexcept { return controller_requests + sampler_updates; }
};

/// Clamped MDP observations of a slot view.
[[nodiscard]] State1P observe_1p(const SlotView& v, AgeCap cap);
[[nodiscard]] State2P observe_2p(const SlotView& v, AgeCap cap);

/// Everything that happened in one slot.
struct SlotRecord {
    SlotView before;
    Action action;
    int deliveries;
    /// Generation slot of the delivered update, when deliveries == 1.
    std::int64_t delivered_generation;
    /// New update reaching the sampler at the start of the next slot.
    bool new_update;
    /// Whether that update found the sampler server occupied.
    bool new_update_blocked;
};

/// Slot-level engine for the two-server system.
///
/// Each slot: the policy sees the state and may add one request; the busy
/// controller server completes with probability gamma and the busy sampler
/// server with probability mu, independently; a completed request yields an
/// update of age 0 at the start of the next slot; a delivery at the end of
/// slot t sets delta^{t+1} = Delta_s^t + 1. Queues are FIFO and only their
/// heads receive service. The AoI is tracked without any cap.
class SlotSimulator {
public:
    SlotSimulator(const SystemConfig& cfg, PolicySpec policy);

    [[nodiscard]] const SlotView& view() const noexcept { return view_; }

    SlotRecord step();

private:
    Action decide() const;
    [[nodiscard]] std::int64_t generation(int k) const noexcept { return updates_[k]; }

    SystemConfig cfg_;
    PolicySpec policy_;
    Rng rng_;
    SlotView view_{};
    std::array<std::int64_t, 2> updates_{};  // generation slots, FIFO
    std::optional<StateSpace1P> space1_;
    std::optional<StateSpace2P> space2_;
};

struct SimResult {
    double time_avg_aoi = 0.0;
    double time_avg_se = 0.0;   ///< batch-means standard error
    double cycle_aoi = 0.0;     ///< NaN when no cycle completed
    std::int64_t cycles = 0;
    double mean_I = 0.0;
    double mean_I2 = 0.0;
    double mean_IT = 0.0;
    double se_I = 0.0;
    double se_I2 = 0.0;
    double se_IT = 0.0;
    std::int64_t arrivals = 0;          ///< post-warmup updates reaching the sampler
    std::int64_t busy_arrivals = 0;     ///< of which found the server busy
    double busy_fraction = 0.0;
    double busy_fraction_se = 0.0;
    std::uint64_t seed = 0;
    std::int64_t horizon = 0;
    std::int64_t warmup = 0;
};

[[nodiscard]] SimResult run_simulation(const SystemConfig& cfg, const PolicySpec& policy);

/// Simulates an RVI solution; the table must belong to the MDP of `cap`.
[[nodiscard]] SimResult run_table_policy(const SystemConfig& cfg, const Solution& solution, AgeCap cap);

/// One trace line per slot.
struct TraceRow {
    std::int64_t slot;
    std::int64_t aoi;
    bool controller_buffer;
    bool controller_busy;
    bool sampler_buffer;
    bool sampler_busy;
    std::optional<std::int64_t> buffer_age;
    std::optional<std::int64_t> sampler_age;
    Action action;
    int deliveries;
};

[[nodiscard]] TraceRow to_trace_row(const SlotRecord& r);

/// Runs `cfg.horizon` slots and returns the full trace.
[[nodiscard]] std::vector<TraceRow> simulate_trace(const SystemConfig& cfg, const PolicySpec& policy);

/// One record per delivered update after the first.
[[nodiscard]] std::vector<CycleRecord> extract_cycles(const std::vector<TraceRow>& trace);

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

/// Options for empirical_kernel_check.
struct KernelCheckOptions {
    /// Cap of the observed MDP when the policy is not a table.
    AgeCap cap{50};
    double confidence = 0.99;
    /// Cells whose smallest expected count falls below this are inconclusive.
    double min_expected = 5.0;
    /// Rates of the reference kernel; the simulated rates when empty.
    std::optional<ServiceRates> reference_rates;
};

/// Goodness of fit of one (state, action) cell.
struct KernelCell {
    std::size_t state;
    Action action;
    std::int64_t visits;
    double statistic;
    int dof;
    double p_value;
    /// Observed successors that the kernel gives probability zero.
    std::int64_t unexpected;
    bool conclusive;
    bool flagged;
};

struct KernelCheckReport {
    std::vector<KernelCell> cells;
    std::size_t tested = 0;
    std::size_t flagged = 0;
    std::size_t inconclusive = 0;
    std::int64_t unexpected_transitions = 0;
    /// Post-warmup slot counts per occupancy family.
    std::vector<std::int64_t> family_visits;

    [[nodiscard]] double flagged_fraction() const noexcept
    {
        return tested == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(tested);
    }
};

/// Runs the policy for cfg.horizon slots, tallies one-step transitions of the
/// clamped MDP state after the warm-up and tests every cell with at least
/// `visits` samples against the exact kernel. Out-of-support successors flag
/// a cell regardless of its sample size.
[[nodiscard]] KernelCheckReport empirical_kernel_check(const SystemConfig& cfg, const PolicySpec& policy,
                                                       std::int64_t visits,
                                                       const KernelCheckOptions& options = {});

void write_kernel_check_csv(const KernelCheckReport& report, std::ostream& out);

[[nodiscard]] std::string sim_result_csv_header();
[[nodiscard]] std::string sim_result_csv_row(const std::string& policy, const SystemConfig& cfg,
                                             const SimResult& r);

} // namespace aoi
