#pragma once

#include "aoi/core.hpp"
#include "aoi/finite_mdp.hpp"
#include "aoi/rvi.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace aoi {

/// Occupancy of the 1-Packet system: at most one active request.
enum class Family1P : std::uint8_t {
    Empty = 0,          ///< (e_s, E_s) = (0, 0)
    ControllerBusy = 1, ///< (1, 0): request in the controller server
    SamplerBusy = 2,    ///< (0, 1): update in the sampler server
};

/// State (delta, e_s, E_s, Delta_s) of the 1-Packet MDP.
struct State1P {
    int aoi = 1;
    bool controller_busy = false;
    bool sampler_busy = false;
    /// Age of the update under service; present iff sampler_busy.
    std::optional<int> sampler_age;

    [[nodiscard]] Family1P family() const noexcept
    {
        if (controller_busy) {
            return Family1P::ControllerBusy;
        }
        return sampler_busy ? Family1P::SamplerBusy : Family1P::Empty;
    }

    static State1P empty(int aoi) { return {aoi, false, false, std::nullopt}; }
    static State1P requesting(int aoi) { return {aoi, true, false, std::nullopt}; }
    static State1P serving(int aoi, int sampler_age) { return {aoi, false, true, sampler_age}; }

    friend bool operator==(const State1P&, const State1P&) = default;
};

/// Structural invariants: occupancy, age presence and ranges under `cap`.
[[nodiscard]] bool is_valid(const State1P& s, AgeCap cap) noexcept;

/// Additionally requires Delta_s <= delta, which every reachable state satisfies.
[[nodiscard]] bool is_ordered(const State1P& s) noexcept;

struct Outcome1P {
    State1P next;
    double probability;
};

/// Canonical enumeration and dense indexing of the 1-Packet state space.
///
/// Order is lexicographic by (family, delta, Delta_s); Delta_s ranges over
/// 0..cap independently of delta, giving cap * (cap + 3) states.
class StateSpace1P {
public:
    explicit StateSpace1P(AgeCap cap) : cap_(cap) {}

    [[nodiscard]] AgeCap cap() const noexcept { return cap_; }
    [[nodiscard]] std::size_t size() const noexcept;
    [[nodiscard]] std::size_t index_of(const State1P& s) const;
    [[nodiscard]] State1P state_at(std::size_t index) const;

private:
    AgeCap cap_;
};

[[nodiscard]] std::vector<State1P> enumerate_states(AgeCap cap);

[[nodiscard]] std::vector<Action> admissible_actions(const State1P& s);

/// Successor distribution; zero-probability rows are omitted.
[[nodiscard]] std::vector<Outcome1P> transitions_1p(const State1P& s, Action a, const ServiceRates& rates,
                                                    AgeCap cap);

/// Expected AoI of the next slot, sum_s' P(s'|s,a) delta'.
[[nodiscard]] double expected_cost_1p(const State1P& s, Action a, const ServiceRates& rates, AgeCap cap);

/// Enumerated 1-Packet MDP together with its indexing.
struct OnePacketModel {
    StateSpace1P space;
    ServiceRates rates;
    FiniteMdp mdp;
};

/// Builds and validates the full kernel; rejects (gamma, mu) = (1, 1).
[[nodiscard]] OnePacketModel build_one_packet_model(const ServiceRates& rates, AgeCap cap);

/// Table that requests whenever the system is empty (the ZW-1 rule).
[[nodiscard]] PolicyTable zero_wait_table_1p(const StateSpace1P& space);

/// Solution CSV: `# gain=...,epsilon=...,iterations=...` then one row per state.
void write_solution_csv_1p(const StateSpace1P& space, const Solution& solution, std::ostream& out);

} // namespace aoi
