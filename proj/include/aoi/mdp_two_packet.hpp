#pragma once

#include "aoi/core.hpp"
#include "aoi/finite_mdp.hpp"
#include "aoi/mdp_one_packet.hpp"
#include "aoi/rvi.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace aoi {

/// The six occupancy patterns (e_b, e_s, E_b, E_s) reachable with two active requests.
enum class Family2P : std::uint8_t {
    Empty = 0,                 ///< (0,0,0,0)
    TwoRequests = 1,           ///< (1,1,0,0): request queued behind a request
    OneRequest = 2,            ///< (0,1,0,0)
    RequestAndUpdate = 3,      ///< (0,1,0,1)
    TwoUpdates = 4,            ///< (0,0,1,1): update queued behind an update
    OneUpdate = 5,             ///< (0,0,0,1)
};

inline constexpr int kFamilyCount2P = 6;

/// State (delta, e_b, e_s, E_b, E_s, Delta_b, Delta_s) of the 2-Packet MDP.
struct State2P {
    int aoi = 1;
    bool controller_buffer = false;
    bool controller_busy = false;
    bool sampler_buffer = false;
    bool sampler_busy = false;
    /// Age of the queued update; present iff sampler_buffer.
    std::optional<int> buffer_age;
    /// Age of the update in service; present iff sampler_busy.
    std::optional<int> sampler_age;

    /// Pattern of the occupancy bits, if it is one of the six reachable ones.
    [[nodiscard]] std::optional<Family2P> family() const noexcept;

    [[nodiscard]] int active_requests() const noexcept
    {
        return int{controller_buffer} + int{controller_busy} + int{sampler_buffer} + int{sampler_busy};
    }

    static State2P make(Family2P f, int aoi, std::optional<int> buffer_age = std::nullopt,
                        std::optional<int> sampler_age = std::nullopt);

    friend bool operator==(const State2P&, const State2P&) = default;
};

[[nodiscard]] bool is_valid(const State2P& s, AgeCap cap) noexcept;

/// Delta_b <= Delta_s <= delta wherever the ages are present.
[[nodiscard]] bool is_ordered(const State2P& s) noexcept;

struct Outcome2P {
    State2P next;
    double probability;
};

/// Canonical enumeration restricted to the six families.
///
/// Order is lexicographic by (family, delta, Delta_b, Delta_s). Update ages
/// range over 0..cap; queued pairs cover the triangle Delta_b <= Delta_s.
class StateSpace2P {
public:
    explicit StateSpace2P(AgeCap cap);

    [[nodiscard]] AgeCap cap() const noexcept { return cap_; }
    [[nodiscard]] std::size_t size() const noexcept { return offsets_.back(); }
    [[nodiscard]] std::size_t index_of(const State2P& s) const;
    [[nodiscard]] State2P state_at(std::size_t index) const;
    /// First index of a family block.
    [[nodiscard]] std::size_t family_offset(Family2P f) const noexcept
    {
        return offsets_[static_cast<std::size_t>(f)];
    }

private:
    [[nodiscard]] std::size_t per_aoi(Family2P f) const noexcept;

    AgeCap cap_;
    std::vector<std::size_t> offsets_;
};

[[nodiscard]] std::vector<State2P> enumerate_states_2p(AgeCap cap);

[[nodiscard]] std::vector<Action> admissible_actions_2p(const State2P& s);

[[nodiscard]] std::vector<Outcome2P> transitions_2p(const State2P& s, Action a, const ServiceRates& rates,
                                                    AgeCap cap);

[[nodiscard]] double expected_cost_2p(const State2P& s, Action a, const ServiceRates& rates, AgeCap cap);

struct TwoPacketModel {
    StateSpace2P space;
    ServiceRates rates;
    FiniteMdp mdp;
};

[[nodiscard]] TwoPacketModel build_two_packet_model(const ServiceRates& rates, AgeCap cap);

/// Table that keeps two requests active (the ZW-2 rule).
[[nodiscard]] PolicyTable zero_wait_table_2p(const StateSpace2P& space);

/// Embeds a 1-Packet state into the 2-Packet space (empty buffers).
[[nodiscard]] State2P embed(const State1P& s);

void write_solution_csv_2p(const StateSpace2P& space, const Solution& solution, std::ostream& out);

} // namespace aoi
