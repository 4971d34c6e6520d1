#include "aoi/mdp_two_packet.hpp"

#include "aoi/csv.hpp"

#include <array>
#include <ostream>
#include <string>

namespace aoi {

namespace {

struct Bits {
    bool eb, es, Eb, Es;
};

constexpr std::array<Bits, kFamilyCount2P> kFamilyBits{{
    {false, false, false, false},
    {true, true, false, false},
    {false, true, false, false},
    {false, true, false, true},
    {false, false, true, true},
    {false, false, false, true},
}};

std::size_t triangle(std::size_t c) { return (c + 1) * (c + 2) / 2; }

// Offset of the pair (b, s), 0 <= b <= s <= c, in (b, s) lexicographic order.
std::size_t pair_offset(std::size_t c, std::size_t b, std::size_t s)
{
    return b * (c + 1) - b * (b - (b == 0 ? 0 : 1)) / 2 + (s - b);
}

std::string age_field(const std::optional<int>& age)
{
    return age ? std::to_string(*age) : "*";
}

} // namespace

std::optional<Family2P> State2P::family() const noexcept
{
    for (std::size_t f = 0; f < kFamilyBits.size(); ++f) {
        const Bits& b = kFamilyBits[f];
        if (b.eb == controller_buffer && b.es == controller_busy && b.Eb == sampler_buffer &&
            b.Es == sampler_busy) {
            return static_cast<Family2P>(f);
        }
    }
    return std::nullopt;
}

State2P State2P::make(Family2P f, int aoi, std::optional<int> buffer_age, std::optional<int> sampler_age)
{
    const Bits& b = kFamilyBits[static_cast<std::size_t>(f)];
    return {aoi, b.eb, b.es, b.Eb, b.Es, buffer_age, sampler_age};
}

bool is_valid(const State2P& s, AgeCap cap) noexcept
{
    const int c = cap.value();
    if (s.aoi < 1 || s.aoi > c || !s.family()) {
        return false;
    }
    if (s.sampler_buffer != s.buffer_age.has_value() || s.sampler_busy != s.sampler_age.has_value()) {
        return false;
    }
    auto in_range = [c](const std::optional<int>& a) { return !a || (*a >= 0 && *a <= c); };
    if (!in_range(s.buffer_age) || !in_range(s.sampler_age)) {
        return false;
    }
    return !(s.buffer_age && s.sampler_age) || *s.buffer_age <= *s.sampler_age;
}

bool is_ordered(const State2P& s) noexcept
{
    if (s.sampler_age && *s.sampler_age > s.aoi) {
        return false;
    }
    return !(s.buffer_age && s.sampler_age) || *s.buffer_age <= *s.sampler_age;
}

StateSpace2P::StateSpace2P(AgeCap cap) : cap_(cap), offsets_(kFamilyCount2P + 1, 0)
{
    const auto c = static_cast<std::size_t>(cap.value());
    for (int f = 0; f < kFamilyCount2P; ++f) {
        offsets_[f + 1] = offsets_[f] + c * per_aoi(static_cast<Family2P>(f));
    }
}

std::size_t StateSpace2P::per_aoi(Family2P f) const noexcept
{
    const auto c = static_cast<std::size_t>(cap_.value());
    switch (f) {
    case Family2P::Empty:
    case Family2P::TwoRequests:
    case Family2P::OneRequest:
        return 1;
    case Family2P::RequestAndUpdate:
    case Family2P::OneUpdate:
        return c + 1;
    case Family2P::TwoUpdates:
        return triangle(c);
    }
    return 0;
}

std::size_t StateSpace2P::index_of(const State2P& s) const
{
    if (!is_valid(s, cap_)) {
        throw ParameterError("state is not part of the 2-Packet state space");
    }
    const Family2P f = *s.family();
    const auto c = static_cast<std::size_t>(cap_.value());
    const auto d = static_cast<std::size_t>(s.aoi - 1);
    std::size_t inner = 0;
    if (f == Family2P::TwoUpdates) {
        inner = pair_offset(c, static_cast<std::size_t>(*s.buffer_age), static_cast<std::size_t>(*s.sampler_age));
    } else if (s.sampler_age) {
        inner = static_cast<std::size_t>(*s.sampler_age);
    }
    return family_offset(f) + d * per_aoi(f) + inner;
}

State2P StateSpace2P::state_at(std::size_t index) const
{
    if (index >= size()) {
        throw ParameterError("state index " + std::to_string(index) + " out of range");
    }
    int f = 0;
    while (index >= offsets_[f + 1]) {
        ++f;
    }
    const auto family = static_cast<Family2P>(f);
    const std::size_t rest = index - offsets_[f];
    const std::size_t per = per_aoi(family);
    const int aoi = static_cast<int>(rest / per) + 1;
    std::size_t inner = rest % per;
    switch (family) {
    case Family2P::Empty:
    case Family2P::TwoRequests:
    case Family2P::OneRequest:
        return State2P::make(family, aoi);
    case Family2P::RequestAndUpdate:
    case Family2P::OneUpdate:
        return State2P::make(family, aoi, std::nullopt, static_cast<int>(inner));
    case Family2P::TwoUpdates:
        break;
    }
    const auto c = static_cast<std::size_t>(cap_.value());
    std::size_t b = 0;
    while (inner >= c + 1 - b) {
        inner -= c + 1 - b;
        ++b;
    }
    return State2P::make(family, aoi, static_cast<int>(b), static_cast<int>(b + inner));
}

std::vector<State2P> enumerate_states_2p(AgeCap cap)
{
    const StateSpace2P space(cap);
    std::vector<State2P> states;
    states.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        states.push_back(space.state_at(i));
    }
    return states;
}

std::vector<Action> admissible_actions_2p(const State2P& s)
{
    const auto f = s.family();
    if (f == Family2P::Empty || f == Family2P::OneRequest || f == Family2P::OneUpdate) {
        return {Action::Idle, Action::Request};
    }
    return {Action::Idle};
}

std::vector<Outcome2P> transitions_2p(const State2P& s, Action a, const ServiceRates& rates, AgeCap cap)
{
    const auto family = s.family();
    if (!family) {
        throw ParameterError("state occupancy is outside the six reachable families");
    }
    if (a == Action::Request && s.active_requests() >= 2) {
        throw InadmissibleActionError("2-Packet: two requests are already active");
    }
    const double g = rates.gamma();
    const double gb = rates.gamma_bar();
    const double m = rates.mu();
    const double mb = rates.mu_bar();
    const int aoi = clamp_age(s.aoi, cap);
    const bool send = a == Action::Request;

    std::vector<Outcome2P> out;
    auto emit = [&out](Family2P f, int next_aoi, double p, std::optional<int> buffer_age = std::nullopt,
                       std::optional<int> sampler_age = std::nullopt) {
        if (p > 0.0) {
            out.push_back({State2P::make(f, next_aoi, buffer_age, sampler_age), p});
        }
    };

    switch (*family) {
    case Family2P::Empty:
        if (!send) {
            emit(Family2P::Empty, aoi, 1.0);
        } else {
            emit(Family2P::OneUpdate, aoi, g, std::nullopt, 0);
            emit(Family2P::OneRequest, aoi, gb);
        }
        break;
    case Family2P::TwoRequests:
        emit(Family2P::RequestAndUpdate, aoi, g, std::nullopt, 0);
        emit(Family2P::TwoRequests, aoi, gb);
        break;
    case Family2P::OneRequest:
        if (!send) {
            emit(Family2P::OneUpdate, aoi, g, std::nullopt, 0);
            emit(Family2P::OneRequest, aoi, gb);
        } else {
            emit(Family2P::RequestAndUpdate, aoi, g, std::nullopt, 0);
            emit(Family2P::TwoRequests, aoi, gb);
        }
        break;
    case Family2P::RequestAndUpdate: {
        const int age = clamp_age(*s.sampler_age, cap);
        emit(Family2P::RequestAndUpdate, aoi, gb * mb, std::nullopt, age);
        emit(Family2P::TwoUpdates, aoi, g * mb, 0, age);
        emit(Family2P::OneRequest, age, gb * m);
        emit(Family2P::OneUpdate, age, g * m, std::nullopt, 0);
        break;
    }
    case Family2P::TwoUpdates: {
        const int head = clamp_age(*s.sampler_age, cap);
        const int queued = clamp_age(*s.buffer_age, cap);
        emit(Family2P::OneUpdate, head, m, std::nullopt, queued);
        emit(Family2P::TwoUpdates, aoi, mb, queued, head);
        break;
    }
    case Family2P::OneUpdate: {
        const int age = clamp_age(*s.sampler_age, cap);
        if (!send) {
            emit(Family2P::OneUpdate, aoi, mb, std::nullopt, age);
            emit(Family2P::Empty, age, m);
        } else {
            emit(Family2P::RequestAndUpdate, aoi, gb * mb, std::nullopt, age);
            emit(Family2P::OneRequest, age, gb * m);
            emit(Family2P::TwoUpdates, aoi, g * mb, 0, age);
            emit(Family2P::OneUpdate, age, g * m, std::nullopt, 0);
        }
        break;
    }
    }
    return out;
}

double expected_cost_2p(const State2P& s, Action a, const ServiceRates& rates, AgeCap cap)
{
    double cost = 0.0;
    for (const auto& o : transitions_2p(s, a, rates, cap)) {
        cost += o.probability * o.next.aoi;
    }
    return cost;
}

TwoPacketModel build_two_packet_model(const ServiceRates& rates, AgeCap cap)
{
    require_weakly_accessible(rates);
    TwoPacketModel model{StateSpace2P(cap), rates, FiniteMdp{}};
    std::vector<Transition> row;
    for (std::size_t i = 0; i < model.space.size(); ++i) {
        const State2P s = model.space.state_at(i);
        model.mdp.begin_state();
        for (const Action a : admissible_actions_2p(s)) {
            row.clear();
            double cost = 0.0;
            for (const auto& o : transitions_2p(s, a, rates, cap)) {
                row.push_back({model.space.index_of(o.next), o.probability});
                cost += o.probability * o.next.aoi;
            }
            model.mdp.add_action(to_int(a), cost, row);
        }
    }
    model.mdp.validate();
    return model;
}

PolicyTable zero_wait_table_2p(const StateSpace2P& space)
{
    PolicyTable table(space.size(), 0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.state_at(i).active_requests() < 2) {
            table[i] = to_int(Action::Request);
        }
    }
    return table;
}

State2P embed(const State1P& s)
{
    return {s.aoi, false, s.controller_busy, false, s.sampler_busy, std::nullopt, s.sampler_age};
}

void write_solution_csv_2p(const StateSpace2P& space, const Solution& solution, std::ostream& out)
{
    out << "# gain=" << format_double(solution.gain) << ",epsilon=" << format_double(solution.epsilon)
        << ",iterations=" << solution.iterations << '\n';
    out << "state_id,aoi,controller_buffer,controller_busy,sampler_buffer,sampler_busy,buffer_age,"
           "sampler_age,action,bias\n";
    for (std::size_t i = 0; i < space.size(); ++i) {
        const State2P s = space.state_at(i);
        out << i << ',' << s.aoi << ',' << format_bool(s.controller_buffer) << ','
            << format_bool(s.controller_busy) << ',' << format_bool(s.sampler_buffer) << ','
            << format_bool(s.sampler_busy) << ',' << age_field(s.buffer_age) << ','
            << age_field(s.sampler_age) << ',' << solution.policy[i] << ','
            << format_double(solution.bias[i]) << '\n';
    }
}

} // namespace aoi
