#include "aoi/mdp_one_packet.hpp"

#include "aoi/csv.hpp"

#include <ostream>
#include <string>

namespace aoi {

bool is_valid(const State1P& s, AgeCap cap) noexcept
{
    const int c = cap.value();
    if (s.aoi < 1 || s.aoi > c) {
        return false;
    }
    if (s.controller_busy && s.sampler_busy) {
        return false;
    }
    if (s.sampler_busy != s.sampler_age.has_value()) {
        return false;
    }
    return !s.sampler_age || (*s.sampler_age >= 0 && *s.sampler_age <= c);
}

bool is_ordered(const State1P& s) noexcept
{
    return !s.sampler_age || *s.sampler_age <= s.aoi;
}

std::size_t StateSpace1P::size() const noexcept
{
    const auto c = static_cast<std::size_t>(cap_.value());
    return c * (c + 3);
}

std::size_t StateSpace1P::index_of(const State1P& s) const
{
    if (!is_valid(s, cap_)) {
        throw ParameterError("state is not part of the 1-Packet state space");
    }
    const auto c = static_cast<std::size_t>(cap_.value());
    const auto d = static_cast<std::size_t>(s.aoi - 1);
    switch (s.family()) {
    case Family1P::Empty:
        return d;
    case Family1P::ControllerBusy:
        return c + d;
    case Family1P::SamplerBusy:
        break;
    }
    return 2 * c + d * (c + 1) + static_cast<std::size_t>(*s.sampler_age);
}

State1P StateSpace1P::state_at(std::size_t index) const
{
    const auto c = static_cast<std::size_t>(cap_.value());
    if (index >= size()) {
        throw ParameterError("state index " + std::to_string(index) + " out of range");
    }
    if (index < c) {
        return State1P::empty(static_cast<int>(index) + 1);
    }
    if (index < 2 * c) {
        return State1P::requesting(static_cast<int>(index - c) + 1);
    }
    const std::size_t rest = index - 2 * c;
    return State1P::serving(static_cast<int>(rest / (c + 1)) + 1, static_cast<int>(rest % (c + 1)));
}

std::vector<State1P> enumerate_states(AgeCap cap)
{
    const StateSpace1P space(cap);
    std::vector<State1P> states;
    states.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        states.push_back(space.state_at(i));
    }
    return states;
}

std::vector<Action> admissible_actions(const State1P& s)
{
    if (s.family() == Family1P::Empty) {
        return {Action::Idle, Action::Request};
    }
    return {Action::Idle};
}

std::vector<Outcome1P> transitions_1p(const State1P& s, Action a, const ServiceRates& rates, AgeCap cap)
{
    if (a == Action::Request && s.family() != Family1P::Empty) {
        throw InadmissibleActionError("1-Packet: a request is already active");
    }
    const double g = rates.gamma();
    const double gb = rates.gamma_bar();
    const double m = rates.mu();
    const double mb = rates.mu_bar();
    const int next_aoi = clamp_age(s.aoi, cap);

    std::vector<Outcome1P> out;
    auto emit = [&out](const State1P& next, double p) {
        if (p > 0.0) {
            out.push_back({next, p});
        }
    };

    switch (s.family()) {
    case Family1P::Empty:
        if (a == Action::Idle) {
            emit(State1P::empty(next_aoi), 1.0);
        } else {
            emit(State1P::serving(next_aoi, 0), g);
            emit(State1P::requesting(next_aoi), gb);
        }
        break;
    case Family1P::ControllerBusy:
        emit(State1P::serving(next_aoi, 0), g);
        emit(State1P::requesting(next_aoi), gb);
        break;
    case Family1P::SamplerBusy: {
        const int age = *s.sampler_age;
        emit(State1P::empty(clamp_age(age, cap)), m);
        emit(State1P::serving(next_aoi, clamp_age(age, cap)), mb);
        break;
    }
    }
    return out;
}

double expected_cost_1p(const State1P& s, Action a, const ServiceRates& rates, AgeCap cap)
{
    double cost = 0.0;
    for (const auto& o : transitions_1p(s, a, rates, cap)) {
        cost += o.probability * o.next.aoi;
    }
    return cost;
}

OnePacketModel build_one_packet_model(const ServiceRates& rates, AgeCap cap)
{
    require_weakly_accessible(rates);
    OnePacketModel model{StateSpace1P(cap), rates, FiniteMdp{}};
    std::vector<Transition> row;
    for (std::size_t i = 0; i < model.space.size(); ++i) {
        const State1P s = model.space.state_at(i);
        model.mdp.begin_state();
        for (const Action a : admissible_actions(s)) {
            row.clear();
            double cost = 0.0;
            for (const auto& o : transitions_1p(s, a, rates, cap)) {
                row.push_back({model.space.index_of(o.next), o.probability});
                cost += o.probability * o.next.aoi;
            }
            model.mdp.add_action(to_int(a), cost, row);
        }
    }
    model.mdp.validate();
    return model;
}

PolicyTable zero_wait_table_1p(const StateSpace1P& space)
{
    PolicyTable table(space.size(), 0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (space.state_at(i).family() == Family1P::Empty) {
            table[i] = to_int(Action::Request);
        }
    }
    return table;
}

void write_solution_csv_1p(const StateSpace1P& space, const Solution& solution, std::ostream& out)
{
    out << "# gain=" << format_double(solution.gain) << ",epsilon=" << format_double(solution.epsilon)
        << ",iterations=" << solution.iterations << '\n';
    out << "state_id,aoi,controller_busy,sampler_busy,sampler_age,action,bias\n";
    for (std::size_t i = 0; i < space.size(); ++i) {
        const State1P s = space.state_at(i);
        out << i << ',' << s.aoi << ',' << format_bool(s.controller_busy) << ','
            << format_bool(s.sampler_busy) << ',' << (s.sampler_age ? std::to_string(*s.sampler_age) : "*")
            << ',' << solution.policy[i] << ',' << format_double(solution.bias[i]) << '\n';
    }
}

} // namespace aoi
