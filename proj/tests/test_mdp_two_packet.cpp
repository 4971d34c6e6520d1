#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aoi/mdp_two_packet.hpp"

#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>

using namespace aoi;

namespace {

std::string key(const State2P& s)
{
    auto age = [](const std::optional<int>& a) { return a ? std::to_string(*a) : std::string("*"); };
    return std::to_string(s.aoi) + "," + std::to_string(int{s.controller_buffer}) + "," +
           std::to_string(int{s.controller_busy}) + "," + std::to_string(int{s.sampler_buffer}) + "," +
           std::to_string(int{s.sampler_busy}) + "," + age(s.buffer_age) + "," + age(s.sampler_age);
}

std::map<std::string, double> as_map(const std::vector<Outcome2P>& outcomes)
{
    std::map<std::string, double> m;
    for (const auto& o : outcomes) {
        m[key(o.next)] += o.probability;
    }
    return m;
}

std::size_t triangle(int c) { return static_cast<std::size_t>((c + 1) * (c + 2) / 2); }

const double kRateGrid[] = {0.05, 0.3, 0.5, 0.77, 1.0};

} // namespace

TEST_CASE("state counts")
{
    CHECK(enumerate_states_2p(AgeCap(2)).size() == 30);
    for (int c = 2; c <= 30; ++c) {
        const std::size_t expected = static_cast<std::size_t>(c) * (3 + 2 * static_cast<std::size_t>(c + 1) + triangle(c));
        CHECK(StateSpace2P(AgeCap(c)).size() == expected);
    }
    CHECK(StateSpace2P(AgeCap(50)).size() == 71550);
}

TEST_CASE("enumeration invariants and indexing")
{
    const AgeCap cap(6);
    const StateSpace2P space(cap);
    const auto states = enumerate_states_2p(cap);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const State2P& s = states[i];
        CHECK(is_valid(s, cap));
        CHECK(s.family().has_value());
        CHECK(s.active_requests() <= 2);
        CHECK((!s.controller_buffer || s.controller_busy));
        CHECK((!s.sampler_buffer || s.sampler_busy));
        if (s.buffer_age && s.sampler_age) {
            CHECK(*s.buffer_age <= *s.sampler_age);
        }
        CHECK(space.index_of(s) == i);
        CHECK(space.state_at(i) == s);
        seen.insert(key(s));
    }
    CHECK(seen.size() == states.size());

    State2P orphan_buffer;
    orphan_buffer.controller_buffer = true;
    CHECK_FALSE(is_valid(orphan_buffer, cap));
    CHECK_THROWS_AS((void)space.index_of(orphan_buffer), ParameterError);

    const State2P reversed = State2P::make(Family2P::TwoUpdates, 5, 3, 1);
    CHECK_FALSE(is_valid(reversed, cap));
}

TEST_CASE("family blocks are contiguous")
{
    const StateSpace2P space(AgeCap(5));
    for (int f = 0; f < kFamilyCount2P; ++f) {
        const auto family = static_cast<Family2P>(f);
        const std::size_t begin = space.family_offset(family);
        CHECK(space.state_at(begin).family() == family);
        if (begin > 0) {
            CHECK(space.state_at(begin - 1).family() != family);
        }
    }
}

TEST_CASE("admissible actions")
{
    const std::vector<Action> both{Action::Idle, Action::Request};
    const std::vector<Action> idle{Action::Idle};
    CHECK(admissible_actions_2p(State2P::make(Family2P::Empty, 4)) == both);
    CHECK(admissible_actions_2p(State2P::make(Family2P::OneRequest, 4)) == both);
    CHECK(admissible_actions_2p(State2P::make(Family2P::OneUpdate, 4, std::nullopt, 1)) == both);
    CHECK(admissible_actions_2p(State2P::make(Family2P::TwoRequests, 4)) == idle);
    CHECK(admissible_actions_2p(State2P::make(Family2P::RequestAndUpdate, 4, std::nullopt, 2)) == idle);
    CHECK(admissible_actions_2p(State2P::make(Family2P::TwoUpdates, 4, 1, 2)) == idle);
}

TEST_CASE("transition examples")
{
    const AgeCap cap(50);
    SUBCASE("request and update in service")
    {
        const auto m = as_map(transitions_2p(State2P::make(Family2P::RequestAndUpdate, 5, std::nullopt, 2),
                                             Action::Idle, ServiceRates(0.5, 0.5), cap));
        CHECK(m.size() == 4);
        CHECK(m.at("6,0,1,0,1,*,3") == doctest::Approx(0.25));
        CHECK(m.at("6,0,0,1,1,0,3") == doctest::Approx(0.25));
        CHECK(m.at("3,0,1,0,0,*,*") == doctest::Approx(0.25));
        CHECK(m.at("3,0,0,0,1,*,0") == doctest::Approx(0.25));
    }
    SUBCASE("head-of-line delivery promotes the queued update")
    {
        const auto m = as_map(transitions_2p(State2P::make(Family2P::TwoUpdates, 5, 1, 3), Action::Idle,
                                             ServiceRates(0.5, 0.4), cap));
        CHECK(m.size() == 2);
        CHECK(m.at("4,0,0,0,1,*,2") == doctest::Approx(0.4));
        CHECK(m.at("6,0,0,1,1,2,4") == doctest::Approx(0.6));
    }
    SUBCASE("empty and idle")
    {
        const auto m =
            as_map(transitions_2p(State2P::make(Family2P::Empty, 5), Action::Idle, ServiceRates(0.5, 0.4), cap));
        CHECK(m.size() == 1);
        CHECK(m.at("6,0,0,0,0,*,*") == doctest::Approx(1.0));
    }
    SUBCASE("second request queues behind the first")
    {
        const auto m = as_map(
            transitions_2p(State2P::make(Family2P::OneRequest, 5), Action::Request, ServiceRates(0.3, 0.4), cap));
        CHECK(m.at("6,0,1,0,1,*,0") == doctest::Approx(0.3));
        CHECK(m.at("6,1,1,0,0,*,*") == doctest::Approx(0.7));
    }
    SUBCASE("request while one update is in service")
    {
        const auto m = as_map(transitions_2p(State2P::make(Family2P::OneUpdate, 7, std::nullopt, 2),
                                             Action::Request, ServiceRates(0.3, 0.4), cap));
        CHECK(m.size() == 4);
        CHECK(m.at("8,0,1,0,1,*,3") == doctest::Approx(0.7 * 0.6));
        CHECK(m.at("3,0,1,0,0,*,*") == doctest::Approx(0.7 * 0.4));
        CHECK(m.at("8,0,0,1,1,0,3") == doctest::Approx(0.3 * 0.6));
        CHECK(m.at("3,0,0,0,1,*,0") == doctest::Approx(0.3 * 0.4));
    }
    SUBCASE("inadmissible request")
    {
        CHECK_THROWS_AS((void)transitions_2p(State2P::make(Family2P::TwoRequests, 3), Action::Request,
                                             ServiceRates(0.5, 0.5), cap),
                        InadmissibleActionError);
        CHECK_THROWS_AS((void)transitions_2p(State2P::make(Family2P::TwoUpdates, 3, 0, 1), Action::Request,
                                             ServiceRates(0.5, 0.5), cap),
                        InadmissibleActionError);
    }
}

TEST_CASE("expected cost examples")
{
    const AgeCap cap(50);
    CHECK(expected_cost_2p(State2P::make(Family2P::TwoUpdates, 5, 1, 3), Action::Idle, ServiceRates(0.5, 0.4),
                           cap) == doctest::Approx(5.2));
    CHECK(expected_cost_2p(State2P::make(Family2P::TwoRequests, 5), Action::Idle, ServiceRates(0.5, 0.4), cap) ==
          doctest::Approx(6.0));
    CHECK(expected_cost_2p(State2P::make(Family2P::Empty, 50), Action::Idle, ServiceRates(0.5, 0.4), cap) ==
          doctest::Approx(50.0));
}

TEST_CASE("kernel rows are stochastic with valid successors")
{
    const AgeCap cap(7);
    const auto states = enumerate_states_2p(cap);
    for (const double g : kRateGrid) {
        for (const double m : kRateGrid) {
            const ServiceRates rates(g, m);
            for (const State2P& s : states) {
                for (const Action a : admissible_actions_2p(s)) {
                    double total = 0.0;
                    for (const auto& o : transitions_2p(s, a, rates, cap)) {
                        CHECK(is_valid(o.next, cap));
                        total += o.probability;
                        if (is_ordered(s)) {
                            CHECK(is_ordered(o.next));
                        }
                    }
                    CHECK(std::abs(total - 1.0) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("with a drain-in-one-slot sampler no update is ever queued")
{
    const AgeCap cap(8);
    const StateSpace2P space(cap);
    for (const double g : {0.2, 0.6, 0.99}) {
        const ServiceRates rates(g, 1.0);
        // Every state of the other five families, under every action, avoids the queued family.
        for (const State2P& s : enumerate_states_2p(cap)) {
            if (s.family() == Family2P::TwoUpdates) {
                continue;
            }
            for (const Action a : admissible_actions_2p(s)) {
                for (const auto& o : transitions_2p(s, a, rates, cap)) {
                    CHECK(o.next.family() != Family2P::TwoUpdates);
                }
            }
        }
        // Breadth-first search from the empty system confirms it.
        std::vector<bool> seen(space.size(), false);
        std::queue<std::size_t> open;
        const std::size_t start = space.index_of(State2P::make(Family2P::Empty, 1));
        seen[start] = true;
        open.push(start);
        while (!open.empty()) {
            const State2P s = space.state_at(open.front());
            open.pop();
            CHECK(s.family() != Family2P::TwoUpdates);
            for (const Action a : admissible_actions_2p(s)) {
                for (const auto& o : transitions_2p(s, a, rates, cap)) {
                    const std::size_t j = space.index_of(o.next);
                    if (!seen[j]) {
                        seen[j] = true;
                        open.push(j);
                    }
                }
            }
        }
    }
    SUBCASE("but a slower sampler reaches it")
    {
        const auto out = transitions_2p(State2P::make(Family2P::OneUpdate, 3, std::nullopt, 1), Action::Request,
                                        ServiceRates(0.5, 0.9), cap);
        bool queued = false;
        for (const auto& o : out) {
            queued = queued || o.next.family() == Family2P::TwoUpdates;
        }
        CHECK(queued);
    }
}

TEST_CASE("sending only from the empty system reproduces the 1-Packet kernel")
{
    const AgeCap cap(9);
    for (const double g : kRateGrid) {
        for (const double m : kRateGrid) {
            const ServiceRates rates(g, m);
            for (const State1P& s : enumerate_states(cap)) {
                for (const Action a : admissible_actions(s)) {
                    std::map<std::string, double> one;
                    for (const auto& o : transitions_1p(s, a, rates, cap)) {
                        one[key(embed(o.next))] += o.probability;
                    }
                    const auto two = as_map(transitions_2p(embed(s), a, rates, cap));
                    REQUIRE(one.size() == two.size());
                    for (const auto& [k, p] : one) {
                        REQUIRE(two.count(k) == 1);
                        CHECK(std::abs(two.at(k) - p) <= 1e-15);
                    }
                    CHECK(expected_cost_2p(embed(s), a, rates, cap) ==
                          doctest::Approx(expected_cost_1p(s, a, rates, cap)).epsilon(1e-15));
                }
            }
        }
    }
}

TEST_CASE("model build and zero-wait table")
{
    CHECK_THROWS_AS((void)build_two_packet_model(ServiceRates(1.0, 1.0), AgeCap(5)), ParameterError);
    const auto model = build_two_packet_model(ServiceRates(0.6, 0.3), AgeCap(5));
    CHECK(model.mdp.num_states() == model.space.size());
    const auto table = zero_wait_table_2p(model.space);
    for (std::size_t i = 0; i < model.space.size(); ++i) {
        const State2P s = model.space.state_at(i);
        CHECK((table[i] == 1) == (s.active_requests() < 2));
        CHECK(model.mdp.find_action(i, table[i]) != nullptr);
    }
}
