#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aoi/analytic.hpp"
#include "aoi/policy_eval.hpp"
#include "aoi/simulator.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <cmath>
#include <cstring>
#include <sstream>

using namespace aoi;

namespace {

SystemConfig config(double gamma, double mu, Capacity capacity, std::int64_t horizon, std::uint64_t seed = 11,
                    std::int64_t warmup = 1000)
{
    return {ServiceRates(gamma, mu), capacity, warmup, horizon, seed};
}

// Largest flag count that independent 1% tests exceed with probability below 0.1%.
std::size_t flag_allowance(std::size_t cells)
{
    const boost::math::binomial dist(static_cast<double>(cells), 0.01);
    return static_cast<std::size_t>(boost::math::quantile(dist, 0.999));
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0 || (std::isnan(a) && std::isnan(b)); }

} // namespace

TEST_CASE("deterministic systems")
{
    SUBCASE("ZW-1 alternates between ages 1 and 2")
    {
        const SimResult r = run_simulation(config(1.0, 1.0, Capacity::OnePacket, 10'000, 1, 0), ZeroWait1{});
        CHECK(r.time_avg_aoi == 1.5);
        CHECK(r.cycle_aoi == doctest::Approx(1.5).epsilon(1e-15));
        CHECK(r.mean_I == 2.0);
        CHECK(r.mean_IT == 2.0);
    }
    SUBCASE("ZW-2 pipelines to age 1")
    {
        const SimResult r = run_simulation(config(1.0, 1.0, Capacity::TwoPacket, 10'000, 1, 10), ZeroWait2{});
        CHECK(r.time_avg_aoi == 1.0);
        CHECK(r.cycle_aoi == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.busy_fraction == 0.0);
    }
}

TEST_CASE("hand-stepped ZW-1 trace with unit services")
{
    const auto trace = simulate_trace(config(1.0, 1.0, Capacity::OnePacket, 6, 1, 0), ZeroWait1{});
    REQUIRE(trace.size() == 6);
    // slot 0: empty, request; slot 1: update of age 0 in service and delivered.
    CHECK(trace[0].action == Action::Request);
    CHECK_FALSE(trace[0].controller_busy);
    CHECK(trace[0].deliveries == 0);
    CHECK(trace[1].sampler_busy);
    CHECK(trace[1].sampler_age == 0);
    CHECK(trace[1].deliveries == 1);
    CHECK(trace[2].aoi == 1);
    CHECK(trace[3].aoi == 2);
    CHECK(trace[4].aoi == 1);
    for (const auto& rec : extract_cycles(trace)) {
        CHECK(rec.interarrival == 2);
        CHECK(rec.system_time == 1);
    }
}

TEST_CASE("cycle extraction from deterministic traces")
{
    SUBCASE("ZW-1")
    {
        const auto cycles = extract_cycles(simulate_trace(config(1.0, 1.0, Capacity::OnePacket, 200, 1, 0), ZeroWait1{}));
        CHECK(cycles.size() > 90);
        for (const auto& c : cycles) {
            CHECK(c.interarrival == 2);
            CHECK(c.system_time == 1);
        }
        CHECK(average_aoi_from_cycles(cycles) == doctest::Approx(1.5));
    }
    SUBCASE("ZW-2")
    {
        const auto cycles = extract_cycles(simulate_trace(config(1.0, 1.0, Capacity::TwoPacket, 200, 1, 0), ZeroWait2{}));
        CHECK(cycles.size() > 190);
        for (const auto& c : cycles) {
            CHECK(c.interarrival == 1);
            CHECK(c.system_time == 1);
        }
    }
    SUBCASE("Wait-1 with beta = 3")
    {
        const auto cycles = extract_cycles(
            simulate_trace(config(1.0, 1.0, Capacity::OnePacket, 400, 1, 0), Wait1{WaitThreshold(3)}));
        // The first cycle starts from the initial age; every later one is I = 1 + 2 + 1.
        for (std::size_t i = 1; i < cycles.size(); ++i) {
            CHECK(cycles[i].interarrival == 4);
            CHECK(cycles[i].system_time == 1);
        }
    }
    SUBCASE("too few deliveries")
    {
        CHECK_THROWS_AS((void)extract_cycles(simulate_trace(config(1.0, 1.0, Capacity::OnePacket, 2, 1, 0), ZeroWait1{})),
                        InsufficientDataError);
    }
}

TEST_CASE("trace CSV")
{
    const auto trace = simulate_trace(config(0.5, 0.5, Capacity::TwoPacket, 50, 3, 0), ZeroWait2{});
    std::ostringstream out;
    write_trace_csv(trace, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "slot,aoi,controller_buffer,controller_busy,sampler_buffer,sampler_busy,buffer_age,sampler_age,"
                  "action,deliveries");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    CHECK(rows == 50);
}

TEST_CASE("policy and capacity compatibility")
{
    CHECK_THROWS_AS((void)run_simulation(config(0.5, 0.5, Capacity::TwoPacket, 100), ZeroWait1{}), ConfigError);
    CHECK_THROWS_AS((void)run_simulation(config(0.5, 0.5, Capacity::TwoPacket, 100), Wait1{WaitThreshold(2)}),
                    ConfigError);
    CHECK_THROWS_AS((void)run_simulation(config(0.5, 0.5, Capacity::OnePacket, 100), ZeroWait2{}), ConfigError);
    CHECK_THROWS_AS((void)run_simulation(config(0.5, 0.5, Capacity::OnePacket, 100, 1, 100), ZeroWait1{}),
                    ConfigError);

    const auto model = build_one_packet_model(ServiceRates(0.5, 0.5), AgeCap(10));
    const Solution sol = solve_rvi(model.mdp);
    CHECK_THROWS_AS((void)run_table_policy(config(0.5, 0.5, Capacity::OnePacket, 100), sol, AgeCap(11)),
                    ConfigError);
    CHECK_THROWS_AS((void)run_table_policy(config(0.5, 0.5, Capacity::TwoPacket, 100), sol, AgeCap(10)),
                    ConfigError);
    CHECK_NOTHROW((void)run_table_policy(config(0.5, 0.5, Capacity::OnePacket, 2000), sol, AgeCap(10)));

    PolicyTable all_ones(model.space.size(), 1);
    CHECK_THROWS_AS((void)run_simulation(config(0.5, 0.5, Capacity::OnePacket, 2000), TablePolicy{all_ones, AgeCap(10)}),
                    InadmissibleActionError);
}

TEST_CASE("same seed, same bits")
{
    const auto cfg = config(0.3, 0.6, Capacity::TwoPacket, 200'000, 1234);
    const SimResult a = run_simulation(cfg, ZeroWait2{});
    const SimResult b = run_simulation(cfg, ZeroWait2{});
    CHECK(same_bits(a.time_avg_aoi, b.time_avg_aoi));
    CHECK(same_bits(a.cycle_aoi, b.cycle_aoi));
    CHECK(same_bits(a.mean_I2, b.mean_I2));
    CHECK(a.cycles == b.cycles);
    CHECK(a.busy_arrivals == b.busy_arrivals);
    CHECK(sim_result_csv_row("ZW2", cfg, a) == sim_result_csv_row("ZW2", cfg, b));

    auto other = cfg;
    other.seed = 1235;
    CHECK(run_simulation(other, ZeroWait2{}).time_avg_aoi != a.time_avg_aoi);
}

TEST_CASE("ZW-1 at gamma = mu = 0.5 over 10^7 slots")
{
    const SimResult r = run_simulation(config(0.5, 0.5, Capacity::OnePacket, 10'000'000, 3), ZeroWait1{});
    CHECK(std::abs(r.time_avg_aoi - 4.0) <= 0.04);
}

TEST_CASE("time and cycle estimators agree")
{
    for (const auto& [g, m] : {std::pair{0.2, 0.3}, std::pair{0.7, 0.4}, std::pair{0.9, 0.9}}) {
        const auto one = config(g, m, Capacity::OnePacket, 400'000, 5);
        const auto two = config(g, m, Capacity::TwoPacket, 400'000, 5);
        for (const SimResult& r : {run_simulation(one, ZeroWait1{}), run_simulation(one, Wait1{WaitThreshold(6)}),
                                   run_simulation(two, ZeroWait2{})}) {
            const double tol = std::max(0.01 * r.time_avg_aoi, 3.0 * 50.0 / 400'000.0);
            CHECK(std::abs(r.time_avg_aoi - r.cycle_aoi) <= tol);
        }
    }
}

TEST_CASE("cycle moments match the closed forms within three standard errors")
{
    const std::int64_t horizon = 2'000'000;
    auto check = [](const SimResult& r, const AoiBreakdown& b) {
        CHECK(std::abs(r.mean_I - b.mean_interarrival) <= 3.0 * r.se_I);
        CHECK(std::abs(r.mean_I2 - b.second_moment) <= 3.0 * r.se_I2);
        CHECK(std::abs(r.mean_IT - b.cross_term) <= 3.0 * r.se_IT);
    };
    const ServiceRates rates(0.45, 0.35);
    check(run_simulation(config(0.45, 0.35, Capacity::OnePacket, horizon, 21), ZeroWait1{}), aoi_zw1(rates));
    check(run_simulation(config(0.45, 0.35, Capacity::TwoPacket, horizon, 22), ZeroWait2{}), aoi_zw2(rates));
    check(run_simulation(config(0.45, 0.35, Capacity::OnePacket, horizon, 23), Wait1{WaitThreshold(5)}),
          aoi_wait1(rates, WaitThreshold(5)));

    const SimResult z2 = run_simulation(config(0.45, 0.35, Capacity::TwoPacket, horizon, 24), ZeroWait2{});
    CHECK(std::abs(z2.busy_fraction - p_busy(rates)) <= 3.0 * z2.busy_fraction_se);
    CHECK(z2.busy_arrivals > 0);
}

TEST_CASE("RVI policy simulated")
{
    SUBCASE("1-Packet in the zero-wait region")
    {
        const auto model = build_one_packet_model(ServiceRates(0.9, 0.9), AgeCap(50));
        const Solution sol = solve_rvi(model.mdp);
        const SimResult r = run_table_policy(config(0.9, 0.9, Capacity::OnePacket, 10'000'000, 8), sol, AgeCap(50));
        CHECK(std::abs(r.time_avg_aoi - 1.7778) <= 0.01 * 1.7778);
        CHECK(std::abs(r.time_avg_aoi - evaluate_policy_exact(model.mdp, sol.policy)) <= 4.0 * r.time_avg_se);
    }
    SUBCASE("2-Packet does no worse than ZW-2")
    {
        const auto model = build_two_packet_model(ServiceRates(0.8, 0.8), AgeCap(50));
        const Solution sol = solve_rvi(model.mdp);
        const auto cfg = config(0.8, 0.8, Capacity::TwoPacket, 2'000'000, 9);
        const SimResult rvi = run_table_policy(cfg, sol, AgeCap(50));
        const SimResult zw2 = run_simulation(cfg, ZeroWait2{});
        CHECK(rvi.time_avg_aoi <= zw2.time_avg_aoi + 2.0 * zw2.time_avg_se);
    }
    SUBCASE("never sampling")
    {
        const StateSpace1P space(AgeCap(10));
        const PolicyTable idle(space.size(), 0);
        const SimResult r =
            run_simulation(config(0.5, 0.5, Capacity::OnePacket, 100'000, 1, 10), TablePolicy{idle, AgeCap(10)});
        CHECK(r.cycles == 0);
        CHECK(std::isnan(r.cycle_aoi));
        CHECK(r.time_avg_aoi == doctest::Approx(100'000 / 2.0).epsilon(0.01));
    }
}

TEST_CASE("observed states are the clamped MDP states")
{
    SlotView v{0, 80, 0, 1, 75, 0};
    const State1P s = observe_1p(v, AgeCap(50));
    CHECK(s == State1P::serving(50, 50));
    v = {0, 12, 1, 2, 9, 3};
    CHECK_THROWS_AS((void)observe_2p(v, AgeCap(50)), InvariantError);
    v = {0, 12, 0, 2, 9, 3};
    CHECK(observe_2p(v, AgeCap(5)) == State2P::make(Family2P::TwoUpdates, 5, 3, 5));
}

TEST_CASE("empirical kernel check")
{
    SUBCASE("ZW-1 at 0.5")
    {
        const auto report = empirical_kernel_check(config(0.5, 0.5, Capacity::OnePacket, 1'000'000, 17), ZeroWait1{},
                                                   1000, {AgeCap(50)});
        CHECK(report.unexpected_transitions == 0);
        CHECK(report.tested > 20);
        CHECK(report.flagged <= flag_allowance(report.tested));
    }
    SUBCASE("deterministic rates follow the kernel support exactly")
    {
        const auto report =
            empirical_kernel_check(config(1.0, 1.0, Capacity::OnePacket, 10'000, 1, 10), ZeroWait1{}, 10, {AgeCap(10)});
        CHECK(report.unexpected_transitions == 0);
        CHECK(report.flagged == 0);
        for (const auto& cell : report.cells) {
            CHECK(cell.dof == 0);
        }
    }
    SUBCASE("ZW-2 buffers updates")
    {
        const auto report = empirical_kernel_check(config(0.5, 0.5, Capacity::TwoPacket, 1'000'000, 19), ZeroWait2{},
                                                   1000, {AgeCap(50)});
        CHECK(report.unexpected_transitions == 0);
        CHECK(report.family_visits[static_cast<std::size_t>(Family2P::TwoUpdates)] > 0);
        CHECK(report.tested > 20);
        CHECK(report.flagged <= flag_allowance(report.tested));
    }
    SUBCASE("a wrong reference kernel is caught")
    {
        KernelCheckOptions options{AgeCap(30)};
        options.reference_rates = ServiceRates(0.5, 0.35);
        const auto report =
            empirical_kernel_check(config(0.5, 0.5, Capacity::OnePacket, 300'000, 4), ZeroWait1{}, 1000, options);
        CHECK(report.tested > 5);
        CHECK(report.flagged_fraction() > 0.5);
    }
}
