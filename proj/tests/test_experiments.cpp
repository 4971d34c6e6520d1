#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aoi/experiments.hpp"
#include "aoi/parallel.hpp"
#include "aoi/svg.hpp"

#include <sstream>
#include <stdexcept>

using namespace aoi;

TEST_CASE("unit grid")
{
    const auto g = unit_grid(4);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == 0.25);
    CHECK(g.back() == 1.0);
    CHECK_THROWS_AS((void)unit_grid(0), ParameterError);
}

TEST_CASE("threshold detection")
{
    const std::vector<int> up{0, 0, 1, 1};
    const std::vector<int> flat{1, 1, 1};
    const std::vector<int> back{0, 1, 0, 1};
    CHECK(is_threshold(up));
    CHECK(is_threshold(flat));
    CHECK_FALSE(is_threshold(back));
    CHECK(first_request(up) == std::optional<std::size_t>(2));
    CHECK_FALSE(first_request(std::vector<int>{0, 0}).has_value());
}

TEST_CASE("parallel map keeps index order and rethrows")
{
    const auto squares = parallel_map<int>(50, 4, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < squares.size(); ++i) {
        CHECK(squares[i] == static_cast<int>(i * i));
    }
    CHECK_THROWS_AS((void)parallel_map<int>(10, 3,
                                            [](std::size_t i) -> int {
                                                if (i == 7) {
                                                    throw std::runtime_error("job 7");
                                                }
                                                return 0;
                                            }),
                    std::runtime_error);
}

TEST_CASE("analytic sweep is independent of the worker count")
{
    const auto grid = unit_grid(12);
    std::ostringstream a;
    std::ostringstream b;
    write_analytic_csv(analytic_sweep(grid, grid, 1), a);
    write_analytic_csv(analytic_sweep(grid, grid, 3), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("gamma,mu,delta_zw1,delta_zw2,beta_star,delta_wait1_star,zw2_beats_zw1,waiting_beneficial\n",
                        0) == 0);
}

TEST_CASE("region summary on a coarse grid")
{
    const auto grid = unit_grid(20);
    const RegionSummary s = summarize_region(analytic_sweep(grid, grid));
    CHECK(s.sign_mismatches == 0);
    CHECK(s.zw2_everywhere_from_mu == doctest::Approx(0.75));
    CHECK(s.waiting_up_to_mu == doctest::Approx(0.35));
}

TEST_CASE("1-Packet empty-state structure")
{
    const SolveConfig cfg;
    const Structure1P low = structure_1p(ServiceRates(0.4, 0.1), AgeCap(50), cfg);
    CHECK(low.threshold);
    REQUIRE(first_request(low.empty_actions).has_value());
    CHECK(*first_request(low.empty_actions) > 0);

    const Structure1P high = structure_1p(ServiceRates(0.4, 0.6), AgeCap(50), cfg);
    CHECK(high.threshold);
    CHECK(first_request(high.empty_actions) == std::optional<std::size_t>(0));
}

TEST_CASE("2-Packet structure at a slow sampler")
{
    const Structure2P s = structure_2p(ServiceRates(0.4, 0.2), AgeCap(30), SolveConfig{});
    CHECK(s.one_request_idle);
    CHECK(s.one_update_threshold);
    CHECK(s.one_update_actions.size() == 30);
    CHECK(s.one_update_actions.front().size() == 31);
}

TEST_CASE("cap sweep and saturation")
{
    const std::vector<int> caps{10, 20, 40, 80};
    const auto serial = cap_sweep(ServiceRates(0.4, 0.4), caps, SolveConfig{}, 1);
    const auto threaded = cap_sweep(ServiceRates(0.4, 0.4), caps, SolveConfig{}, 2);
    REQUIRE(serial.size() == 4);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].cap == caps[i]);
        CHECK(serial[i].gain == threaded[i].gain);
    }
    CHECK(saturation_deviation(serial, 80) == 0.0);
    CHECK(saturation_deviation(serial, 30) < 5e-3);
    CHECK_THROWS_AS((void)saturation_deviation({}, 1), InsufficientDataError);
}

TEST_CASE("beta sweep matches the closed form")
{
    const ServiceRates r(0.4, 0.1);
    const auto pts = beta_sweep(r, 10);
    REQUIRE(pts.size() == 10);
    CHECK(pts[0].average_aoi == aoi_zw1(r).average_aoi);
    CHECK(pts[6].average_aoi == doctest::Approx(19.153203826).epsilon(1e-9));
}

TEST_CASE("comparison skips the deterministic point and orders the policies")
{
    SolveConfig cfg;
    cfg.epsilon = 1e-9;
    const auto rows = comparison({0.7, 1.0}, {0.3, 1.0}, AgeCap(30), cfg);
    CHECK(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(dominance_violation(r) <= 1e-6);
        CHECK(r.two_packet <= r.one_packet + 1e-6);
    }
    std::ostringstream out;
    write_comparison_csv(rows, out);
    CHECK(out.str().rfind("gamma,mu,zw1,zw2,one_packet_opt,two_packet_opt,wait1_star,beta_star\n", 0) == 0);
}

TEST_CASE("svg writer")
{
    SvgPlot plot("AoI <test>", "x", "y");
    plot.add_series("a & b", {{0.0, 1.0}, {1.0, 2.0}, {2.0, 1.5}});
    plot.add_series("steps", {{0.0, 0.5}, {2.0, 0.7}}, true);
    std::ostringstream out;
    plot.write(out);
    const std::string svg = out.str();
    CHECK(svg.rfind("<svg ", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("AoI &lt;test&gt;") != std::string::npos);
    CHECK(svg.find("a &amp; b") != std::string::npos);
    CHECK(svg.find("<path") != std::string::npos);

    SvgPlot heat("grid", "mu", "delta");
    heat.set_heat({0.1, 0.2}, {1, 2, 3}, {{0, 1}, {1, -1}, {1, 1}}, {"idle", "request"});
    std::ostringstream h;
    heat.write(h);
    // Five of the six cells are drawn, plus the background and the frame.
    std::size_t rects = 0;
    for (std::size_t pos = h.str().find("<rect"); pos != std::string::npos; pos = h.str().find("<rect", pos + 1)) {
        ++rects;
    }
    CHECK(rects == 5 + 2 + 2);
    CHECK_THROWS_AS(heat.set_heat({0.1}, {1, 2}, {{0}}, {}), ParameterError);
}
