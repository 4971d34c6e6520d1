#include "aoi/experiments.hpp"

#include "aoi/csv.hpp"
#include "aoi/mdp_one_packet.hpp"
#include "aoi/mdp_two_packet.hpp"
#include "aoi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace aoi {

std::vector<double> unit_grid(int n)
{
    if (n < 1) {
        throw ParameterError("grid size must be at least 1");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        out.push_back(static_cast<double>(k) / n);
    }
    return out;
}

bool is_threshold(std::span<const int> actions)
{
    return std::is_sorted(actions.begin(), actions.end());
}

std::optional<std::size_t> first_request(std::span<const int> actions)
{
    const auto it = std::find(actions.begin(), actions.end(), 1);
    if (it == actions.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - actions.begin());
}

AnalyticRow analytic_point(const ServiceRates& rates)
{
    const OptimalWait best = optimal_beta(rates);
    return {rates.gamma(),
            rates.mu(),
            aoi_zw1(rates).average_aoi,
            aoi_zw2(rates).average_aoi,
            best.beta,
            best.average_aoi,
            zw2_beats_zw1(rates),
            waiting_beneficial(rates)};
}

std::vector<AnalyticRow> analytic_sweep(const std::vector<double>& gammas, const std::vector<double>& mus,
                                        unsigned workers)
{
    const std::size_t n = gammas.size() * mus.size();
    return parallel_map<AnalyticRow>(n, workers, [&](std::size_t i) {
        return analytic_point(ServiceRates(gammas[i / mus.size()], mus[i % mus.size()]));
    });
}

void write_analytic_csv(const std::vector<AnalyticRow>& rows, std::ostream& out)
{
    out << "gamma,mu,delta_zw1,delta_zw2,beta_star,delta_wait1_star,zw2_beats_zw1,waiting_beneficial\n";
    for (const auto& r : rows) {
        out << csv_row({format_double(r.gamma), format_double(r.mu), format_double(r.delta_zw1),
                        format_double(r.delta_zw2), std::to_string(r.beta_star), format_double(r.delta_wait1_star),
                        format_bool(r.zw2_beats_zw1), format_bool(r.waiting_beneficial)});
    }
}

RegionSummary summarize_region(const std::vector<AnalyticRow>& rows)
{
    std::map<double, bool> zw2_all;
    RegionSummary s{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0};
    for (const auto& r : rows) {
        auto [it, inserted] = zw2_all.try_emplace(r.mu, true);
        it->second = it->second && r.zw2_beats_zw1;
        if (r.zw2_beats_zw1 != (r.delta_zw2 <= r.delta_zw1)) {
            ++s.sign_mismatches;
        }
        if (r.waiting_beneficial && !(s.waiting_up_to_mu >= r.mu)) {
            s.waiting_up_to_mu = r.mu;
        }
    }
    // Walk down from the largest mu while every gamma still favours ZW-2.
    for (auto it = zw2_all.rbegin(); it != zw2_all.rend() && it->second; ++it) {
        s.zw2_everywhere_from_mu = it->first;
    }
    return s;
}

Structure1P structure_1p(const ServiceRates& rates, AgeCap cap, const SolveConfig& cfg)
{
    const OnePacketModel model = build_one_packet_model(rates, cap);
    const Solution sol = solve_rvi(model.mdp, cfg);
    Structure1P out{rates.gamma(), rates.mu(), sol.gain, {}, false};
    for (int d = 1; d <= cap.value(); ++d) {
        out.empty_actions.push_back(sol.policy[model.space.index_of(State1P::empty(d))]);
    }
    out.threshold = is_threshold(out.empty_actions);
    return out;
}

Structure2P structure_2p(const ServiceRates& rates, AgeCap cap, const SolveConfig& cfg)
{
    const TwoPacketModel model = build_two_packet_model(rates, cap);
    const Solution sol = solve_rvi(model.mdp, cfg);
    const int c = cap.value();
    Structure2P out{rates.gamma(), rates.mu(), sol.gain, c, {}, {}, {}, true, true};
    auto action = [&](const State2P& s) { return sol.policy[model.space.index_of(s)]; };
    for (int d = 1; d <= c; ++d) {
        out.empty_actions.push_back(action(State2P::make(Family2P::Empty, d)));
        out.one_request_actions.push_back(action(State2P::make(Family2P::OneRequest, d)));
        std::vector<int> row;
        for (int age = 0; age <= c; ++age) {
            row.push_back(action(State2P::make(Family2P::OneUpdate, d, std::nullopt, age)));
        }
        // Only Delta_s <= delta is reachable.
        out.one_update_threshold =
            out.one_update_threshold && is_threshold(std::span<const int>(row).first(static_cast<std::size_t>(d) + 1));
        out.one_update_actions.push_back(std::move(row));
    }
    out.one_request_idle = std::all_of(out.one_request_actions.begin(), out.one_request_actions.end(),
                                       [](int a) { return a == 0; });
    return out;
}

std::vector<CapPoint> cap_sweep(const ServiceRates& rates, const std::vector<int>& caps, const SolveConfig& cfg,
                                unsigned workers)
{
    return parallel_map<CapPoint>(caps.size(), workers, [&](std::size_t i) {
        const OnePacketModel model = build_one_packet_model(rates, AgeCap(caps[i]));
        const Solution sol = solve_rvi(model.mdp, cfg);
        return CapPoint{caps[i], sol.gain, sol.iterations};
    });
}

double saturation_deviation(const std::vector<CapPoint>& points, int above)
{
    if (points.empty()) {
        throw InsufficientDataError("empty cap sweep");
    }
    const auto ref = std::max_element(points.begin(), points.end(),
                                      [](const CapPoint& a, const CapPoint& b) { return a.cap < b.cap; });
    double worst = 0.0;
    for (const auto& p : points) {
        if (p.cap > above) {
            worst = std::max(worst, std::abs(p.gain - ref->gain) / ref->gain);
        }
    }
    return worst;
}

std::vector<BetaPoint> beta_sweep(const ServiceRates& rates, int max_beta)
{
    std::vector<BetaPoint> out;
    for (int b = 1; b <= max_beta; ++b) {
        out.push_back({b, aoi_wait1(rates, WaitThreshold(b)).average_aoi});
    }
    return out;
}

std::vector<ComparisonRow> comparison(const std::vector<double>& gammas, const std::vector<double>& mus, AgeCap cap,
                                      const SolveConfig& cfg, unsigned workers)
{
    std::vector<ServiceRates> points;
    for (double g : gammas) {
        for (double m : mus) {
            const ServiceRates r(g, m);
            if (!r.deterministic()) {
                points.push_back(r);
            }
        }
    }
    return parallel_map<ComparisonRow>(points.size(), workers, [&](std::size_t i) {
        const ServiceRates& r = points[i];
        const OptimalWait best = optimal_beta(r);
        const double one = solve_rvi(build_one_packet_model(r, cap).mdp, cfg).gain;
        const double two = solve_rvi(build_two_packet_model(r, cap).mdp, cfg).gain;
        return ComparisonRow{r.gamma(), r.mu(), aoi_zw1(r).average_aoi, aoi_zw2(r).average_aoi,
                             one,       two,    best.average_aoi,       best.beta};
    });
}

double dominance_violation(const ComparisonRow& row)
{
    const double others = std::min({row.zw1, row.zw2, row.one_packet, row.wait1_star});
    return row.two_packet - others;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out)
{
    out << "gamma,mu,zw1,zw2,one_packet_opt,two_packet_opt,wait1_star,beta_star\n";
    for (const auto& r : rows) {
        out << csv_row({format_double(r.gamma), format_double(r.mu), format_double(r.zw1), format_double(r.zw2),
                        format_double(r.one_packet), format_double(r.two_packet), format_double(r.wait1_star),
                        std::to_string(r.beta_star)});
    }
}

} // namespace aoi
