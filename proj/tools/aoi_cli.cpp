// aoi: command-line front end for the two-way-delay AoI toolkit.

#include "aoi/analytic.hpp"
#include "aoi/csv.hpp"
#include "aoi/experiments.hpp"
#include "aoi/mdp_one_packet.hpp"
#include "aoi/mdp_two_packet.hpp"
#include "aoi/parallel.hpp"
#include "aoi/policy_eval.hpp"
#include "aoi/rvi.hpp"
#include "aoi/simulator.hpp"
#include "aoi/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <list>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace aoi;

constexpr int kExitUsage = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitInvariant = 4;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A figure's structural check did not hold.
class CheckFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::vector<double> gamma;
    std::vector<double> mu;
    int beta = 0;
    int cap = 0;
    double epsilon = 0.0;
    std::size_t max_iterations = 1'000'000;
    std::int64_t horizon = 1'000'000;
    std::int64_t warmup = 1000;
    std::uint64_t seed = 1;
    int grid = 0;
    std::string out;
    unsigned workers = 1;
    std::string policy;
    int capacity = 0;
    int replications = 1;
    std::string trace;
    std::string kernel_out;
    std::int64_t kernel_visits = 200;
    int delta = 0;
    int max_beta = 0;
    std::string config;
};

template <class T>
void assign(const json& value, T& var)
{
    value.get_to(var);
}

void assign(const json& value, std::vector<double>& var)
{
    if (value.is_array()) {
        value.get_to(var);
    } else {
        var = {value.get<double>()};
    }
}

// Registers flags and remembers how to fill each one from a JSON config
// when the flag itself was not given.
class Binder {
public:
    explicit Binder(CLI::App& app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& name, T& var, const std::string& help)
    {
        CLI::Option* opt = app_.add_option("--" + name, var, help);
        std::string key = name;
        std::replace(key.begin(), key.end(), '-', '_');
        appliers_.push_back([opt, key, &var](const json& j) {
            if (opt->count() == 0 && j.contains(key)) {
                assign(j.at(key), var);
            }
        });
        return opt;
    }

    void apply(const json& j) const
    {
        for (const auto& f : appliers_) {
            f(j);
        }
    }

    [[nodiscard]] CLI::App& app() const noexcept { return app_; }

private:
    CLI::App& app_;
    std::vector<std::function<void(const json&)>> appliers_;
};

void add_rates(Binder& b, Options& o)
{
    b.add("gamma", o.gamma, "Controller service rate(s) in (0,1]")->delimiter(',');
    b.add("mu", o.mu, "Sampler service rate(s) in (0,1]")->delimiter(',');
}

void add_solver(Binder& b, Options& o)
{
    b.add("cap", o.cap, "Age upper bound of the MDP");
    b.add("epsilon", o.epsilon, "RVI stopping threshold");
    b.add("max-iterations", o.max_iterations, "RVI iteration limit");
}

void add_common(Binder& b, Options& o)
{
    b.add("out", o.out, "Output path (prefix for figures)");
    b.add("workers", o.workers, "Concurrent jobs");
    b.app().add_option("--config", o.config, "JSON file with flag values; flags win");
}

template <class F>
void with_output(const std::string& path, F&& write)
{
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw UsageError("cannot open '" + path + "' for writing");
    }
    write(file);
    if (!file) {
        throw UsageError("failed writing '" + path + "'");
    }
}

std::vector<double> require_list(const std::vector<double>& v, const char* name)
{
    if (v.empty()) {
        throw UsageError(std::string("--") + name + " is required");
    }
    return v;
}

double require_single(const std::vector<double>& v, const char* name)
{
    if (v.size() != 1) {
        throw UsageError(std::string("--") + name + " takes exactly one value here");
    }
    return v.front();
}

std::vector<double> list_or(const std::vector<double>& v, std::vector<double> fallback)
{
    return v.empty() ? fallback : v;
}

SolveConfig solve_config(const Options& o, double default_epsilon)
{
    SolveConfig cfg;
    cfg.epsilon = o.epsilon > 0.0 ? o.epsilon : default_epsilon;
    cfg.max_iterations = o.max_iterations;
    return cfg;
}

AgeCap cap_or(const Options& o, int fallback) { return AgeCap(o.cap > 0 ? o.cap : fallback); }

std::string prefix(const Options& o, const char* name) { return o.out.empty() ? std::string(name) : o.out; }

void write_svg(const std::string& path, const SvgPlot& plot)
{
    with_output(path, [&](std::ostream& out) { plot.write(out); });
}

std::string gamma_tag(double g) { return "-gamma" + format_double(g); }

const std::vector<double> kFigureGammas{0.4, 0.7, 1.0};

std::vector<double> tenth_grid() { return unit_grid(10); }

// ---- analytic ------------------------------------------------------------

int cmd_analytic(const Options& o)
{
    const std::string policy = o.policy.empty() ? "all" : o.policy;
    if (policy != "zw1" && policy != "zw2" && policy != "wait1" && policy != "all") {
        throw UsageError("--policy must be zw1, zw2, wait1 or all");
    }
    const auto gammas = require_list(o.gamma, "gamma");
    const auto mus = require_list(o.mu, "mu");
    with_output(o.out, [&](std::ostream& out) {
        out << "policy,gamma,mu,beta,mean_interarrival,second_moment,cross_term,average_aoi\n";
        auto row = [&](const char* name, const ServiceRates& r, const std::string& beta, const AoiBreakdown& b) {
            out << csv_row({name, format_double(r.gamma()), format_double(r.mu()), beta,
                            format_double(b.mean_interarrival), format_double(b.second_moment),
                            format_double(b.cross_term), format_double(b.average_aoi)});
        };
        for (double g : gammas) {
            for (double m : mus) {
                const ServiceRates r(g, m);
                if (policy == "zw1" || policy == "all") {
                    row("zw1", r, "1", aoi_zw1(r));
                }
                if (policy == "zw2" || policy == "all") {
                    row("zw2", r, "", aoi_zw2(r));
                }
                if (policy == "wait1" || policy == "all") {
                    const int beta = o.beta > 0 ? o.beta : optimal_beta(r).beta;
                    row("wait1", r, std::to_string(beta), aoi_wait1(r, WaitThreshold(beta)));
                }
            }
        }
    });
    return 0;
}

// ---- solve ---------------------------------------------------------------

int cmd_solve(const Options& o)
{
    const ServiceRates rates(require_single(o.gamma, "gamma"), require_single(o.mu, "mu"));
    const AgeCap cap = cap_or(o, 50);
    const SolveConfig cfg = solve_config(o, 5e-4);
    const int capacity = o.capacity == 0 ? 1 : o.capacity;
    Solution sol;
    if (capacity == 1) {
        const OnePacketModel model = build_one_packet_model(rates, cap);
        sol = solve_rvi(model.mdp, cfg);
        with_output(o.out, [&](std::ostream& out) { write_solution_csv_1p(model.space, sol, out); });
    } else if (capacity == 2) {
        const TwoPacketModel model = build_two_packet_model(rates, cap);
        sol = solve_rvi(model.mdp, cfg);
        with_output(o.out, [&](std::ostream& out) { write_solution_csv_2p(model.space, sol, out); });
    } else {
        throw UsageError("--capacity must be 1 or 2");
    }
    std::cerr << "gain=" << format_double(sol.gain) << " iterations=" << sol.iterations
              << " final_span=" << format_double(sol.final_span) << '\n';
    return 0;
}

// ---- simulate ------------------------------------------------------------

int cmd_simulate(const Options& o)
{
    const ServiceRates rates(require_single(o.gamma, "gamma"), require_single(o.mu, "mu"));
    const std::string name = o.policy.empty() ? "zw1" : o.policy;
    PolicySpec policy;
    int capacity = o.capacity;
    if (name == "zw1") {
        policy = ZeroWait1{};
        capacity = capacity == 0 ? 1 : capacity;
    } else if (name == "zw2") {
        policy = ZeroWait2{};
        capacity = capacity == 0 ? 2 : capacity;
    } else if (name == "wait1") {
        policy = Wait1{WaitThreshold(o.beta > 0 ? o.beta : optimal_beta(rates).beta)};
        capacity = capacity == 0 ? 1 : capacity;
    } else if (name == "rvi") {
        capacity = capacity == 0 ? 1 : capacity;
        const AgeCap cap = cap_or(o, 50);
        const SolveConfig cfg = solve_config(o, 5e-4);
        if (capacity == 1) {
            policy = TablePolicy{solve_rvi(build_one_packet_model(rates, cap).mdp, cfg).policy, cap};
        } else if (capacity == 2) {
            policy = TablePolicy{solve_rvi(build_two_packet_model(rates, cap).mdp, cfg).policy, cap};
        }
    } else {
        throw UsageError("--policy must be zw1, zw2, wait1 or rvi");
    }
    if (capacity != 1 && capacity != 2) {
        throw UsageError("--capacity must be 1 or 2");
    }
    if (o.replications < 1) {
        throw UsageError("--replications must be at least 1");
    }
    SystemConfig base{rates, static_cast<Capacity>(capacity), o.warmup, o.horizon, o.seed};
    auto config_for = [&](std::size_t k) {
        SystemConfig cfg = base;
        cfg.seed = base.seed + k;
        return cfg;
    };
    const auto results = parallel_map<SimResult>(static_cast<std::size_t>(o.replications), o.workers,
                                                  [&](std::size_t k) { return run_simulation(config_for(k), policy); });
    const std::string label = policy_name(policy);
    with_output(o.out, [&](std::ostream& out) {
        out << sim_result_csv_header();
        for (std::size_t k = 0; k < results.size(); ++k) {
            out << sim_result_csv_row(label, config_for(k), results[k]);
        }
    });
    if (!o.trace.empty()) {
        const auto trace = simulate_trace(base, policy);
        with_output(o.trace, [&](std::ostream& out) { write_trace_csv(trace, out); });
    }
    if (!o.kernel_out.empty()) {
        KernelCheckOptions kopt;
        kopt.cap = cap_or(o, 50);
        if (const auto* table = std::get_if<TablePolicy>(&policy)) {
            kopt.cap = table->cap;
        }
        const KernelCheckReport report = empirical_kernel_check(base, policy, o.kernel_visits, kopt);
        with_output(o.kernel_out, [&](std::ostream& out) { write_kernel_check_csv(report, out); });
        std::cerr << "kernel check: tested=" << report.tested << " flagged=" << report.flagged
                  << " unexpected=" << report.unexpected_transitions
                  << " fraction=" << format_double(report.flagged_fraction()) << '\n';
    }
    return 0;
}

// ---- sweep ---------------------------------------------------------------

int cmd_sweep(const Options& o)
{
    const int grid = o.grid > 0 ? o.grid : 20;
    const auto gammas = list_or(o.gamma, unit_grid(grid));
    const auto mus = list_or(o.mu, unit_grid(grid));
    const auto rows = analytic_sweep(gammas, mus, o.workers);
    with_output(o.out, [&](std::ostream& out) { write_analytic_csv(rows, out); });
    return 0;
}

// ---- figures -------------------------------------------------------------

int fig_region(const Options& o)
{
    const int grid = o.grid > 0 ? o.grid : 200;
    const auto gammas = list_or(o.gamma, unit_grid(grid));
    const auto mus = list_or(o.mu, unit_grid(grid));
    const auto rows = analytic_sweep(gammas, mus, o.workers);
    const std::string base = prefix(o, "region");
    with_output(base + ".csv", [&](std::ostream& out) { write_analytic_csv(rows, out); });

    std::vector<std::vector<int>> cells(gammas.size(), std::vector<int>(mus.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        cells[i / mus.size()][i % mus.size()] = int{rows[i].zw2_beats_zw1} + 2 * int{rows[i].waiting_beneficial};
    }
    SvgPlot plot("Policy regions", "mu", "gamma");
    plot.set_heat(mus, gammas, std::move(cells), {"neither", "ZW-2 beats ZW-1", "waiting helps", "both"});
    write_svg(base + ".svg", plot);

    const RegionSummary s = summarize_region(rows);
    std::cerr << "ZW-2 beats ZW-1 for every gamma from mu=" << format_double(s.zw2_everywhere_from_mu)
              << "; waiting helps up to mu=" << format_double(s.waiting_up_to_mu)
              << "; sign mismatches=" << s.sign_mismatches << '\n';
    if (s.sign_mismatches != 0) {
        throw CheckFailed("region predicate disagrees with the closed forms");
    }
    return 0;
}

std::vector<ServiceRates> accessible_points(const std::vector<double>& gammas, const std::vector<double>& mus)
{
    std::vector<ServiceRates> out;
    for (double g : gammas) {
        for (double m : mus) {
            const ServiceRates r(g, m);
            if (!r.deterministic()) {
                out.push_back(r);
            }
        }
    }
    return out;
}

// Column of `mu` in `mus`, for heat grids.
std::size_t column_of(const std::vector<double>& mus, double mu)
{
    return static_cast<std::size_t>(std::find(mus.begin(), mus.end(), mu) - mus.begin());
}

int fig_structure_1p(const Options& o)
{
    const auto gammas = list_or(o.gamma, kFigureGammas);
    const auto mus = list_or(o.mu, tenth_grid());
    const AgeCap cap = cap_or(o, 50);
    const SolveConfig cfg = solve_config(o, 5e-4);
    const auto points = accessible_points(gammas, mus);
    const auto columns = parallel_map<Structure1P>(points.size(), o.workers,
                                                   [&](std::size_t i) { return structure_1p(points[i], cap, cfg); });
    const std::string base = prefix(o, "structure-1p");
    with_output(base + ".csv", [&](std::ostream& out) {
        out << "gamma,mu,delta,action\n";
        for (const auto& c : columns) {
            for (std::size_t d = 0; d < c.empty_actions.size(); ++d) {
                out << csv_row({format_double(c.gamma), format_double(c.mu), std::to_string(d + 1),
                                std::to_string(c.empty_actions[d])});
            }
        }
    });
    std::vector<double> deltas;
    for (int d = 1; d <= cap.value(); ++d) {
        deltas.push_back(d);
    }
    bool all_threshold = true;
    for (double g : gammas) {
        std::vector<std::vector<int>> cells(deltas.size(), std::vector<int>(mus.size(), -1));
        for (const auto& c : columns) {
            if (c.gamma != g) {
                continue;
            }
            const std::size_t col = column_of(mus, c.mu);
            for (std::size_t d = 0; d < deltas.size(); ++d) {
                cells[d][col] = c.empty_actions[d];
            }
            const auto first = first_request(c.empty_actions);
            std::cerr << "gamma=" << format_double(c.gamma) << " mu=" << format_double(c.mu) << ": "
                      << (c.threshold ? "threshold" : "NOT threshold") << ", requests from delta="
                      << (first ? std::to_string(*first + 1) : std::string("never")) << '\n';
            all_threshold = all_threshold && c.threshold;
        }
        SvgPlot plot("1-Packet action in empty states, gamma=" + format_double(g), "mu", "delta");
        plot.set_heat(mus, deltas, std::move(cells), {"idle (a=0)", "request (a=1)"});
        write_svg(base + gamma_tag(g) + ".svg", plot);
    }
    if (!all_threshold) {
        throw CheckFailed("a 1-Packet empty-state column is not threshold in delta");
    }
    return 0;
}

int fig_structure_2p(const Options& o)
{
    const auto gammas = list_or(o.gamma, kFigureGammas);
    const auto mus = list_or(o.mu, tenth_grid());
    const AgeCap cap = cap_or(o, 50);
    const SolveConfig cfg = solve_config(o, 5e-4);
    const int delta = o.delta > 0 ? o.delta : std::min(20, cap.value());
    if (delta > cap.value()) {
        throw UsageError("--delta must not exceed --cap");
    }
    const auto points = accessible_points(gammas, mus);
    const auto results = parallel_map<Structure2P>(points.size(), o.workers,
                                                   [&](std::size_t i) { return structure_2p(points[i], cap, cfg); });
    const std::string base = prefix(o, "structure-2p");
    with_output(base + ".csv", [&](std::ostream& out) {
        out << "gamma,mu,family,delta,sampler_age,action\n";
        for (const auto& r : results) {
            const std::string g = format_double(r.gamma);
            const std::string m = format_double(r.mu);
            for (int d = 1; d <= r.cap; ++d) {
                const auto i = static_cast<std::size_t>(d - 1);
                out << csv_row({g, m, "empty", std::to_string(d), "", std::to_string(r.empty_actions[i])});
                out << csv_row({g, m, "one_request", std::to_string(d), "", std::to_string(r.one_request_actions[i])});
                for (int s = 0; s <= d; ++s) {
                    out << csv_row({g, m, "one_update", std::to_string(d), std::to_string(s),
                                    std::to_string(r.one_update_actions[i][static_cast<std::size_t>(s)])});
                }
            }
        }
    });
    std::vector<double> ages;
    for (int s = 0; s <= delta; ++s) {
        ages.push_back(s);
    }
    bool ok = true;
    for (double g : gammas) {
        std::vector<std::vector<int>> cells(ages.size(), std::vector<int>(mus.size(), -1));
        for (const auto& r : results) {
            if (r.gamma != g) {
                continue;
            }
            const std::size_t col = column_of(mus, r.mu);
            for (std::size_t s = 0; s < ages.size(); ++s) {
                cells[s][col] = r.one_update_actions[static_cast<std::size_t>(delta - 1)][s];
            }
            std::cerr << "gamma=" << format_double(r.gamma) << " mu=" << format_double(r.mu)
                      << ": one-update threshold in Delta_s=" << (r.one_update_threshold ? "yes" : "NO")
                      << ", one-request idle=" << (r.one_request_idle ? "yes" : "NO") << '\n';
            ok = ok && r.one_update_threshold && r.one_request_idle;
        }
        SvgPlot plot("2-Packet action in (" + std::to_string(delta) + ",0,0,0,1,*,Delta_s), gamma=" +
                         format_double(g),
                     "mu", "Delta_s");
        plot.set_heat(mus, ages, std::move(cells), {"idle (a=0)", "request (a=1)"});
        write_svg(base + gamma_tag(g) + ".svg", plot);
    }
    if (!ok) {
        throw CheckFailed("a 2-Packet structural property does not hold");
    }
    return 0;
}

int fig_beta(const Options& o)
{
    const auto gammas = list_or(o.gamma, kFigureGammas);
    const auto mus = list_or(o.mu, {0.1});
    const AgeCap cap = cap_or(o, 100);
    const SolveConfig cfg = solve_config(o, 1e-6);
    const auto points = accessible_points(gammas, mus);
    struct Curve {
        std::vector<BetaPoint> points;
        double rvi_gain;
    };
    const auto curves = parallel_map<Curve>(points.size(), o.workers, [&](std::size_t i) {
        const int top = o.max_beta > 0 ? o.max_beta : beta_max(points[i]);
        return Curve{beta_sweep(points[i], top), solve_rvi(build_one_packet_model(points[i], cap).mdp, cfg).gain};
    });
    const std::string base = prefix(o, "beta");
    with_output(base + ".csv", [&](std::ostream& out) {
        out << "gamma,mu,beta,average_aoi,rvi_gain\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (const auto& p : curves[i].points) {
                out << csv_row({format_double(points[i].gamma()), format_double(points[i].mu()),
                                std::to_string(p.beta), format_double(p.average_aoi),
                                format_double(curves[i].rvi_gain)});
            }
        }
    });
    SvgPlot plot("Wait-1 average AoI vs beta", "beta", "average AoI");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string tag = "gamma=" + format_double(points[i].gamma()) + ", mu=" + format_double(points[i].mu());
        std::vector<std::pair<double, double>> line;
        for (const auto& p : curves[i].points) {
            line.emplace_back(p.beta, p.average_aoi);
        }
        plot.add_series("Wait-1 " + tag, line);
        const double lo = curves[i].points.front().beta;
        const double hi = curves[i].points.back().beta;
        plot.add_series("RVI " + tag, {{lo, curves[i].rvi_gain}, {hi, curves[i].rvi_gain}});
        const auto best = std::min_element(curves[i].points.begin(), curves[i].points.end(),
                                           [](const BetaPoint& a, const BetaPoint& b) {
                                               return a.average_aoi < b.average_aoi;
                                           });
        std::cerr << tag << ": minimum at beta=" << best->beta << " (" << format_double(best->average_aoi)
                  << "), RVI gain " << format_double(curves[i].rvi_gain) << '\n';
    }
    write_svg(base + ".svg", plot);
    return 0;
}

int fig_cap_sweep(const Options& o)
{
    const auto gammas = list_or(o.gamma, {0.4});
    const auto mus = list_or(o.mu, {0.2, 0.4});
    const int top = o.cap > 0 ? o.cap : 100;
    const SolveConfig cfg = solve_config(o, 5e-4);
    std::vector<int> caps;
    for (int c = 5; c <= top; c += 5) {
        caps.push_back(c);
    }
    if (caps.empty()) {
        throw UsageError("--cap must be at least 5");
    }
    const auto points = accessible_points(gammas, mus);
    const auto sweeps = parallel_map<std::vector<CapPoint>>(points.size(), 1, [&](std::size_t i) {
        return cap_sweep(points[i], caps, cfg, o.workers);
    });
    const std::string base = prefix(o, "cap-sweep");
    with_output(base + ".csv", [&](std::ostream& out) {
        out << "gamma,mu,cap,gain,iterations\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (const auto& p : sweeps[i]) {
                out << csv_row({format_double(points[i].gamma()), format_double(points[i].mu()), std::to_string(p.cap),
                                format_double(p.gain), std::to_string(p.iterations)});
            }
        }
    });
    SvgPlot plot("1-Packet gain vs age cap", "cap", "average AoI");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string tag = "gamma=" + format_double(points[i].gamma()) + ", mu=" + format_double(points[i].mu());
        std::vector<std::pair<double, double>> line;
        for (const auto& p : sweeps[i]) {
            line.emplace_back(p.cap, p.gain);
        }
        plot.add_series(tag, line);
        // Smallest cap c such that every gain from c on is within 0.5% of the largest cap.
        int from = caps.back();
        for (auto it = caps.rbegin(); it != caps.rend(); ++it) {
            if (saturation_deviation(sweeps[i], *it - 1) >= 5e-3) {
                break;
            }
            from = *it;
        }
        std::cerr << tag << ": within 0.5% of cap " << caps.back() << " from cap=" << from << '\n';
    }
    write_svg(base + ".svg", plot);
    return 0;
}

int fig_comparison(const Options& o)
{
    const auto gammas = list_or(o.gamma, kFigureGammas);
    const auto mus = list_or(o.mu, tenth_grid());
    const AgeCap cap = cap_or(o, 50);
    const SolveConfig cfg = solve_config(o, 5e-4);
    const auto rows = comparison(gammas, mus, cap, cfg, o.workers);
    const std::string base = prefix(o, "comparison");
    with_output(base + ".csv", [&](std::ostream& out) { write_comparison_csv(rows, out); });
    // RVI gains are accurate to about epsilon, so the check allows for it.
    const double tolerance = 1e-6 + 2.0 * cfg.epsilon;
    double worst = -std::numeric_limits<double>::infinity();
    for (double g : gammas) {
        SvgPlot plot("Average AoI vs mu, gamma=" + format_double(g), "mu", "average AoI");
        std::vector<std::pair<double, double>> zw1, zw2, one, two, wait;
        for (const auto& r : rows) {
            if (r.gamma != g) {
                continue;
            }
            zw1.emplace_back(r.mu, r.zw1);
            zw2.emplace_back(r.mu, r.zw2);
            one.emplace_back(r.mu, r.one_packet);
            two.emplace_back(r.mu, r.two_packet);
            wait.emplace_back(r.mu, r.wait1_star);
            worst = std::max(worst, dominance_violation(r));
        }
        plot.add_series("ZW-1", zw1);
        plot.add_series("ZW-2", zw2);
        plot.add_series("1-Packet opt", one);
        plot.add_series("2-Packet opt", two);
        plot.add_series("Wait-1 opt", wait);
        write_svg(base + gamma_tag(g) + ".svg", plot);
    }
    std::cerr << "largest 2-Packet excess over the other policies: " << format_double(worst) << '\n';
    if (worst > tolerance) {
        throw CheckFailed("2-Packet gain exceeds another policy by more than " + format_double(tolerance));
    }
    return 0;
}

std::uint64_t seed_from_env()
{
    const char* env = std::getenv("AOI_TWOWAY_SEED");
    if (env == nullptr || *env == '\0') {
        return 1;
    }
    std::uint64_t seed = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, seed);
    if (ec != std::errc{} || ptr != end) {
        throw UsageError(std::string("AOI_TWOWAY_SEED is not an unsigned integer: ") + env);
    }
    return seed;
}

struct Command {
    std::unique_ptr<Binder> binder;
    std::function<int(const Options&)> run;
};

int run(int argc, char** argv)
{
    Options o;
    try {
        o.seed = seed_from_env();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App app{"Age-of-information toolkit for status updates with two-way random delay"};
    app.require_subcommand(1);
    std::list<Command> commands;
    auto make = [&](CLI::App& parent, const std::string& name, const std::string& help,
                    std::function<void(Binder&)> flags, std::function<int(const Options&)> fn) {
        CLI::App* sub = parent.add_subcommand(name, help);
        auto binder = std::make_unique<Binder>(*sub);
        flags(*binder);
        add_common(*binder, o);
        commands.push_back({std::move(binder), std::move(fn)});
    };

    make(app, "analytic", "Closed-form average AoI of ZW-1, ZW-2 and Wait-1",
         [&](Binder& b) {
             add_rates(b, o);
             b.add("policy", o.policy, "zw1, zw2, wait1 or all");
             b.add("beta", o.beta, "Wait-1 threshold (default: optimal)");
         },
         cmd_analytic);
    make(app, "solve", "Solve the 1- or 2-Packet MDP with relative value iteration",
         [&](Binder& b) {
             add_rates(b, o);
             add_solver(b, o);
             b.add("capacity", o.capacity, "1 or 2 active requests");
         },
         cmd_solve);
    make(app, "simulate", "Slot-level Monte Carlo simulation",
         [&](Binder& b) {
             add_rates(b, o);
             add_solver(b, o);
             b.add("policy", o.policy, "zw1, zw2, wait1 or rvi");
             b.add("beta", o.beta, "Wait-1 threshold (default: optimal)");
             b.add("capacity", o.capacity, "1 or 2 active requests");
             b.add("horizon", o.horizon, "Slots per run");
             b.add("warmup", o.warmup, "Discarded leading slots");
             b.add("seed", o.seed, "Seed of the first replication (default: $AOI_TWOWAY_SEED or 1)");
             b.add("replications", o.replications, "Runs with seeds seed, seed+1, ...");
             b.add("trace", o.trace, "Write the per-slot trace of the first run here");
             b.add("kernel-out", o.kernel_out, "Run the empirical kernel check and write its cells here");
             b.add("kernel-visits", o.kernel_visits, "Visits needed before a cell is tested");
         },
         cmd_simulate);
    make(app, "sweep", "Closed-form sweep over a rate grid",
         [&](Binder& b) {
             add_rates(b, o);
             b.add("grid", o.grid, "Points per axis when rates are not listed");
         },
         cmd_sweep);

    CLI::App* figure = app.add_subcommand("figure", "Data and SVG behind each result figure");
    figure->require_subcommand(1);
    make(*figure, "region", "Where ZW-2 beats ZW-1 and where waiting helps, on a square grid",
         [&](Binder& b) {
             add_rates(b, o);
             b.add("grid", o.grid, "Points per axis");
         },
         fig_region);
    make(*figure, "structure-1p", "1-Packet empty-state actions over (mu, delta)",
         [&](Binder& b) {
             add_rates(b, o);
             add_solver(b, o);
         },
         fig_structure_1p);
    make(*figure, "structure-2p", "2-Packet one-update actions over (mu, Delta_s)",
         [&](Binder& b) {
             add_rates(b, o);
             add_solver(b, o);
             b.add("delta", o.delta, "AoI of the plotted slice");
         },
         fig_structure_2p);
    make(*figure, "beta", "Wait-1 average AoI vs beta with the RVI gain",
         [&](Binder& b) {
             add_rates(b, o);
             add_solver(b, o);
             b.add("max-beta", o.max_beta, "Largest beta (default: beta_max)");
         },
         fig_beta);
    make(*figure, "cap-sweep", "1-Packet gain for caps 5, 10, ..., --cap",
         [&](Binder& b) {
             add_rates(b, o);
             add_solver(b, o);
         },
         fig_cap_sweep);
    make(*figure, "comparison", "ZW-1, ZW-2, Wait-1 and both RVI gains vs mu",
         [&](Binder& b) {
             add_rates(b, o);
             add_solver(b, o);
         },
         fig_comparison);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    for (const auto& cmd : commands) {
        if (!cmd.binder->app().parsed()) {
            continue;
        }
        try {
            if (!o.config.empty()) {
                std::ifstream file(o.config);
                if (!file) {
                    throw UsageError("cannot read config '" + o.config + "'");
                }
                cmd.binder->apply(json::parse(file));
            }
            return cmd.run(o);
        } catch (const UsageError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const json::exception& e) {
            std::cerr << "error: bad config: " << e.what() << '\n';
            return kExitUsage;
        } catch (const ConvergenceError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitConvergence;
        } catch (const CheckFailed& e) {
            std::cerr << "check failed: " << e.what() << '\n';
            return kExitInvariant;
        } catch (const InvariantError& e) {
            std::cerr << "invariant violated: " << e.what() << '\n';
            return kExitInvariant;
        } catch (const ChainStructureError& e) {
            std::cerr << "invariant violated: " << e.what() << '\n';
            return kExitInvariant;
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitUsage;
        }
    }
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return 1;
    }
}
