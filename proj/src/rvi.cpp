#include "aoi/rvi.hpp"

#include "aoi/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aoi {

namespace {

double row_value(const FiniteMdp& mdp, const FiniteMdp::ActionRow& row, std::span<const double> values)
{
    double q = row.cost;
    for (const auto& t : mdp.transitions(row)) {
        q += t.probability * values[t.next];
    }
    return q;
}

struct Choice {
    int action;
    double value;
};

// Near-ties (within the tolerance) go to the smaller action label, so idling
// wins over requesting.
Choice best_action(const FiniteMdp& mdp, std::size_t state, std::span<const double> values,
                   double tie_tolerance)
{
    Choice best{0, std::numeric_limits<double>::infinity()};
    bool have = false;
    for (const auto& row : mdp.actions(state)) {
        const double q = row_value(mdp, row, values);
        const bool better = q < best.value - tie_tolerance;
        const bool tie_to_lower = std::abs(q - best.value) <= tie_tolerance && row.action < best.action;
        if (!have || better || tie_to_lower) {
            best = {row.action, q};
            have = true;
        }
    }
    return best;
}

} // namespace

Solution solve_rvi(const FiniteMdp& mdp, const SolveConfig& cfg)
{
    const std::size_t n = mdp.num_states();
    if (n == 0) {
        throw InvariantError("cannot solve an MDP without states");
    }
    if (!(cfg.epsilon > 0.0)) {
        throw InvariantError("epsilon must be positive");
    }
    if (cfg.reference_state >= n) {
        throw InvariantError("reference state " + std::to_string(cfg.reference_state) + " out of range");
    }

    std::vector<double> current(n, 0.0);
    std::vector<double> next(n, 0.0);
    PolicyTable policy(n, 0);
    double span = std::numeric_limits<double>::infinity();
    std::size_t iteration = 0;

    while (true) {
        if (iteration == cfg.max_iterations) {
            throw ConvergenceError("relative value iteration did not converge within " +
                                       std::to_string(cfg.max_iterations) +
                                       " iterations (last span " + format_double(span) + ")",
                                   span, iteration);
        }
        const double offset = current[cfg.reference_state];
        span = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const Choice c = best_action(mdp, s, current, cfg.tie_tolerance);
            policy[s] = c.action;
            next[s] = c.value - offset;
            span = std::max(span, std::abs(next[s] - current[s]));
        }
        ++iteration;
        if (cfg.progress && cfg.progress_interval != 0 && iteration % cfg.progress_interval == 0) {
            cfg.progress(iteration, span);
        }
        if (span <= cfg.epsilon) {
            break;
        }
        current.swap(next);
    }

    // Report the iterate the final policy is greedy against, so that
    // |gain + bias - T bias| equals the final span.
    Solution sol;
    sol.gain = current[cfg.reference_state];
    sol.bias = std::move(current);
    sol.policy = std::move(policy);
    sol.iterations = iteration;
    sol.final_span = span;
    sol.epsilon = cfg.epsilon;
    return sol;
}

double bellman_residual(const FiniteMdp& mdp, std::span<const double> bias, double gain)
{
    double worst = 0.0;
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& row : mdp.actions(s)) {
            best = std::min(best, row_value(mdp, row, bias));
        }
        worst = std::max(worst, std::abs(gain + bias[s] - best));
    }
    return worst;
}

PolicyTable greedy_policy(const FiniteMdp& mdp, std::span<const double> values, double tie_tolerance)
{
    PolicyTable policy(mdp.num_states(), 0);
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        policy[s] = best_action(mdp, s, values, tie_tolerance).action;
    }
    return policy;
}

} // namespace aoi
