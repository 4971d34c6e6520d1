#pragma once

#include "aoi/finite_mdp.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoi {

/// RVI ran out of iterations before the value change dropped below epsilon.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_span, std::size_t iterations)
        : std::runtime_error(what), last_span_(last_span), iterations_(iterations)
    {
    }

    [[nodiscard]] double last_span() const noexcept { return last_span_; }
    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }

private:
    double last_span_;
    std::size_t iterations_;
};

struct SolveConfig {
    /// Stop once max_s |V_s - V*_s| <= epsilon.
    double epsilon = 5e-4;
    std::size_t reference_state = 0;
    std::size_t max_iterations = 1'000'000;
    /// Action 1 replaces action 0 only when cheaper by more than this.
    double tie_tolerance = 1e-9;
    std::size_t progress_interval = 1000;
    /// Called every progress_interval iterations with (iteration, span).
    std::function<void(std::size_t, double)> progress;

    /// Defaults used for the published figures.
    static SolveConfig standard() { return {}; }
    /// Tight stopping threshold for cross-checks against closed forms.
    static SolveConfig high_precision()
    {
        SolveConfig cfg;
        cfg.epsilon = 1e-6;
        return cfg;
    }
};

/// Output of relative value iteration.
struct Solution {
    PolicyTable policy;
    double gain = 0.0;
    std::vector<double> bias;
    std::size_t iterations = 0;
    /// Value change of the final sweep.
    double final_span = 0.0;
    double epsilon = 0.0;
};

/// Relative value iteration with greedy policy extraction.
///
/// Starts from V* = 0 and repeats V_s <- min_a {c(s,a) + sum P V*} - V*_ref
/// until the largest absolute change is at most cfg.epsilon. The policy is the
/// greedy minimiser of the last sweep; bias and gain = V*_ref are taken from
/// the vector that sweep read, so the Bellman residual equals the final span.
[[nodiscard]] Solution solve_rvi(const FiniteMdp& mdp, const SolveConfig& cfg = {});

/// max_s |gain + bias_s - min_a {c(s,a) + sum_s' P(s'|s,a) bias_s'}|.
[[nodiscard]] double bellman_residual(const FiniteMdp& mdp, std::span<const double> bias, double gain);

/// Greedy action labels with respect to a value vector, ties toward action 0.
[[nodiscard]] PolicyTable greedy_policy(const FiniteMdp& mdp, std::span<const double> values,
                                        double tie_tolerance = 1e-9);

} // namespace aoi
