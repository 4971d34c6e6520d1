#pragma once

#include "aoi/finite_mdp.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace aoi {

/// The chain induced by a policy is not unichain (or its linear system is singular).
class ChainStructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed communicating classes of the chain induced by `policy`.
[[nodiscard]] std::vector<std::vector<std::size_t>> closed_classes(const FiniteMdp& mdp,
                                                                   std::span<const int> policy);

/// Stationary distribution of the induced chain, solved as a sparse linear system.
[[nodiscard]] std::vector<double> stationary_distribution(const FiniteMdp& mdp, std::span<const int> policy);

/// Long-run average cost of a stationary deterministic policy.
[[nodiscard]] double evaluate_policy_exact(const FiniteMdp& mdp, std::span<const int> policy);

} // namespace aoi
