#include "aoi/policy_eval.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>

namespace aoi {

namespace {

const FiniteMdp::ActionRow& chosen_row(const FiniteMdp& mdp, std::span<const int> policy, std::size_t s)
{
    const auto* row = mdp.find_action(s, policy[s]);
    if (row == nullptr) {
        throw InvariantError("policy picks inadmissible action " + std::to_string(policy[s]) +
                             " in state " + std::to_string(s));
    }
    return *row;
}

// Iterative Tarjan; returns the SCC id of every state.
std::vector<std::size_t> strongly_connected(const FiniteMdp& mdp, std::span<const int> policy,
                                            std::size_t& count)
{
    const std::size_t n = mdp.num_states();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited);
    std::vector<std::size_t> low(n, 0);
    std::vector<std::size_t> component(n, unvisited);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    struct Frame {
        std::size_t state;
        std::size_t edge;
    };
    std::vector<Frame> frames;
    std::size_t next_index = 0;
    count = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) {
            continue;
        }
        frames.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            const auto edges = mdp.transitions(chosen_row(mdp, policy, f.state));
            if (f.edge < edges.size()) {
                const auto& t = edges[f.edge++];
                if (t.probability <= 0.0) {
                    continue;
                }
                const std::size_t w = t.next;
                if (index[w] == unvisited) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w] != 0) {
                    low[f.state] = std::min(low[f.state], index[w]);
                }
                continue;
            }
            const std::size_t v = f.state;
            frames.pop_back();
            if (!frames.empty()) {
                low[frames.back().state] = std::min(low[frames.back().state], low[v]);
            }
            if (low[v] == index[v]) {
                std::size_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    component[w] = count;
                } while (w != v);
                ++count;
            }
        }
    }
    return component;
}

} // namespace

std::vector<std::vector<std::size_t>> closed_classes(const FiniteMdp& mdp, std::span<const int> policy)
{
    const std::size_t n = mdp.num_states();
    if (policy.size() != n) {
        throw InvariantError("policy table size does not match the state count");
    }
    std::size_t count = 0;
    const auto component = strongly_connected(mdp, policy, count);
    std::vector<char> leaks(count, 0);
    for (std::size_t s = 0; s < n; ++s) {
        for (const auto& t : mdp.transitions(chosen_row(mdp, policy, s))) {
            if (t.probability > 0.0 && component[t.next] != component[s]) {
                leaks[component[s]] = 1;
            }
        }
    }
    std::vector<std::vector<std::size_t>> classes;
    std::vector<std::size_t> slot(count, static_cast<std::size_t>(-1));
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t c = component[s];
        if (leaks[c] != 0) {
            continue;
        }
        if (slot[c] == static_cast<std::size_t>(-1)) {
            slot[c] = classes.size();
            classes.emplace_back();
        }
        classes[slot[c]].push_back(s);
    }
    return classes;
}

std::vector<double> stationary_distribution(const FiniteMdp& mdp, std::span<const int> policy)
{
    const auto classes = closed_classes(mdp, policy);
    if (classes.size() != 1) {
        throw ChainStructureError("induced chain has " + std::to_string(classes.size()) +
                                  " closed classes; exact evaluation needs a unichain policy");
    }
    const auto& recurrent = classes.front();
    const std::size_t m = recurrent.size();
    std::vector<std::size_t> local(mdp.num_states(), static_cast<std::size_t>(-1));
    for (std::size_t k = 0; k < m; ++k) {
        local[recurrent[k]] = k;
    }

    // Balance equations pi (I - P) = 0 transposed, with row 0 replaced by sum(pi) = 1.
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> entries;
    entries.reserve(4 * m);
    for (std::size_t k = 0; k < m; ++k) {
        entries.emplace_back(0, static_cast<int>(k), 1.0);
    }
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t s = recurrent[k];
        if (k != 0) {
            entries.emplace_back(static_cast<int>(k), static_cast<int>(k), 1.0);
        }
        for (const auto& t : mdp.transitions(chosen_row(mdp, policy, s))) {
            const std::size_t j = local[t.next];
            if (j != 0 && t.probability > 0.0) {
                entries.emplace_back(static_cast<int>(j), static_cast<int>(k), -t.probability);
            }
        }
    }
    Eigen::SparseMatrix<double> a(static_cast<int>(m), static_cast<int>(m));
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<int>(m));
    rhs[0] = 1.0;

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw ChainStructureError("stationary system is singular: " + lu.lastErrorMessage());
    }
    const Eigen::VectorXd pi = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !pi.allFinite()) {
        throw ChainStructureError("stationary system could not be solved");
    }

    std::vector<double> full(mdp.num_states(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        // Round-off can leave tiny negative masses on rarely visited states.
        full[recurrent[k]] = std::max(0.0, pi[static_cast<int>(k)]);
    }
    return full;
}

double evaluate_policy_exact(const FiniteMdp& mdp, std::span<const int> policy)
{
    const auto pi = stationary_distribution(mdp, policy);
    double gain = 0.0;
    double mass = 0.0;
    for (std::size_t s = 0; s < pi.size(); ++s) {
        if (pi[s] > 0.0) {
            gain += pi[s] * chosen_row(mdp, policy, s).cost;
            mass += pi[s];
        }
    }
    return gain / mass;
}

} // namespace aoi
