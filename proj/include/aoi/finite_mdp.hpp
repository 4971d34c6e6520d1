#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace aoi {

/// Raised when an MDP violates its structural invariants.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Transition {
    std::size_t next;
    double probability;
};

/// Finite MDP with per-state admissible action rows stored contiguously.
///
/// States are dense indices 0..num_states()-1. Each state owns one or more
/// action rows; a row carries the action label, its expected one-step cost
/// and the support of its successor distribution. Models append states in
/// index order through begin_state()/add_action().
class FiniteMdp {
public:
    struct ActionRow {
        int action;
        double cost;
        std::size_t first;
        std::size_t last;
    };

    /// Opens the next state; subsequent add_action() calls attach to it.
    std::size_t begin_state();

    void add_action(int action, double cost, std::span<const Transition> transitions);

    [[nodiscard]] std::size_t num_states() const noexcept { return state_rows_.size() - 1; }
    [[nodiscard]] std::size_t num_rows() const noexcept { return rows_.size(); }

    [[nodiscard]] std::span<const ActionRow> actions(std::size_t state) const noexcept
    {
        return {rows_.data() + state_rows_[state], rows_.data() + state_rows_[state + 1]};
    }

    [[nodiscard]] std::span<const Transition> transitions(const ActionRow& row) const noexcept
    {
        return {transitions_.data() + row.first, transitions_.data() + row.last};
    }

    /// Row of `state` labelled `action`, or nullptr if inadmissible.
    [[nodiscard]] const ActionRow* find_action(std::size_t state, int action) const noexcept;

    /// Checks row sums, successor ranges and that every state has an action.
    void validate(double tolerance = 1e-12) const;

    [[nodiscard]] double min_cost() const;
    [[nodiscard]] double max_cost() const;

private:
    std::vector<std::size_t> state_rows_{0};
    std::vector<ActionRow> rows_;
    std::vector<Transition> transitions_;
};

/// Deterministic stationary policy: one action label per state.
using PolicyTable = std::vector<int>;

/// CSV rows `state_id,action,next_state_id,probability` with a header line.
void write_kernel_csv(const FiniteMdp& mdp, std::ostream& out);

} // namespace aoi
