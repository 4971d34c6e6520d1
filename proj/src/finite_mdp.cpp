#include "aoi/finite_mdp.hpp"

#include "aoi/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace aoi {

std::size_t FiniteMdp::begin_state()
{
    state_rows_.push_back(rows_.size());
    return num_states() - 1;
}

void FiniteMdp::add_action(int action, double cost, std::span<const Transition> transitions)
{
    if (num_states() == 0) {
        throw InvariantError("add_action called before begin_state");
    }
    const std::size_t first = transitions_.size();
    transitions_.insert(transitions_.end(), transitions.begin(), transitions.end());
    rows_.push_back({action, cost, first, transitions_.size()});
    state_rows_.back() = rows_.size();
}

const FiniteMdp::ActionRow* FiniteMdp::find_action(std::size_t state, int action) const noexcept
{
    for (const auto& row : actions(state)) {
        if (row.action == action) {
            return &row;
        }
    }
    return nullptr;
}

void FiniteMdp::validate(double tolerance) const
{
    const std::size_t n = num_states();
    for (std::size_t s = 0; s < n; ++s) {
        const auto rows = actions(s);
        if (rows.empty()) {
            throw InvariantError("state " + std::to_string(s) + " has no admissible action");
        }
        for (const auto& row : rows) {
            double sum = 0.0;
            for (const auto& t : transitions(row)) {
                if (t.next >= n) {
                    throw InvariantError("state " + std::to_string(s) + " has an out-of-range successor");
                }
                if (!(t.probability >= 0.0)) {
                    throw InvariantError("state " + std::to_string(s) + " has a negative transition weight");
                }
                sum += t.probability;
            }
            if (std::abs(sum - 1.0) > tolerance) {
                throw InvariantError("kernel row of state " + std::to_string(s) + ", action " +
                                     std::to_string(row.action) + " sums to " + format_double(sum));
            }
        }
    }
}

double FiniteMdp::min_cost() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& row : rows_) {
        m = std::min(m, row.cost);
    }
    return m;
}

double FiniteMdp::max_cost() const
{
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows_) {
        m = std::max(m, row.cost);
    }
    return m;
}

void write_kernel_csv(const FiniteMdp& mdp, std::ostream& out)
{
    out << "state_id,action,next_state_id,probability\n";
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        for (const auto& row : mdp.actions(s)) {
            for (const auto& t : mdp.transitions(row)) {
                out << s << ',' << row.action << ',' << t.next << ',' << format_double(t.probability)
                    << '\n';
            }
        }
    }
}

} // namespace aoi
