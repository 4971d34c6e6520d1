#include "aoi/simulator.hpp"

#include "aoi/csv.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

namespace aoi {

namespace {

constexpr std::size_t kBatches = 32;

// Ratio estimator sum(x) / sum(n) with a batch-means standard error.
class BatchRatio {
public:
    BatchRatio() : x_(kBatches, 0.0), n_(kBatches, 0.0) {}

    void add(std::size_t batch, double x, double n = 1.0)
    {
        x_[batch] += x;
        n_[batch] += n;
    }

    [[nodiscard]] double total() const { return sum(x_); }
    [[nodiscard]] double count() const { return sum(n_); }

    [[nodiscard]] double mean() const
    {
        const double n = count();
        return n > 0.0 ? total() / n : std::numeric_limits<double>::quiet_NaN();
    }

    [[nodiscard]] double standard_error() const
    {
        const double n = count();
        if (n <= 0.0) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const double m = total() / n;
        double ss = 0.0;
        std::size_t used = 0;
        for (std::size_t b = 0; b < x_.size(); ++b) {
            if (n_[b] > 0.0) {
                const double r = x_[b] - m * n_[b];
                ss += r * r;
                ++used;
            }
        }
        if (used < 2) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const double k = static_cast<double>(used);
        return std::sqrt(k / (k - 1.0) * ss) / n;
    }

private:
    static double sum(const std::vector<double>& v)
    {
        double s = 0.0;
        for (const double x : v) {
            s += x;
        }
        return s;
    }

    std::vector<double> x_;
    std::vector<double> n_;
};

int clamp_to(std::int64_t age, AgeCap cap)
{
    return static_cast<int>(std::min<std::int64_t>(age, cap.value()));
}

const char* capacity_name(Capacity c) { return c == Capacity::OnePacket ? "one-packet" : "two-packet"; }

std::size_t table_size(Capacity capacity, AgeCap cap)
{
    return capacity == Capacity::OnePacket ? StateSpace1P(cap).size() : StateSpace2P(cap).size();
}

void check_compatible(const SystemConfig& cfg, const PolicySpec& policy)
{
    if (cfg.warmup < 0 || cfg.horizon <= cfg.warmup) {
        throw ConfigError("simulation needs 0 <= warmup < horizon");
    }
    const bool one = cfg.capacity == Capacity::OnePacket;
    if ((std::holds_alternative<ZeroWait1>(policy) || std::holds_alternative<Wait1>(policy)) && !one) {
        throw ConfigError(policy_name(policy) + " runs on the one-packet system only");
    }
    if (std::holds_alternative<ZeroWait2>(policy) && one) {
        throw ConfigError("ZW2 runs on the two-packet system only");
    }
    if (const auto* t = std::get_if<TablePolicy>(&policy)) {
        if (t->table.size() != table_size(cfg.capacity, t->cap)) {
            throw ConfigError("policy table has " + std::to_string(t->table.size()) + " entries, the " +
                              capacity_name(cfg.capacity) + " MDP with cap " + std::to_string(t->cap.value()) +
                              " has " + std::to_string(table_size(cfg.capacity, t->cap)));
        }
        for (const int a : t->table) {
            if (a != 0 && a != 1) {
                throw ConfigError("policy table entries must be 0 or 1");
            }
        }
    }
}

} // namespace

std::string policy_name(const PolicySpec& policy)
{
    struct Namer {
        std::string operator()(const ZeroWait1&) const { return "ZW1"; }
        std::string operator()(const ZeroWait2&) const { return "ZW2"; }
        std::string operator()(const Wait1& w) const { return "Wait1(" + std::to_string(w.beta.value()) + ")"; }
        std::string operator()(const TablePolicy&) const { return "Table"; }
    };
    return std::visit(Namer{}, policy);
}

State1P observe_1p(const SlotView& v, AgeCap cap)
{
    const int aoi = clamp_to(v.aoi, cap);
    if (v.controller_requests == 0 && v.sampler_updates == 0) {
        return State1P::empty(aoi);
    }
    if (v.controller_requests == 1 && v.sampler_updates == 0) {
        return State1P::requesting(aoi);
    }
    if (v.controller_requests == 0 && v.sampler_updates == 1) {
        return State1P::serving(aoi, clamp_to(v.head_age, cap));
    }
    throw InvariantError("occupancy does not fit the one-packet state space");
}

State2P observe_2p(const SlotView& v, AgeCap cap)
{
    State2P s;
    s.aoi = clamp_to(v.aoi, cap);
    s.controller_buffer = v.controller_requests == 2;
    s.controller_busy = v.controller_requests >= 1;
    s.sampler_buffer = v.sampler_updates == 2;
    s.sampler_busy = v.sampler_updates >= 1;
    if (s.sampler_busy) {
        s.sampler_age = clamp_to(v.head_age, cap);
    }
    if (s.sampler_buffer) {
        s.buffer_age = clamp_to(v.queued_age, cap);
    }
    if (!s.family()) {
        throw InvariantError("occupancy does not fit the two-packet state space");
    }
    return s;
}

SlotSimulator::SlotSimulator(const SystemConfig& cfg, PolicySpec policy)
    : cfg_(cfg), policy_(std::move(policy)), rng_(cfg.seed)
{
    check_compatible(cfg_, policy_);
    view_ = {0, 1, 0, 0, 0, 0};
    if (const auto* t = std::get_if<TablePolicy>(&policy_)) {
        if (cfg_.capacity == Capacity::OnePacket) {
            space1_.emplace(t->cap);
        } else {
            space2_.emplace(t->cap);
        }
    }
    // ZW2 starts with both requests issued; the second one enters at slot 0.
    if (std::holds_alternative<ZeroWait2>(policy_)) {
        view_.controller_requests = 1;
    }
}

Action SlotSimulator::decide() const
{
    const int active = view_.active();
    struct Decider {
        const SlotSimulator& sim;
        int active;
        Action operator()(const ZeroWait1&) const { return active == 0 ? Action::Request : Action::Idle; }
        Action operator()(const ZeroWait2&) const { return active < 2 ? Action::Request : Action::Idle; }
        Action operator()(const Wait1& w) const
        {
            return active == 0 && sim.view_.aoi >= w.beta.value() ? Action::Request : Action::Idle;
        }
        Action operator()(const TablePolicy& t) const
        {
            const std::size_t index = sim.space1_ ? sim.space1_->index_of(observe_1p(sim.view_, t.cap))
                                                  : sim.space2_->index_of(observe_2p(sim.view_, t.cap));
            return t.table[index] == 1 ? Action::Request : Action::Idle;
        }
    };
    const Action a = std::visit(Decider{*this, active}, policy_);
    if (a == Action::Request && active >= max_active(cfg_.capacity)) {
        throw InadmissibleActionError("policy requested with " + std::to_string(active) +
                                      " active requests at slot " + std::to_string(view_.slot));
    }
    return a;
}

SlotRecord SlotSimulator::step()
{
    SlotRecord rec{view_, decide(), 0, 0, false, false};
    if (rec.action == Action::Request) {
        ++view_.controller_requests;
    }

    bool request_done = false;
    if (view_.controller_requests > 0 && rng_.bernoulli(cfg_.rates.gamma())) {
        --view_.controller_requests;
        request_done = true;
    }
    bool delivered = false;
    if (view_.sampler_updates > 0 && rng_.bernoulli(cfg_.rates.mu())) {
        delivered = true;
        rec.deliveries = 1;
        rec.delivered_generation = updates_[0];
        updates_[0] = updates_[1];
        --view_.sampler_updates;
    }

    const std::int64_t next = view_.slot + 1;
    view_.aoi = delivered ? next - rec.delivered_generation : view_.aoi + 1;
    if (request_done) {
        rec.new_update = true;
        rec.new_update_blocked = view_.sampler_updates > 0;
        updates_[static_cast<std::size_t>(view_.sampler_updates)] = next;
        ++view_.sampler_updates;
    }
    view_.slot = next;
    view_.head_age = view_.sampler_updates >= 1 ? next - generation(0) : 0;
    view_.queued_age = view_.sampler_updates == 2 ? next - generation(1) : 0;
    return rec;
}

SimResult run_simulation(const SystemConfig& cfg, const PolicySpec& policy)
{
    SlotSimulator sim(cfg, policy);
    const auto span = static_cast<double>(cfg.horizon - cfg.warmup);
    auto batch_of = [&](std::int64_t slot) {
        const auto b = static_cast<std::size_t>(static_cast<double>(slot - cfg.warmup) / span * kBatches);
        return std::min(b, kBatches - 1);
    };

    BatchRatio aoi;
    BatchRatio mean_i;
    BatchRatio mean_i2;
    BatchRatio mean_it;
    BatchRatio busy;
    std::int64_t previous_generation = -1;

    for (std::int64_t t = 0; t < cfg.horizon; ++t) {
        const SlotRecord rec = sim.step();
        const bool counted = t >= cfg.warmup;
        if (counted) {
            aoi.add(batch_of(t), static_cast<double>(rec.before.aoi));
        }
        if (rec.deliveries == 1) {
            const std::int64_t gen = rec.delivered_generation;
            if (previous_generation >= cfg.warmup) {
                const auto i = static_cast<double>(gen - previous_generation);
                const auto sys = static_cast<double>(t + 1 - gen);
                const std::size_t b = batch_of(t);
                mean_i.add(b, i);
                mean_i2.add(b, i * i);
                mean_it.add(b, i * sys);
            }
            previous_generation = gen;
        }
        if (rec.new_update && t + 1 >= cfg.warmup && t + 1 < cfg.horizon) {
            busy.add(batch_of(t + 1), rec.new_update_blocked ? 1.0 : 0.0);
        }
    }

    SimResult r;
    r.time_avg_aoi = aoi.mean();
    r.time_avg_se = aoi.standard_error();
    r.cycles = static_cast<std::int64_t>(mean_i.count());
    r.mean_I = mean_i.mean();
    r.mean_I2 = mean_i2.mean();
    r.mean_IT = mean_it.mean();
    r.se_I = mean_i.standard_error();
    r.se_I2 = mean_i2.standard_error();
    r.se_IT = mean_it.standard_error();
    r.cycle_aoi = r.cycles > 0 ? aoi_from_moments(r.mean_I, r.mean_I2, r.mean_IT)
                               : std::numeric_limits<double>::quiet_NaN();
    r.arrivals = static_cast<std::int64_t>(busy.count());
    r.busy_arrivals = static_cast<std::int64_t>(busy.total());
    r.busy_fraction = busy.mean();
    r.busy_fraction_se = busy.standard_error();
    r.seed = cfg.seed;
    r.horizon = cfg.horizon;
    r.warmup = cfg.warmup;
    return r;
}

SimResult run_table_policy(const SystemConfig& cfg, const Solution& solution, AgeCap cap)
{
    return run_simulation(cfg, TablePolicy{solution.policy, cap});
}

TraceRow to_trace_row(const SlotRecord& r)
{
    const SlotView& v = r.before;
    TraceRow row{v.slot,
                 v.aoi,
                 v.controller_requests == 2,
                 v.controller_requests >= 1,
                 v.sampler_updates == 2,
                 v.sampler_updates >= 1,
                 std::nullopt,
                 std::nullopt,
                 r.action,
                 r.deliveries};
    if (v.sampler_updates == 2) {
        row.buffer_age = v.queued_age;
    }
    if (v.sampler_updates >= 1) {
        row.sampler_age = v.head_age;
    }
    return row;
}

std::vector<TraceRow> simulate_trace(const SystemConfig& cfg, const PolicySpec& policy)
{
    SlotSimulator sim(cfg, policy);
    std::vector<TraceRow> trace;
    trace.reserve(static_cast<std::size_t>(cfg.horizon));
    for (std::int64_t t = 0; t < cfg.horizon; ++t) {
        trace.push_back(to_trace_row(sim.step()));
    }
    return trace;
}

std::vector<CycleRecord> extract_cycles(const std::vector<TraceRow>& trace)
{
    std::vector<CycleRecord> records;
    std::optional<std::int64_t> previous;
    std::size_t deliveries = 0;
    for (const TraceRow& row : trace) {
        if (row.deliveries == 0) {
            continue;
        }
        if (!row.sampler_age) {
            throw InvariantError("delivery recorded at slot " + std::to_string(row.slot) + " with an idle sampler");
        }
        ++deliveries;
        const std::int64_t gen = row.slot - *row.sampler_age;
        if (previous) {
            records.push_back({gen - *previous, row.slot + 1 - gen});
        }
        previous = gen;
    }
    if (deliveries < 2) {
        throw InsufficientDataError("cycle extraction needs at least two deliveries, trace has " +
                                    std::to_string(deliveries));
    }
    return records;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out)
{
    auto age = [](const std::optional<std::int64_t>& a) { return a ? std::to_string(*a) : std::string("*"); };
    out << "slot,aoi,controller_buffer,controller_busy,sampler_buffer,sampler_busy,buffer_age,sampler_age,"
           "action,deliveries\n";
    for (const TraceRow& r : trace) {
        out << r.slot << ',' << r.aoi << ',' << format_bool(r.controller_buffer) << ','
            << format_bool(r.controller_busy) << ',' << format_bool(r.sampler_buffer) << ','
            << format_bool(r.sampler_busy) << ',' << age(r.buffer_age) << ',' << age(r.sampler_age) << ','
            << to_int(r.action) << ',' << r.deliveries << '\n';
    }
}

KernelCheckReport empirical_kernel_check(const SystemConfig& cfg, const PolicySpec& policy, std::int64_t visits,
                                         const KernelCheckOptions& options)
{
    if (visits < 1) {
        throw ParameterError("kernel check needs a positive visit threshold");
    }
    if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
        throw ParameterError("kernel check confidence must lie in (0, 1)");
    }
    const auto* table = std::get_if<TablePolicy>(&policy);
    const AgeCap cap = table ? table->cap : options.cap;
    const bool two = cfg.capacity == Capacity::TwoPacket;
    const ServiceRates reference = options.reference_rates.value_or(cfg.rates);
    const StateSpace1P space1(cap);
    const StateSpace2P space2(cap);

    auto index = [&](const SlotView& v) {
        return two ? space2.index_of(observe_2p(v, cap)) : space1.index_of(observe_1p(v, cap));
    };
    auto family = [&](std::size_t i) {
        return two ? static_cast<std::size_t>(*space2.state_at(i).family())
                   : static_cast<std::size_t>(space1.state_at(i).family());
    };

    SlotSimulator sim(cfg, policy);
    std::map<std::pair<std::size_t, int>, std::map<std::size_t, std::int64_t>> counts;
    KernelCheckReport report;
    report.family_visits.assign(two ? kFamilyCount2P : 3, 0);

    for (std::int64_t t = 0; t < cfg.horizon; ++t) {
        const bool record = t >= cfg.warmup;
        const std::size_t from = record ? index(sim.view()) : 0;
        const SlotRecord rec = sim.step();
        if (!record) {
            continue;
        }
        ++report.family_visits[family(from)];
        ++counts[{from, to_int(rec.action)}][index(sim.view())];
    }

    for (const auto& [cell, observed] : counts) {
        const auto [state, action_label] = cell;
        const auto action = static_cast<Action>(action_label);
        std::map<std::size_t, double> expected;
        if (two) {
            for (const auto& o : transitions_2p(space2.state_at(state), action, reference, cap)) {
                expected[space2.index_of(o.next)] += o.probability;
            }
        } else {
            for (const auto& o : transitions_1p(space1.state_at(state), action, reference, cap)) {
                expected[space1.index_of(o.next)] += o.probability;
            }
        }

        KernelCell kc{state, action, 0, 0.0, 0, 1.0, 0, false, false};
        for (const auto& [next, n] : observed) {
            kc.visits += n;
            if (expected.find(next) == expected.end()) {
                kc.unexpected += n;
            }
        }
        double min_expected = std::numeric_limits<double>::infinity();
        for (const auto& [next, p] : expected) {
            const double e = p * static_cast<double>(kc.visits);
            const auto it = observed.find(next);
            const double o = it == observed.end() ? 0.0 : static_cast<double>(it->second);
            kc.statistic += (o - e) * (o - e) / e;
            min_expected = std::min(min_expected, e);
        }
        kc.dof = static_cast<int>(expected.size()) - 1;
        kc.conclusive = kc.visits >= visits && min_expected >= options.min_expected;
        if (kc.conclusive && kc.dof > 0) {
            const boost::math::chi_squared dist(kc.dof);
            kc.p_value = boost::math::cdf(boost::math::complement(dist, kc.statistic));
        }
        kc.flagged = kc.unexpected > 0 || (kc.conclusive && kc.p_value < 1.0 - options.confidence);

        report.unexpected_transitions += kc.unexpected;
        if (kc.conclusive || kc.flagged) {
            ++report.tested;
        } else {
            ++report.inconclusive;
        }
        if (kc.flagged) {
            ++report.flagged;
        }
        report.cells.push_back(kc);
    }
    return report;
}

void write_kernel_check_csv(const KernelCheckReport& report, std::ostream& out)
{
    out << "state_id,action,visits,statistic,dof,p_value,unexpected,conclusive,flagged\n";
    for (const KernelCell& c : report.cells) {
        out << c.state << ',' << to_int(c.action) << ',' << c.visits << ',' << format_double(c.statistic) << ','
            << c.dof << ',' << format_double(c.p_value) << ',' << c.unexpected << ','
            << format_bool(c.conclusive) << ',' << format_bool(c.flagged) << '\n';
    }
}

std::string sim_result_csv_header()
{
    return "policy,gamma,mu,capacity,seed,warmup,horizon,time_avg_aoi,time_avg_se,cycle_aoi,cycles,mean_I,"
           "mean_I2,mean_IT,busy_fraction\n";
}

std::string sim_result_csv_row(const std::string& policy, const SystemConfig& cfg, const SimResult& r)
{
    return csv_row({policy, format_double(cfg.rates.gamma()), format_double(cfg.rates.mu()),
                    capacity_name(cfg.capacity), std::to_string(r.seed), std::to_string(r.warmup),
                    std::to_string(r.horizon), format_double(r.time_avg_aoi), format_double(r.time_avg_se),
                    format_double(r.cycle_aoi), std::to_string(r.cycles), format_double(r.mean_I),
                    format_double(r.mean_I2), format_double(r.mean_IT), format_double(r.busy_fraction)});
}

} // namespace aoi
