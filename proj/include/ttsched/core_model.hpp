#ifndef TTSCHED_CORE_MODEL_HPP
#define TTSCHED_CORE_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttsched {

// Integer ticks. Signed so that differences between start times (wrap arcs,
// jitter bounds) stay in the same type; every start time is non-negative.
using Time = std::int64_t;
using ActivityId = std::size_t;
using ResourceId = std::size_t;

class OverflowError : public std::overflow_error {
public:
	using std::overflow_error::overflow_error;
};

class CycleError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

class ModelError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

enum class ActivityKind { Task, Message };

struct Activity {
	ActivityId id = 0;
	ActivityKind kind = ActivityKind::Task;
	Time period = 1;
	Time exec = 1;
	Time jitter = 0;
	std::optional<ResourceId> resource;
	// Messages only.
	std::uint64_t size_bytes = 0;
	std::optional<ActivityId> sender;
	std::optional<ActivityId> receiver;

	bool is_task() const { return kind == ActivityKind::Task; }
	bool is_message() const { return kind == ActivityKind::Message; }
};

// m resources: cores are [0, m/2), the input port of core c is m/2 + c.
struct Platform {
	std::size_t resources = 6;
	std::uint64_t core_freq_hz = 125'000'000;
	std::uint64_t bandwidth_bytes_per_s = 400'000'000;
	std::uint64_t latency_ns = 250;
	std::uint64_t granularity_ns = 1000;

	std::size_t core_count() const { return resources / 2; }
	ResourceId port_of_core(ResourceId core) const { return core_count() + core; }
	bool is_core(ResourceId r) const { return r < core_count(); }
};

// Precedence relation with precomputed transitive closures.
class PrecedenceDag {
public:
	PrecedenceDag() = default;
	// Throws CycleError if the edges contain a cycle.
	PrecedenceDag(std::size_t n, const std::vector<std::pair<ActivityId, ActivityId>>& edges);

	std::size_t size() const { return succ_.size(); }
	const std::vector<ActivityId>& successors(ActivityId a) const { return succ_[a]; }
	const std::vector<ActivityId>& predecessors(ActivityId a) const { return pred_[a]; }
	// Transitive closures, sorted ascending.
	const std::vector<ActivityId>& all_successors(ActivityId a) const { return succ_closure_[a]; }
	const std::vector<ActivityId>& all_predecessors(ActivityId a) const { return pred_closure_[a]; }
	const std::vector<ActivityId>& topological_order() const { return topo_; }
	std::vector<std::pair<ActivityId, ActivityId>> edges() const;
	bool has_edge(ActivityId from, ActivityId to) const;

private:
	std::vector<std::vector<ActivityId>> succ_, pred_;
	std::vector<std::vector<ActivityId>> succ_closure_, pred_closure_;
	std::vector<ActivityId> topo_;
};

struct Instance {
	Platform platform;
	std::vector<Activity> activities;
	PrecedenceDag dag;
	// Informational; every chain is a path in the DAG.
	std::vector<std::vector<ActivityId>> chains;

	std::size_t size() const { return activities.size(); }
	bool is_mapped() const;
	ResourceId resource_of(ActivityId a) const;
	// Structural checks: periods, execution times, DAG periods, mapping
	// ranges and chain paths. Throws ModelError.
	void check() const;
};

struct DerivedBounds {
	Time hyper_period = 0;
	std::vector<std::size_t> job_count;
	// Longest-path-only values and the same-resource refinements.
	std::vector<Time> before_path, after_path;
	std::vector<Time> before, after;
	std::vector<Time> slack;
	std::vector<Time> inherited_jitter;
	std::vector<bool> jitter_critical;

	std::size_t total_jobs() const;
	bool has_negative_slack() const;
};

// lcm of all periods. Throws OverflowError when it leaves the tick range.
Time hyper_period(std::span<const Time> periods);
Time hyper_period(const Instance& instance);

std::size_t job_count(Time period, Time hyper_period);

// sz/bnd + lat rounded up to the timer granularity, at least one tick.
Time message_exec_time(std::uint64_t size_bytes, const Platform& platform);

struct ChainBounds {
	std::vector<Time> before_path, after_path;
	std::vector<Time> before, after;
};
ChainBounds chain_bounds(const Instance& instance);

Time worst_case_slack(Time period, Time exec, Time before, Time after);

// The omission test for jitter constraints: true iff jit <= I - 2.
bool jitter_critical(Time jitter, Time slack);

// Largest deviation |s^j - s^{j-1} - p| that the job windows and the
// consecutive-job ordering still allow. One-period windows leave I admissible
// instants per job, two-period windows leave p + I + 1.
enum class JobWindow { TwoPeriods, OnePeriod };
Time max_feasible_deviation(Time period, Time exec, Time slack, JobWindow window);
// A jitter bound is redundant when no admissible schedule can exceed it.
bool jitter_redundant(Time jitter, Time period, Time exec, Time slack, JobWindow window);

// min of jit over the activity and its transitive successors.
Time inherited_jitter(ActivityId a, const PrecedenceDag& dag, std::span<const Time> jitter);

// Everything above for every activity. Slack may be negative; callers decide
// whether to warn.
DerivedBounds derive_bounds(const Instance& instance);

// Stable 64-bit fingerprint of the scheduling-relevant content.
std::uint64_t instance_fingerprint(const Instance& instance);

}  // namespace ttsched

#endif
