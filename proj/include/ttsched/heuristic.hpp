#ifndef TTSCHED_HEURISTIC_HPP
#define TTSCHED_HEURISTIC_HPP

#include <atomic>
#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttsched/core_model.hpp"
#include "ttsched/exact_solver.hpp"
#include "ttsched/interval_set.hpp"
#include "ttsched/schedule.hpp"

namespace ttsched {

class EmptyDomain : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

// TwoPeriods: [j*p + tb, (j+2)*p - ta - e - 1], the default. OnePeriod:
// [j*p + tb, (j+1)*p - ta - e - 1], which keeps each job inside its own
// period. j is 0-based.
enum class DomainWindow { TwoPeriods, OnePeriod };

IntervalSet initial_domain(const Instance& instance, const DerivedBounds& bounds, ActivityId a, std::size_t job,
                           DomainWindow window);

// x[to] >= x[from] + w over sub-model variables.
struct SubArc {
	std::size_t from, to;
	Time w;
};

// Least point of {x : x[v] in dom[v], all arcs hold}. Difference constraints
// with unary domains are closed under pointwise min, so this point also
// minimizes the sum of the variables.
std::optional<std::vector<Time>> least_solution(const std::vector<IntervalSet>& dom, const std::vector<SubArc>& arcs);

// Self-precedence (with the wrap arc) and, when with_jitter is set, relative
// jitter arcs for the n jobs of one activity occupying variables
// [base, base + n).
void activity_arcs(std::vector<SubArc>& out, std::size_t base, std::size_t n, Time period, Time exec, Time jitter,
                   Time hyper_period, bool with_jitter);

// Minimum-sum start vector of a single activity over explicit domains.
std::optional<std::vector<Time>> min_sum_starts(const std::vector<IntervalSet>& dom, Time period, Time exec,
                                                Time jitter, Time hyper_period, bool with_jitter = true);

// Scheduled set with per-resource occupancy. Domains are derived on demand
// from the occupancy and the scheduled predecessors, so insert and
// unschedule only touch the occupancy.
class SchedState {
public:
	SchedState(const Instance& instance, const DerivedBounds& bounds, DomainWindow window);

	const Instance& instance() const { return inst_; }
	const DerivedBounds& bounds() const { return bounds_; }
	DomainWindow window() const { return window_; }

	bool scheduled(ActivityId a) const { return scheduled_[a]; }
	std::size_t scheduled_count() const { return count_; }
	const std::vector<Time>& starts(ActivityId a) const { return starts_[a]; }

	IntervalSet domain(ActivityId a, std::size_t job) const;
	// Same set recomputed by scanning every scheduled job.
	IntervalSet domain_naive(ActivityId a, std::size_t job) const;

	void insert(ActivityId a, std::vector<Time> starts);
	// Removes a and its scheduled transitive successors; returns them.
	std::vector<ActivityId> unschedule(ActivityId a);
	void remove_one(ActivityId a);

	std::size_t scheduled_successors(ActivityId a) const;
	Schedule schedule() const;

private:
	struct Busy {
		Time end;
		ActivityId activity;
		std::size_t job;
	};
	const Instance& inst_;
	const DerivedBounds& bounds_;
	DomainWindow window_;
	std::vector<bool> scheduled_;
	std::vector<std::vector<Time>> starts_;
	std::size_t count_ = 0;
	std::vector<std::map<Time, Busy>> timeline_;

	Time lower_from_predecessors(ActivityId a, std::size_t job) const;
};

struct SubModelLimits {
	std::size_t pair_nodes = 20000;
	std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
	const std::atomic<bool>* stop = nullptr;
};

// Sub-model: one activity, or two at once with their mutual resource
// constraints. The jitter arcs of an activity are added unless its bound
// cannot be violated inside its domains.
std::optional<std::vector<Time>> sub_model(const SchedState& state, ActivityId a);
std::optional<std::pair<std::vector<Time>, std::vector<Time>>> sub_model_pair(const SchedState& state, ActivityId a1,
                                                                              ActivityId a2,
                                                                              const SubModelLimits& limits = {});

// Whether the sub-model carries jitter arcs for a.
bool needs_jitter_arcs(const SchedState& state, ActivityId a);

// Rule Un. Returns nullopt when no scheduled activity on a_c's resource is
// eligible.
std::optional<ActivityId> choose_unschedule(const SchedState& state, ActivityId a_c);

// Rule Pr key; smaller is scheduled first.
std::pair<Time, Time> priority_key(const DerivedBounds& bounds, ActivityId a);

struct HeuristicOptions {
	ScheduleMode mode = ScheduleMode::JitterConstrained;
	DomainWindow window = DomainWindow::TwoPeriods;
	std::chrono::milliseconds time_limit = std::chrono::seconds(3000);
	std::size_t pair_nodes = 20000;
	// 0 picks 50 * |A|^2 + 1000.
	std::size_t iteration_limit = 0;
	// Cross-check derived domains against the naive derivation after every
	// change of the scheduled set (slow).
	bool debug_domains = false;
	// Ends the run as a timeout once set.
	const std::atomic<bool>* stop = nullptr;
};

struct HeuristicStats {
	std::size_t iterations = 0;
	std::size_t level1 = 0;
	std::size_t level2 = 0;
	std::size_t level3 = 0;
	std::size_t unschedules = 0;
	std::size_t domain_checks = 0;
	double wall_seconds = 0.0;
};

enum class HeuristicStatus { Feasible, Fail, Timeout };

const char* to_string(HeuristicStatus status);

struct HeuristicResult {
	HeuristicStatus status = HeuristicStatus::Fail;
	std::optional<Schedule> schedule;
	HeuristicStats stats;
	std::string reason;
};

// Three-level scheduling loop. ZeroJitter mode treats every jitter bound as 0.
HeuristicResult run_3ls(const Instance& instance, const HeuristicOptions& options = {});

}  // namespace ttsched

#endif
