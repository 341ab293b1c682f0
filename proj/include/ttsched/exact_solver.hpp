#ifndef TTSCHED_EXACT_SOLVER_HPP
#define TTSCHED_EXACT_SOLVER_HPP

#include <atomic>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ttsched/core_model.hpp"
#include "ttsched/schedule.hpp"

namespace ttsched {

enum class ScheduleMode { ZeroJitter, JitterConstrained };

const char* to_string(ScheduleMode mode);

// The four model reductions. Each one preserves the feasibility verdict.
struct Improvements {
	bool prune_pairs = true;      // drop resource pairs whose windows cannot meet
	bool variable_bounds = true;  // windows as variable bounds rather than rows (LP export)
	bool refine_bounds = true;    // tighten windows by t^b / t^a
	bool omit_jitter = true;      // drop jitter constraints no schedule can violate

	static Improvements none() { return {false, false, false, false}; }
	static Improvements all() { return {}; }
};

class ModelInfeasible : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

struct BuildOptions {
	ScheduleMode mode = ScheduleMode::JitterConstrained;
	Improvements improvements{};
	// When false an empty window is recorded in the model instead of thrown.
	bool throw_on_empty_window = true;
};

using VarId = std::size_t;

struct JobVar {
	ActivityId activity;
	std::size_t job;  // first job in zero-jitter mode
	Time lb, ub;
};

// Start of a job is x[var] + offset.
struct JobRef {
	VarId var;
	Time offset;
};

enum class ArcKind { SelfOrder, DagOrder, Jitter };

// x[to] >= x[from] + weight
struct DiffArc {
	VarId from, to;
	Time weight;
	ArcKind kind;
	ActivityId activity;  // owner; the predecessor for DAG arcs
	std::size_t job;
};

// Either job a runs before job b or vice-versa. For wrap pairs job a is the
// first job of its activity shifted by +H and job b a last job.
struct ResourcePair {
	ActivityId a;
	std::size_t job_a;
	ActivityId b;
	std::size_t job_b;
	bool wrap;
	VarId u, v;         // vars of a and b
	Time a_first;       // x[v] >= x[u] + a_first when a precedes b
	Time b_first;       // x[u] >= x[v] + b_first when b precedes a
};

struct BuiltModel {
	ScheduleMode mode = ScheduleMode::JitterConstrained;
	Improvements improvements{};
	Time hyper_period = 0;
	std::uint64_t instance_hash = 0;
	std::vector<Time> period, exec;
	std::vector<ResourceId> resource;
	std::vector<JobVar> vars;
	std::vector<std::vector<JobRef>> jobs;  // per activity, per job
	std::vector<DiffArc> arcs;
	std::vector<ResourcePair> pairs;
	std::vector<ActivityId> jitter_kept;
	std::vector<ActivityId> jitter_omitted;
	std::size_t pruned_pairs = 0;
	bool empty_window = false;
	// Storage flags for schedules decoded from this model.
	std::vector<bool> zero_jitter_flags;

	std::size_t jitter_rows() const;
	std::string var_name(VarId v) const;
};

BuiltModel build_model(const Instance& instance, const DerivedBounds& bounds, const BuildOptions& options = {});

enum class SolveStatus { Feasible, Infeasible, Timeout };

const char* to_string(SolveStatus status);

struct SolveStats {
	std::size_t nodes = 0;
	std::size_t propagations = 0;
	std::size_t decisions = 0;
	double wall_seconds = 0.0;
};

struct SolveResult {
	SolveStatus status = SolveStatus::Infeasible;
	std::optional<Schedule> schedule;
	SolveStats stats;
};

// MinSlack: branch on the conflicting pair with the least slack, larger-slack
// order first. WindowOrder: narrowest window then shortest period, earliest
// job first. Alternating: restarts that switch between the two with node
// budgets doubling every second run.
enum class BranchRule { MinSlack, WindowOrder, Alternating };

struct SolveLimits {
	std::chrono::milliseconds time_limit = std::chrono::seconds(3000);
	std::size_t node_limit = static_cast<std::size_t>(-1);
	BranchRule branching = BranchRule::Alternating;
	// Overload checking and edge finding over the jobs of each resource.
	bool edge_finding = true;
	// Models with at most this many variables keep all pairwise difference
	// bounds (path consistency); larger ones propagate variable bounds only.
	std::size_t dense_var_limit = 700;
	// Checked with the clock; when set the search ends as a timeout.
	const std::atomic<bool>* stop = nullptr;
};

// Complete search over the ordering of resource pairs with bounds propagation
// on all difference constraints. Stops at the first feasible schedule.
SolveResult solve(const BuiltModel& model, const SolveLimits& limits = {});

// build_model + solve; an empty window yields Infeasible.
SolveResult solve(const Instance& instance, ScheduleMode mode, const SolveLimits& limits = {},
                  Improvements improvements = {});

// Text exporters of the same model for external solvers.
std::string export_smtlib(const BuiltModel& model);
std::string export_lp(const BuiltModel& model);

// Reads "(define-fun s_i_j () Int v)" entries of a solver model. Throws
// std::runtime_error when a start variable is missing.
Schedule decode_smt_model(const BuiltModel& model, std::string_view text);

}  // namespace ttsched

#endif
