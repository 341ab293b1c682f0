#ifndef TTSCHED_EXPERIMENTS_HPP
#define TTSCHED_EXPERIMENTS_HPP

#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttsched/core_model.hpp"
#include "ttsched/exact_solver.hpp"
#include "ttsched/generator.hpp"
#include "ttsched/schedule.hpp"

namespace ttsched {

// A solver handed back a schedule the validator rejects.
class SoundnessError : public std::logic_error {
public:
	using std::logic_error::logic_error;
};

enum class Method { Exact, Heuristic };
Method parse_method(const std::string& text);
const char* to_string(Method method);
ScheduleMode parse_mode(const std::string& text);

enum class PointStatus { Feasible, Infeasible, Timeout, Fail, ScaleError };
const char* to_string(PointStatus status);

struct PointOutcome {
	int percent = 0;
	PointStatus status = PointStatus::Fail;
	double seconds = 0.0;
	std::size_t jobs = 0;
	std::uint64_t memory_bytes = 0;
};

// One solve of a mapped instance. Any schedule returned is validated (and
// checked to be zero-jitter in ZJ mode); a rejection throws SoundnessError.
struct SolveOutcome {
	PointStatus status = PointStatus::Fail;
	std::optional<Schedule> schedule;
	double seconds = 0.0;
	std::string detail;
};
SolveOutcome solve_checked(const Instance& mapped, Method method, ScheduleMode mode,
                           std::chrono::milliseconds time_limit, BranchRule branching = SolveLimits{}.branching,
                           const std::atomic<bool>* stop = nullptr);

struct SweepOptions {
	int start_percent = 10;
	int step_percent = 1;
	int stop_percent = 100;
	std::chrono::milliseconds time_limit = std::chrono::seconds(3000);
	// Keep going for this many points after the first failure and record a
	// success there as an anomaly. 0 is the plain stop rule.
	int diagnostic_points = 0;
	BranchRule branching = SolveLimits{}.branching;  // exact method only
	// Interrupts the running point (reported as a timeout) and ends the sweep.
	const std::atomic<bool>* stop = nullptr;
};

struct SweepResult {
	std::string instance_id;
	Method method = Method::Exact;
	ScheduleMode mode = ScheduleMode::JitterConstrained;
	// Last feasible point; 0 when even the first point fails.
	int max_percent = 0;
	std::vector<PointOutcome> points;
	std::vector<int> anomalies;
};

// u = start, start + step, ... on the given mapped instance (mapping fixed),
// stopping at the first point that is not feasible.
SweepResult max_util_sweep(const Instance& mapped, Method method, ScheduleMode mode, const SweepOptions& options,
                           const std::string& instance_id = "");

// Runs jobs(0..n-1) on a pool of threads; results are collected by index.
// Stops handing out work once `stop` is set.
void run_pool(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job,
              const std::atomic<bool>* stop = nullptr);

// TTSCHED_WORKERS, else the hardware concurrency.
std::size_t default_workers();
// TTSCHED_TIME_LIMIT in seconds, else the fallback.
std::chrono::milliseconds default_time_limit(std::chrono::milliseconds fallback);

enum class Experiment { JitterSweep, ZeroJitterFractionSweep, PeriodStudy, ScaleStudy, Ems };
Experiment parse_experiment(const std::string& text);
const char* to_string(Experiment experiment);

struct ExperimentSpec {
	Experiment experiment = Experiment::JitterSweep;
	std::vector<int> sets{1};
	std::vector<std::uint64_t> seeds{1};
	std::vector<Method> methods{Method::Exact, Method::Heuristic};
	std::vector<JitterPolicy> jitters;  // empty: the experiment's menu
	std::vector<std::size_t> cores{3};
	int zj_step_percent = 5;
	SweepOptions sweep;
	std::size_t workers = 1;
	std::string out_prefix = "experiment";
	// Mapping search budget per instance.
	std::chrono::milliseconds mapping_limit = std::chrono::seconds(2);
};

// One row per sweep point in <prefix>_points.csv, one row per sweep in
// <prefix>_sweeps.csv and grouped statistics in <prefix>_summary.csv.
// Partial rows go to <prefix>_points.partial.csv while running.
struct ExperimentReport {
	std::vector<SweepResult> sweeps;
	std::vector<std::string> labels;  // configuration label per sweep
	std::size_t interrupted = 0;
};
ExperimentReport run_experiment(const ExperimentSpec& spec, const std::atomic<bool>* stop = nullptr);

// Mean, quartiles and extremes of the values, as the boxplots show them.
struct Summary {
	std::size_t count = 0;
	double mean = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
Summary summarize(std::vector<double> values);

}  // namespace ttsched

#endif
