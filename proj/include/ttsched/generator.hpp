#ifndef TTSCHED_GENERATOR_HPP
#define TTSCHED_GENERATOR_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttsched/core_model.hpp"

namespace ttsched {

class ParamError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

class ScaleError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

constexpr Time ticks_per_ms = 1000;  // 1 us timer

struct JitterPolicy {
	enum class Kind { Half, Fifth, Tenth, Zero, ZeroJitterFraction };
	Kind kind = Kind::Fifth;
	// ZeroJitterFraction only: share of jobs that get jit = 0; the rest get p/5.
	double fraction = 0.0;

	static JitterPolicy parse(const std::string& text);
	std::string str() const;
};

// Rows of the generator table.
struct SetRow {
	int id;
	std::size_t tasks;
	std::vector<Time> periods_ms;
	std::size_t accesses_per_task;
	std::size_t chains;
	// Probability that one variable access reads a variable written by
	// another task. Not part of the table; picked so that the mapped activity
	// counts land in the expected ranges.
	double read_share;
	std::size_t min_activities, max_activities;
};

const SetRow& set_row(int set_id);

struct GenParams {
	int set_id = 1;
	std::uint64_t seed = 1;
	std::size_t cores = 3;
	std::optional<std::size_t> tasks;
	std::vector<Time> periods_ms;  // empty: the set's menu
	std::optional<std::size_t> accesses_per_task;
	std::optional<std::size_t> chains;
	std::optional<double> read_share;
	Time exec_min_us = 5, exec_max_us = 500;
	std::uint64_t var_min_bytes = 4, var_max_bytes = 4096;
	std::size_t max_chain_length = 11;
	JitterPolicy jitter;
};

// Unmapped instance: tasks first, then one candidate message per
// communicating writer/reader pair (dropped by the mapping when both ends
// share a core). Chains are paths over equal-period tasks.
Instance generate(const GenParams& params);

// Sets jitter bounds on every activity.
void apply_jitter(Instance& instance, const JitterPolicy& policy);

// Activities that get jit = 0 under a zero-jitter fraction: largest job
// count first, ids ascending among ties, until the share of jobs reaches
// the fraction.
std::vector<bool> zero_jitter_selection(const Instance& instance, double fraction);

// Cores: only core lanes are scaled; message times stay at size/bandwidth +
// latency. AllResources: ports are scaled to u as well.
enum class ScaleScope { Cores, AllResources };

// Mapped instance with every loaded resource in scope at utilization u
// (within the tolerance).
Instance scale_to_utilization(const Instance& instance, double u, double tolerance = 0.01,
                              ScaleScope scope = ScaleScope::Cores);

// Period rewrites of the period study.
enum class PeriodSetting { Initial, Mono, Harmonic, NonHarmonic };
PeriodSetting parse_period_setting(const std::string& text);
const char* to_string(PeriodSetting setting);
Instance rewrite_periods(const Instance& instance, PeriodSetting setting);

// Engine management case study: 2000 tasks on 3 cores at 125 MHz, hyper
// period folded to 100 ms. Unmapped.
Instance ems_case_study(std::uint64_t seed);

}  // namespace ttsched

#endif
