#ifndef TTSCHED_VALIDATOR_HPP
#define TTSCHED_VALIDATOR_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "ttsched/core_model.hpp"
#include "ttsched/schedule.hpp"

namespace ttsched {

class ShapeError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

enum class ViolationKind { Window, ResourceOverlap, SelfOrder, DagOrder, Jitter };

const char* to_string(ViolationKind kind);

struct Violation {
	ViolationKind kind;
	ActivityId activity;
	std::size_t job;
	// Second party for overlaps and DAG order; equal to the first otherwise.
	ActivityId other_activity;
	std::size_t other_job;
	std::string detail;
};

struct ValidationMetrics {
	std::vector<double> utilization;      // per resource
	std::vector<Time> max_jitter;         // per activity, observed
	std::uint64_t memory_bytes = 0;
	std::vector<Time> chain_latency;      // per chain, worst period
};

struct ValidationReport {
	bool ok = true;
	std::vector<Violation> violations;
	ValidationMetrics metrics;

	std::size_t count(ViolationKind kind) const;
};

// Checks every constraint of the scheduling problem independently of the
// solvers. Throws ShapeError when the job counts do not match the instance.
ValidationReport validate(const Instance& instance, const Schedule& schedule);

// Definition of a zero-jitter activity: consecutive starts differ by p.
std::vector<bool> is_zero_jitter(const Instance& instance, const Schedule& schedule);

// r_y = sum of e/p over the activities mapped to y.
std::vector<double> utilization(const Instance& instance);

constexpr std::uint64_t bytes_per_stored_start = 8;

std::uint64_t schedule_memory_bytes(const Instance& instance, const Schedule& schedule);
std::uint64_t schedule_memory_bytes(std::uint64_t stored_entries);

}  // namespace ttsched

#endif
