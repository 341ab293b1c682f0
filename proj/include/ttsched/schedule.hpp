#ifndef TTSCHED_SCHEDULE_HPP
#define TTSCHED_SCHEDULE_HPP

#include <vector>

#include "ttsched/core_model.hpp"

namespace ttsched {

// start[i][j] for activity i and 0-based job j over one hyper-period.
struct Schedule {
	std::vector<std::vector<Time>> start;
	// Activities stored as a single offset (zero-jitter requirement) rather
	// than one entry per job.
	std::vector<bool> zero_jitter;

	std::size_t size() const { return start.size(); }
	bool empty() const { return start.empty(); }
};

// Flags every activity with jit == 0 as stored by offset.
std::vector<bool> zero_jitter_requirements(const Instance& instance);

}  // namespace ttsched

#endif
