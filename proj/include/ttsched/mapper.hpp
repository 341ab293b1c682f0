#ifndef TTSCHED_MAPPER_HPP
#define TTSCHED_MAPPER_HPP

#include <chrono>
#include <vector>

#include "ttsched/core_model.hpp"

namespace ttsched {

// Core index per task, in the order of the utilization vector given.
struct Mapping {
	std::vector<std::size_t> core;
	double objective = 0.0;
	bool optimal = false;
};

// Sum over consecutive cores of |load(j) - load(j+1)|.
double mapping_objective(const std::vector<double>& utils, const std::vector<std::size_t>& core,
                         std::size_t core_count);

// Branch-and-bound on the load-balancing model. On timeout returns the best
// incumbent with optimal == false.
Mapping map_exact(const std::vector<double>& utils, std::size_t core_count,
                  std::chrono::milliseconds timeout = std::chrono::seconds(10));

// Longest-processing-time-first; ties go to the lowest core index.
Mapping map_greedy(const std::vector<double>& utils, std::size_t core_count);

// Applies a task-to-core assignment to an instance. Inter-core messages move
// to the receiving core's input port; co-located messages are dropped and
// their precedence edges are bridged. The returned instance has dense ids.
// task_core is indexed by activity id and ignored for messages.
Instance derive_message_mapping(const Instance& instance, const std::vector<std::size_t>& task_core);

// Task utilizations of an instance, in task order, plus the activity ids.
struct TaskLoads {
	std::vector<ActivityId> tasks;
	std::vector<double> utils;
};
TaskLoads task_loads(const Instance& instance);

// Convenience: greedy or exact mapping of all tasks, then message mapping.
Instance map_instance(const Instance& instance, bool exact,
                      std::chrono::milliseconds timeout = std::chrono::seconds(10));

}  // namespace ttsched

#endif
