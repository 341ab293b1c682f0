#ifndef TTSCHED_IO_HPP
#define TTSCHED_IO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ttsched/core_model.hpp"
#include "ttsched/schedule.hpp"

namespace ttsched {

// Malformed or inconsistent input files.
class InputError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

constexpr int schema_version = 1;

// {schema_version, platform, activities[], dag_edges[], chains[], mapping?}
// with every time in ticks of the platform granularity.
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

// Zero-jitter activities are written as one offset with a flag, the others
// as one start per job.
std::string schedule_to_json(const Instance& instance, const Schedule& schedule);
Schedule schedule_from_json(const std::string& text, const Instance& instance);

// activity,zero_jitter,job,start with one row per stored entry (job is
// empty for an offset row).
std::string schedule_to_csv(const Instance& instance, const Schedule& schedule);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

// One lane per resource over [0, H), one labeled rectangle per job. Jobs
// running past H are drawn wrapped.
std::string render_gantt(const Instance& instance, const Schedule& schedule);

}  // namespace ttsched

#endif
