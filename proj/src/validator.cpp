#include "ttsched/validator.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace ttsched {

std::vector<bool> zero_jitter_requirements(const Instance& instance)
{
	std::vector<bool> flags(instance.size());
	for (std::size_t i = 0; i < instance.size(); ++i)
		flags[i] = instance.activities[i].jitter == 0;
	return flags;
}

const char* to_string(ViolationKind kind)
{
	switch (kind) {
	case ViolationKind::Window: return "window";
	case ViolationKind::ResourceOverlap: return "resource-overlap";
	case ViolationKind::SelfOrder: return "self-order";
	case ViolationKind::DagOrder: return "dag-order";
	case ViolationKind::Jitter: return "jitter";
	}
	return "unknown";
}

std::size_t ValidationReport::count(ViolationKind kind) const
{
	return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
	                                              [kind](const Violation& v) { return v.kind == kind; }));
}

namespace {

Time local_hyper_period(const Instance& instance)
{
	Time h = 1;
	for (const auto& a : instance.activities)
		h = std::lcm(h, a.period);
	return h;
}

struct JobSpan {
	Time begin, end;
	ActivityId activity;
	std::size_t job;
};

bool overlaps(Time b1, Time e1, Time b2, Time e2)
{
	return b1 < e2 && b2 < e1;
}

class Checker {
public:
	Checker(const Instance& instance, const Schedule& schedule)
		: inst_(instance), sched_(schedule), hp_(local_hyper_period(instance))
	{
	}

	ValidationReport run()
	{
		check_shape();
		check_windows();
		check_resources();
		check_self_order();
		check_dag();
		check_jitter();
		fill_metrics();
		report_.ok = report_.violations.empty();
		return std::move(report_);
	}

private:
	const Instance& inst_;
	const Schedule& sched_;
	Time hp_;
	ValidationReport report_;

	std::size_t jobs(ActivityId i) const { return static_cast<std::size_t>(hp_ / inst_.activities[i].period); }
	Time s(ActivityId i, std::size_t j) const { return sched_.start[i][j]; }
	Time e(ActivityId i) const { return inst_.activities[i].exec; }

	void add(ViolationKind kind, ActivityId a, std::size_t j, ActivityId b, std::size_t k, std::string detail)
	{
		report_.violations.push_back({kind, a, j, b, k, std::move(detail)});
	}

	void check_shape() const
	{
		if (sched_.start.size() != inst_.size())
			throw ShapeError("schedule has " + std::to_string(sched_.start.size()) + " activities, instance has " +
			                 std::to_string(inst_.size()));
		for (ActivityId i = 0; i < inst_.size(); ++i)
			if (sched_.start[i].size() != jobs(i))
				throw ShapeError("activity " + std::to_string(i) + " has " + std::to_string(sched_.start[i].size()) +
				                 " jobs, expected " + std::to_string(jobs(i)));
	}

	void check_windows()
	{
		for (ActivityId i = 0; i < inst_.size(); ++i) {
			Time p = inst_.activities[i].period;
			for (std::size_t j = 0; j < jobs(i); ++j) {
				Time lo = static_cast<Time>(j) * p;
				Time hi = static_cast<Time>(j + 2) * p - e(i);
				if (s(i, j) < lo || s(i, j) > hi) {
					std::ostringstream os;
					os << "start " << s(i, j) << " outside [" << lo << ", " << hi << "]";
					add(ViolationKind::Window, i, j, i, j, os.str());
				}
			}
		}
	}

	void check_resources()
	{
		std::size_t m = inst_.platform.resources;
		std::vector<std::vector<JobSpan>> lanes(m);
		for (ActivityId i = 0; i < inst_.size(); ++i) {
			auto r = inst_.resource_of(i);
			for (std::size_t j = 0; j < jobs(i); ++j)
				lanes[r].push_back({s(i, j), s(i, j) + e(i), i, j});
		}
		for (auto& lane : lanes) {
			std::sort(lane.begin(), lane.end(), [](const JobSpan& a, const JobSpan& b) {
				return std::tie(a.begin, a.activity, a.job) < std::tie(b.begin, b.activity, b.job);
			});
			std::vector<JobSpan> active;
			for (const auto& cur : lane) {
				std::erase_if(active, [&](const JobSpan& a) { return a.end <= cur.begin; });
				for (const auto& a : active)
					if (a.activity != cur.activity)
						add(ViolationKind::ResourceOverlap, a.activity, a.job, cur.activity, cur.job,
						    "jobs overlap at " + std::to_string(cur.begin));
				active.push_back(cur);
			}

			// First-period jobs shifted by H against last-period jobs.
			std::vector<JobSpan> firsts, lasts;
			for (const auto& js : lane) {
				if (js.job == 0)
					firsts.push_back({js.begin + hp_, js.end + hp_, js.activity, js.job});
				if (js.job + 1 == jobs(js.activity))
					lasts.push_back(js);
			}
			for (const auto& l : lasts)
				for (const auto& f : firsts)
					if (f.activity != l.activity && overlaps(f.begin, f.end, l.begin, l.end))
						add(ViolationKind::ResourceOverlap, f.activity, f.job, l.activity, l.job,
						    "first job + H overlaps last job at " + std::to_string(std::max(f.begin, l.begin)));
		}
	}

	void check_self_order()
	{
		for (ActivityId i = 0; i < inst_.size(); ++i) {
			auto n = jobs(i);
			for (std::size_t j = 0; j + 1 < n; ++j)
				if (s(i, j) + e(i) > s(i, j + 1))
					add(ViolationKind::SelfOrder, i, j, i, j + 1, "job overlaps its successor job");
			if (s(i, n - 1) + e(i) > s(i, 0) + hp_)
				add(ViolationKind::SelfOrder, i, n - 1, i, 0, "last job overlaps first job of the next hyper-period");
		}
	}

	void check_dag()
	{
		for (auto [from, to] : inst_.dag.edges()) {
			auto n = std::min(jobs(from), jobs(to));
			for (std::size_t j = 0; j < n; ++j)
				if (s(from, j) + e(from) > s(to, j))
					add(ViolationKind::DagOrder, from, j, to, j,
					    "successor starts at " + std::to_string(s(to, j)) + " before predecessor finishes at " +
					        std::to_string(s(from, j) + e(from)));
		}
	}

	Time deviation(ActivityId i, std::size_t j) const
	{
		// Deviation between job j-1 and j; j == 0 is the hyper-period border.
		Time p = inst_.activities[i].period;
		auto n = jobs(i);
		if (j == 0)
			return std::abs(s(i, 0) + hp_ - p - s(i, n - 1));
		return std::abs(s(i, j) - (s(i, j - 1) + p));
	}

	void check_jitter()
	{
		report_.metrics.max_jitter.assign(inst_.size(), 0);
		for (ActivityId i = 0; i < inst_.size(); ++i) {
			Time jit = inst_.activities[i].jitter;
			for (std::size_t j = 0; j < jobs(i); ++j) {
				Time d = deviation(i, j);
				report_.metrics.max_jitter[i] = std::max(report_.metrics.max_jitter[i], d);
				if (d > jit)
					add(ViolationKind::Jitter, i, j, i, j,
					    "relative jitter " + std::to_string(d) + " exceeds " + std::to_string(jit));
			}
		}
	}

	void fill_metrics()
	{
		report_.metrics.utilization = utilization(inst_);
		report_.metrics.memory_bytes = schedule_memory_bytes(inst_, sched_);
		for (const auto& chain : inst_.chains) {
			Time worst = 0;
			if (!chain.empty()) {
				auto first = chain.front(), last = chain.back();
				Time p = inst_.activities[first].period;
				for (std::size_t j = 0; j < jobs(last); ++j)
					worst = std::max(worst, s(last, j) + e(last) - static_cast<Time>(j) * p);
			}
			report_.metrics.chain_latency.push_back(worst);
		}
	}
};

}  // namespace

ValidationReport validate(const Instance& instance, const Schedule& schedule)
{
	return Checker(instance, schedule).run();
}

std::vector<bool> is_zero_jitter(const Instance& instance, const Schedule& schedule)
{
	std::vector<bool> out(instance.size(), true);
	for (ActivityId i = 0; i < instance.size(); ++i) {
		const auto& st = schedule.start.at(i);
		for (std::size_t j = 0; j + 1 < st.size(); ++j)
			if (st[j + 1] - st[j] != instance.activities[i].period) {
				out[i] = false;
				break;
			}
	}
	return out;
}

std::vector<double> utilization(const Instance& instance)
{
	std::vector<double> r(instance.platform.resources, 0.0);
	for (const auto& a : instance.activities)
		if (a.resource)
			r.at(*a.resource) += static_cast<double>(a.exec) / static_cast<double>(a.period);
	return r;
}

std::uint64_t schedule_memory_bytes(std::uint64_t stored_entries)
{
	return bytes_per_stored_start * stored_entries;
}

std::uint64_t schedule_memory_bytes(const Instance& instance, const Schedule& schedule)
{
	std::uint64_t entries = 0;
	for (ActivityId i = 0; i < instance.size(); ++i) {
		bool zj = i < schedule.zero_jitter.size() && schedule.zero_jitter[i];
		entries += zj ? 1 : schedule.start.at(i).size();
	}
	return schedule_memory_bytes(entries);
}

}  // namespace ttsched
