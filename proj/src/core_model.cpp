#include "ttsched/core_model.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace ttsched {

PrecedenceDag::PrecedenceDag(std::size_t n, const std::vector<std::pair<ActivityId, ActivityId>>& edges)
	: succ_(n), pred_(n), succ_closure_(n), pred_closure_(n)
{
	for (auto [from, to] : edges) {
		if (from >= n || to >= n)
			throw ModelError("precedence edge references unknown activity");
		if (from == to)
			throw CycleError("self-loop on activity " + std::to_string(from));
		succ_[from].push_back(to);
		pred_[to].push_back(from);
	}
	for (auto& v : succ_) {
		std::sort(v.begin(), v.end());
		v.erase(std::unique(v.begin(), v.end()), v.end());
	}
	for (auto& v : pred_) {
		std::sort(v.begin(), v.end());
		v.erase(std::unique(v.begin(), v.end()), v.end());
	}

	// Kahn with a min-heap keeps the order deterministic.
	std::vector<std::size_t> indeg(n);
	for (std::size_t i = 0; i < n; ++i)
		indeg[i] = pred_[i].size();
	std::priority_queue<ActivityId, std::vector<ActivityId>, std::greater<>> ready;
	for (std::size_t i = 0; i < n; ++i)
		if (indeg[i] == 0)
			ready.push(i);
	topo_.reserve(n);
	while (!ready.empty()) {
		auto a = ready.top();
		ready.pop();
		topo_.push_back(a);
		for (auto s : succ_[a])
			if (--indeg[s] == 0)
				ready.push(s);
	}
	if (topo_.size() != n)
		throw CycleError("precedence graph contains a cycle");

	for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
		auto a = *it;
		auto& c = succ_closure_[a];
		for (auto s : succ_[a]) {
			c.push_back(s);
			c.insert(c.end(), succ_closure_[s].begin(), succ_closure_[s].end());
		}
		std::sort(c.begin(), c.end());
		c.erase(std::unique(c.begin(), c.end()), c.end());
	}
	for (auto a : topo_) {
		auto& c = pred_closure_[a];
		for (auto p : pred_[a]) {
			c.push_back(p);
			c.insert(c.end(), pred_closure_[p].begin(), pred_closure_[p].end());
		}
		std::sort(c.begin(), c.end());
		c.erase(std::unique(c.begin(), c.end()), c.end());
	}
}

std::vector<std::pair<ActivityId, ActivityId>> PrecedenceDag::edges() const
{
	std::vector<std::pair<ActivityId, ActivityId>> out;
	for (ActivityId a = 0; a < succ_.size(); ++a)
		for (auto s : succ_[a])
			out.emplace_back(a, s);
	return out;
}

bool PrecedenceDag::has_edge(ActivityId from, ActivityId to) const
{
	return std::binary_search(succ_[from].begin(), succ_[from].end(), to);
}

bool Instance::is_mapped() const
{
	return std::all_of(activities.begin(), activities.end(),
	                   [](const Activity& a) { return a.resource.has_value(); });
}

ResourceId Instance::resource_of(ActivityId a) const
{
	const auto& r = activities.at(a).resource;
	if (!r)
		throw ModelError("activity " + std::to_string(a) + " is not mapped");
	return *r;
}

void Instance::check() const
{
	if (platform.resources == 0 || platform.resources % 2 != 0)
		throw ModelError("resource count must be even and positive");
	if (platform.bandwidth_bytes_per_s == 0)
		throw ModelError("bandwidth must be positive");
	if (platform.granularity_ns == 0)
		throw ModelError("granularity must be positive");
	if (dag.size() != activities.size())
		throw ModelError("DAG size does not match the activity count");
	for (std::size_t i = 0; i < activities.size(); ++i) {
		const auto& a = activities[i];
		auto tag = "activity " + std::to_string(i);
		if (a.id != i)
			throw ModelError(tag + ": ids must be dense and ordered");
		if (a.period < 1)
			throw ModelError(tag + ": period must be >= 1");
		if (a.exec < 1 || a.exec > a.period)
			throw ModelError(tag + ": execution time must lie in [1, period]");
		if (a.jitter < 0)
			throw ModelError(tag + ": negative jitter bound");
		if (a.resource) {
			if (*a.resource >= platform.resources)
				throw ModelError(tag + ": resource index out of range");
			if (a.is_task() != platform.is_core(*a.resource))
				throw ModelError(tag + ": tasks map to cores, messages to input ports");
		}
		if (a.is_message() && a.sender) {
			if (*a.sender >= activities.size())
				throw ModelError(tag + ": unknown sender");
			if (activities[*a.sender].period != a.period)
				throw ModelError(tag + ": message period differs from its sender");
		}
		for (auto s : dag.successors(i))
			if (activities[s].period != a.period)
				throw ModelError(tag + ": precedence between different periods");
	}
	for (const auto& chain : chains)
		for (std::size_t k = 1; k < chain.size(); ++k)
			if (chain[k - 1] >= activities.size() || chain[k] >= activities.size() ||
			    !dag.has_edge(chain[k - 1], chain[k]))
				throw ModelError("chain is not a path in the DAG");
}

std::size_t DerivedBounds::total_jobs() const
{
	return std::accumulate(job_count.begin(), job_count.end(), std::size_t{0});
}

bool DerivedBounds::has_negative_slack() const
{
	return std::any_of(slack.begin(), slack.end(), [](Time s) { return s < 0; });
}

Time hyper_period(std::span<const Time> periods)
{
	Time h = 1;
	for (auto p : periods) {
		if (p < 1)
			throw ModelError("period must be >= 1");
		Time g = std::gcd(h, p);
		Time factor = p / g;
		if (h > std::numeric_limits<Time>::max() / factor)
			throw OverflowError("hyper-period exceeds the 64-bit tick range");
		h *= factor;
	}
	return h;
}

Time hyper_period(const Instance& instance)
{
	std::vector<Time> periods;
	periods.reserve(instance.size());
	for (const auto& a : instance.activities)
		periods.push_back(a.period);
	return hyper_period(periods);
}

std::size_t job_count(Time period, Time hyper_period)
{
	return static_cast<std::size_t>(hyper_period / period);
}

Time message_exec_time(std::uint64_t size_bytes, const Platform& platform)
{
	// ns = sz * 1e9 / bnd + lat, kept as one fraction so nothing is rounded
	// before the final ceiling to whole ticks.
	using u128 = unsigned __int128;
	u128 num = u128(size_bytes) * 1'000'000'000u + u128(platform.latency_ns) * platform.bandwidth_bytes_per_s;
	u128 den = u128(platform.bandwidth_bytes_per_s) * platform.granularity_ns;
	u128 ticks = (num + den - 1) / den;
	return std::max<Time>(1, static_cast<Time>(ticks));
}

ChainBounds chain_bounds(const Instance& instance)
{
	const auto& dag = instance.dag;
	const auto n = instance.size();
	if (dag.size() != n)
		throw CycleError("DAG does not cover the instance");
	ChainBounds b;
	b.before_path.assign(n, 0);
	b.after_path.assign(n, 0);
	const auto& topo = dag.topological_order();
	if (topo.size() != n)
		throw CycleError("precedence graph contains a cycle");
	for (auto a : topo)
		for (auto p : dag.predecessors(a))
			b.before_path[a] = std::max(b.before_path[a], b.before_path[p] + instance.activities[p].exec);
	for (auto it = topo.rbegin(); it != topo.rend(); ++it)
		for (auto s : dag.successors(*it))
			b.after_path[*it] = std::max(b.after_path[*it], b.after_path[s] + instance.activities[s].exec);

	b.before = b.before_path;
	b.after = b.after_path;
	for (ActivityId a = 0; a < n; ++a) {
		const auto& r = instance.activities[a].resource;
		if (!r)
			continue;
		Time sum_before = 0, sum_after = 0;
		for (auto p : dag.all_predecessors(a))
			if (instance.activities[p].resource == r)
				sum_before += instance.activities[p].exec;
		for (auto s : dag.all_successors(a))
			if (instance.activities[s].resource == r)
				sum_after += instance.activities[s].exec;
		b.before[a] = std::max(b.before[a], sum_before);
		b.after[a] = std::max(b.after[a], sum_after);
	}
	return b;
}

Time worst_case_slack(Time period, Time exec, Time before, Time after)
{
	return period - (before + after + exec);
}

bool jitter_critical(Time jitter, Time slack)
{
	return jitter <= slack - 2;
}

Time max_feasible_deviation(Time period, Time exec, Time slack, JobWindow window)
{
	if (window == JobWindow::OnePeriod)
		return std::max<Time>(0, slack - 1);
	// Later job as late as possible against the earlier job as early as
	// possible gives p + I; the other direction is capped by s^j >= s^{j-1} + e.
	return std::max<Time>({0, period + slack, period - exec});
}

bool jitter_redundant(Time jitter, Time period, Time exec, Time slack, JobWindow window)
{
	return jitter >= max_feasible_deviation(period, exec, slack, window);
}

Time inherited_jitter(ActivityId a, const PrecedenceDag& dag, std::span<const Time> jitter)
{
	Time j = jitter[a];
	for (auto s : dag.all_successors(a))
		j = std::min(j, jitter[s]);
	return j;
}

DerivedBounds derive_bounds(const Instance& instance)
{
	DerivedBounds d;
	const auto n = instance.size();
	d.hyper_period = hyper_period(instance);
	auto cb = chain_bounds(instance);
	d.before_path = std::move(cb.before_path);
	d.after_path = std::move(cb.after_path);
	d.before = std::move(cb.before);
	d.after = std::move(cb.after);
	std::vector<Time> jit(n);
	for (ActivityId a = 0; a < n; ++a)
		jit[a] = instance.activities[a].jitter;
	d.job_count.resize(n);
	d.slack.resize(n);
	d.inherited_jitter.resize(n);
	d.jitter_critical.resize(n);
	for (ActivityId a = 0; a < n; ++a) {
		const auto& act = instance.activities[a];
		d.job_count[a] = job_count(act.period, d.hyper_period);
		d.slack[a] = worst_case_slack(act.period, act.exec, d.before[a], d.after[a]);
		d.inherited_jitter[a] = inherited_jitter(a, instance.dag, jit);
		d.jitter_critical[a] = jitter_critical(act.jitter, d.slack[a]);
	}
	return d;
}

namespace {

struct Fnv1a {
	std::uint64_t h = 0xcbf29ce484222325ull;
	void add(std::uint64_t v)
	{
		for (int i = 0; i < 8; ++i) {
			h ^= (v >> (8 * i)) & 0xffu;
			h *= 0x100000001b3ull;
		}
	}
};

}  // namespace

std::uint64_t instance_fingerprint(const Instance& instance)
{
	Fnv1a f;
	f.add(instance.platform.resources);
	f.add(instance.size());
	for (const auto& a : instance.activities) {
		f.add(static_cast<std::uint64_t>(a.kind));
		f.add(static_cast<std::uint64_t>(a.period));
		f.add(static_cast<std::uint64_t>(a.exec));
		f.add(static_cast<std::uint64_t>(a.jitter));
		f.add(a.resource ? *a.resource + 1 : 0);
	}
	for (auto [from, to] : instance.dag.edges()) {
		f.add(from);
		f.add(to);
	}
	return f.h;
}

}  // namespace ttsched
