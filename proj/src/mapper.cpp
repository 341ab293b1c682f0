#include "ttsched/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ttsched {

double mapping_objective(const std::vector<double>& utils, const std::vector<std::size_t>& core,
                         std::size_t core_count)
{
	std::vector<double> load(core_count, 0.0);
	for (std::size_t i = 0; i < utils.size(); ++i)
		load.at(core[i]) += utils[i];
	double obj = 0.0;
	for (std::size_t j = 0; j + 1 < core_count; ++j)
		obj += std::abs(load[j] - load[j + 1]);
	return obj;
}

Mapping map_greedy(const std::vector<double>& utils, std::size_t core_count)
{
	if (core_count < 1)
		throw ModelError("core count must be >= 1");
	std::vector<std::size_t> order(utils.size());
	std::iota(order.begin(), order.end(), 0);
	std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return utils[a] > utils[b]; });
	std::vector<double> load(core_count, 0.0);
	Mapping m;
	m.core.assign(utils.size(), 0);
	for (auto t : order) {
		auto best = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
		m.core[t] = best;
		load[best] += utils[t];
	}
	m.objective = mapping_objective(utils, m.core, core_count);
	m.optimal = core_count == 1;
	return m;
}

namespace {

class MappingSearch {
public:
	MappingSearch(const std::vector<double>& utils, std::size_t cores, std::chrono::milliseconds timeout)
		: utils_(utils), cores_(cores), load_(cores, 0.0), assign_(utils.size(), 0),
		  deadline_(std::chrono::steady_clock::now() + timeout)
	{
		order_.resize(utils.size());
		std::iota(order_.begin(), order_.end(), 0);
		std::stable_sort(order_.begin(), order_.end(), [&](auto a, auto b) { return utils[a] > utils[b]; });
		suffix_.assign(utils.size() + 1, 0.0);
		for (std::size_t k = utils.size(); k-- > 0;)
			suffix_[k] = suffix_[k + 1] + utils[order_[k]];
	}

	Mapping run(Mapping incumbent)
	{
		best_ = std::move(incumbent);
		dfs(0);
		best_.optimal = !timed_out_;
		return best_;
	}

private:
	static constexpr double eps = 1e-12;
	const std::vector<double>& utils_;
	std::size_t cores_;
	std::vector<double> load_;
	std::vector<std::size_t> assign_, order_;
	std::vector<double> suffix_;
	Mapping best_;
	std::chrono::steady_clock::time_point deadline_;
	std::size_t nodes_ = 0;
	bool timed_out_ = false;

	double objective() const
	{
		double obj = 0.0;
		for (std::size_t j = 0; j + 1 < cores_; ++j)
			obj += std::abs(load_[j] - load_[j + 1]);
		return obj;
	}

	void dfs(std::size_t k)
	{
		if (timed_out_)
			return;
		if ((++nodes_ & 0xfff) == 0 && std::chrono::steady_clock::now() > deadline_) {
			timed_out_ = true;
			return;
		}
		double obj = objective();
		// Adding x to one core moves at most two terms by x each.
		if (obj - 2.0 * suffix_[k] >= best_.objective - eps)
			return;
		if (k == order_.size()) {
			best_.core = assign_;
			best_.objective = obj;
			return;
		}
		auto t = order_[k];
		for (std::size_t c = 0; c < cores_; ++c) {
			assign_[t] = c;
			load_[c] += utils_[t];
			dfs(k + 1);
			load_[c] -= utils_[t];
		}
	}
};

}  // namespace

Mapping map_exact(const std::vector<double>& utils, std::size_t core_count, std::chrono::milliseconds timeout)
{
	if (core_count < 1)
		throw ModelError("core count must be >= 1");
	auto incumbent = map_greedy(utils, core_count);
	if (incumbent.objective <= 0.0) {
		incumbent.optimal = true;
		return incumbent;
	}
	// Bound slightly above the greedy objective so the first optimum in
	// lowest-index order wins over the greedy assignment on ties.
	Mapping seed = incumbent;
	seed.objective += 1e-9;
	auto result = MappingSearch(utils, core_count, timeout).run(seed);
	if (result.objective > incumbent.objective) {
		incumbent.optimal = result.optimal;
		return incumbent;
	}
	result.objective = mapping_objective(utils, result.core, core_count);
	return result;
}

TaskLoads task_loads(const Instance& instance)
{
	TaskLoads tl;
	for (const auto& a : instance.activities)
		if (a.is_task()) {
			tl.tasks.push_back(a.id);
			tl.utils.push_back(static_cast<double>(a.exec) / static_cast<double>(a.period));
		}
	return tl;
}

Instance derive_message_mapping(const Instance& instance, const std::vector<std::size_t>& task_core)
{
	const auto n = instance.size();
	const auto cores = instance.platform.core_count();
	std::vector<bool> keep(n, true);
	std::vector<std::optional<ResourceId>> res(n);
	for (ActivityId a = 0; a < n; ++a) {
		const auto& act = instance.activities[a];
		if (act.is_task()) {
			if (task_core.at(a) >= cores)
				throw ModelError("task mapped to a non-existent core");
			res[a] = task_core[a];
		}
	}
	for (ActivityId a = 0; a < n; ++a) {
		const auto& act = instance.activities[a];
		if (!act.is_message())
			continue;
		if (!act.sender || !act.receiver)
			throw ModelError("message " + std::to_string(a) + " lacks sender or receiver");
		auto from = task_core.at(*act.sender), to = task_core.at(*act.receiver);
		if (from == to)
			keep[a] = false;
		else
			res[a] = instance.platform.port_of_core(to);
	}

	std::vector<ActivityId> new_id(n, n);
	Instance out;
	out.platform = instance.platform;
	for (ActivityId a = 0; a < n; ++a) {
		if (!keep[a])
			continue;
		new_id[a] = out.activities.size();
		auto act = instance.activities[a];
		act.id = new_id[a];
		act.resource = res[a];
		out.activities.push_back(act);
	}
	for (auto& act : out.activities) {
		if (act.sender)
			act.sender = new_id[*act.sender];
		if (act.receiver)
			act.receiver = new_id[*act.receiver];
	}

	// Bridge edges across dropped messages: every kept predecessor reachable
	// through dropped nodes connects to every kept successor reachable the same way.
	std::vector<std::pair<ActivityId, ActivityId>> edges;
	for (ActivityId a = 0; a < n; ++a) {
		if (!keep[a])
			continue;
		std::vector<ActivityId> stack(instance.dag.successors(a).begin(), instance.dag.successors(a).end());
		std::vector<bool> seen(n, false);
		while (!stack.empty()) {
			auto s = stack.back();
			stack.pop_back();
			if (seen[s])
				continue;
			seen[s] = true;
			if (keep[s])
				edges.emplace_back(new_id[a], new_id[s]);
			else
				for (auto t : instance.dag.successors(s))
					stack.push_back(t);
		}
	}
	out.dag = PrecedenceDag(out.activities.size(), edges);
	for (const auto& chain : instance.chains) {
		std::vector<ActivityId> c;
		for (auto a : chain)
			if (keep[a])
				c.push_back(new_id[a]);
		if (c.size() >= 2)
			out.chains.push_back(std::move(c));
	}
	return out;
}

Instance map_instance(const Instance& instance, bool exact, std::chrono::milliseconds timeout)
{
	auto tl = task_loads(instance);
	auto cores = instance.platform.core_count();
	auto m = exact ? map_exact(tl.utils, cores, timeout) : map_greedy(tl.utils, cores);
	std::vector<std::size_t> task_core(instance.size(), 0);
	for (std::size_t k = 0; k < tl.tasks.size(); ++k)
		task_core[tl.tasks[k]] = m.core[k];
	return derive_message_mapping(instance, task_core);
}

}  // namespace ttsched
