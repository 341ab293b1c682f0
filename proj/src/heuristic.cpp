#include "ttsched/heuristic.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>

namespace ttsched {

const char* to_string(HeuristicStatus status)
{
	switch (status) {
	case HeuristicStatus::Feasible: return "feasible";
	case HeuristicStatus::Fail: return "fail";
	case HeuristicStatus::Timeout: return "timeout";
	}
	return "unknown";
}

IntervalSet initial_domain(const Instance& instance, const DerivedBounds& bounds, ActivityId a, std::size_t job,
                           DomainWindow window)
{
	const auto& act = instance.activities[a];
	Time j = static_cast<Time>(job);
	Time span = window == DomainWindow::TwoPeriods ? 2 : 1;
	return IntervalSet(j * act.period + bounds.before[a],
	                   (j + span) * act.period - bounds.after[a] - act.exec - 1);
}

std::optional<std::vector<Time>> least_solution(const std::vector<IntervalSet>& dom, const std::vector<SubArc>& arcs)
{
	const std::size_t n = dom.size();
	std::vector<Time> x(n);
	for (std::size_t v = 0; v < n; ++v) {
		if (dom[v].empty())
			return std::nullopt;
		x[v] = dom[v].min();
	}
	std::vector<std::vector<std::size_t>> out(n);
	for (std::size_t k = 0; k < arcs.size(); ++k)
		out[arcs[k].from].push_back(k);
	std::deque<std::size_t> queue(n);
	std::iota(queue.begin(), queue.end(), 0);
	std::vector<bool> queued(n, true);
	while (!queue.empty()) {
		auto u = queue.front();
		queue.pop_front();
		queued[u] = false;
		for (auto k : out[u]) {
			const auto& a = arcs[k];
			Time need = x[u] + a.w;
			if (x[a.to] >= need)
				continue;
			auto nx = dom[a.to].next(need);
			if (!nx)
				return std::nullopt;
			x[a.to] = *nx;
			if (!queued[a.to]) {
				queued[a.to] = true;
				queue.push_back(a.to);
			}
		}
	}
	return x;
}

void activity_arcs(std::vector<SubArc>& out, std::size_t base, std::size_t n, Time period, Time exec, Time jitter,
                   Time hyper_period, bool with_jitter)
{
	if (n < 2)
		return;
	for (std::size_t j = 0; j + 1 < n; ++j)
		out.push_back({base + j, base + j + 1, exec});
	out.push_back({base + n - 1, base, exec - hyper_period});
	if (!with_jitter)
		return;
	for (std::size_t j = 1; j < n; ++j) {
		out.push_back({base + j - 1, base + j, period - jitter});
		out.push_back({base + j, base + j - 1, -period - jitter});
	}
	out.push_back({base + n - 1, base, period - hyper_period - jitter});
	out.push_back({base, base + n - 1, hyper_period - period - jitter});
}

std::optional<std::vector<Time>> min_sum_starts(const std::vector<IntervalSet>& dom, Time period, Time exec,
                                                Time jitter, Time hyper_period, bool with_jitter)
{
	std::vector<SubArc> arcs;
	activity_arcs(arcs, 0, dom.size(), period, exec, jitter, hyper_period, with_jitter);
	return least_solution(dom, arcs);
}

// ---------------------------------------------------------------------------

SchedState::SchedState(const Instance& instance, const DerivedBounds& bounds, DomainWindow window)
	: inst_(instance), bounds_(bounds), window_(window), scheduled_(instance.size(), false),
	  starts_(instance.size()), timeline_(instance.platform.resources)
{
}

Time SchedState::lower_from_predecessors(ActivityId a, std::size_t job) const
{
	Time lb = std::numeric_limits<Time>::min();
	for (auto p : inst_.dag.predecessors(a))
		if (scheduled_[p] && job < starts_[p].size())
			lb = std::max(lb, starts_[p][job] + inst_.activities[p].exec);
	return lb;
}

IntervalSet SchedState::domain(ActivityId a, std::size_t job) const
{
	auto d = initial_domain(inst_, bounds_, a, job, window_);
	if (d.empty())
		return d;
	d.clamp(std::max(d.min(), lower_from_predecessors(a, job)), d.max());
	if (d.empty())
		return d;
	const Time e = inst_.activities[a].exec;
	const Time h = bounds_.hyper_period;
	const auto n = bounds_.job_count[a];
	const auto& line = timeline_[inst_.resource_of(a)];

	// Job [s + shift, s + shift + e) against every busy span that passes keep().
	auto carve = [&](Time shift, auto keep) {
		if (d.empty())
			return;
		Time qlo = d.min() + shift, qhi = d.max() + shift + e;
		auto it = line.lower_bound(qlo);
		if (it != line.begin())
			--it;
		for (; it != line.end() && it->first < qhi; ++it) {
			const auto& b = it->second;
			if (b.end <= qlo || b.activity == a || !keep(b))
				continue;
			d.subtract(it->first - shift - e + 1, b.end - shift - 1);
			if (d.empty())
				return;
		}
	};
	carve(0, [](const Busy&) { return true; });
	if (job == 0)
		carve(h, [&](const Busy& b) { return b.job + 1 == bounds_.job_count[b.activity]; });
	if (job + 1 == n)
		carve(-h, [](const Busy& b) { return b.job == 0; });
	return d;
}

IntervalSet SchedState::domain_naive(ActivityId a, std::size_t job) const
{
	auto d = initial_domain(inst_, bounds_, a, job, window_);
	const auto& act = inst_.activities[a];
	const Time h = bounds_.hyper_period;
	const auto n = bounds_.job_count[a];
	for (auto p : inst_.dag.predecessors(a))
		if (scheduled_[p])
			d.subtract(std::numeric_limits<Time>::min() / 2, starts_[p][job] + inst_.activities[p].exec - 1);
	for (ActivityId l = 0; l < inst_.size(); ++l) {
		if (l == a || !scheduled_[l] || inst_.activities[l].resource != act.resource)
			continue;
		Time el = inst_.activities[l].exec;
		auto nl = starts_[l].size();
		for (std::size_t k = 0; k < nl; ++k) {
			Time s = starts_[l][k];
			d.subtract(s - act.exec + 1, s + el - 1);
			if (job == 0 && k + 1 == nl)
				d.subtract(s - h - act.exec + 1, s - h + el - 1);
			if (job + 1 == n && k == 0)
				d.subtract(s + h - act.exec + 1, s + h + el - 1);
		}
	}
	return d;
}

void SchedState::insert(ActivityId a, std::vector<Time> starts)
{
	if (scheduled_[a])
		throw std::logic_error("activity " + std::to_string(a) + " is already scheduled");
	auto& line = timeline_[inst_.resource_of(a)];
	Time e = inst_.activities[a].exec;
	for (std::size_t j = 0; j < starts.size(); ++j)
		if (!line.emplace(starts[j], Busy{starts[j] + e, a, j}).second)
			throw std::logic_error("two jobs start at the same instant on one resource");
	starts_[a] = std::move(starts);
	scheduled_[a] = true;
	++count_;
}

void SchedState::remove_one(ActivityId a)
{
	if (!scheduled_[a])
		return;
	auto& line = timeline_[inst_.resource_of(a)];
	for (auto s : starts_[a])
		line.erase(s);
	starts_[a].clear();
	scheduled_[a] = false;
	--count_;
}

std::vector<ActivityId> SchedState::unschedule(ActivityId a)
{
	std::vector<ActivityId> removed;
	if (scheduled_[a]) {
		removed.push_back(a);
		remove_one(a);
	}
	for (auto s : inst_.dag.all_successors(a))
		if (scheduled_[s]) {
			removed.push_back(s);
			remove_one(s);
		}
	return removed;
}

std::size_t SchedState::scheduled_successors(ActivityId a) const
{
	const auto& succ = inst_.dag.all_successors(a);
	return static_cast<std::size_t>(std::count_if(succ.begin(), succ.end(), [&](ActivityId s) { return scheduled_[s]; }));
}

Schedule SchedState::schedule() const
{
	Schedule s;
	s.start = starts_;
	s.zero_jitter = zero_jitter_requirements(inst_);
	return s;
}

// ---------------------------------------------------------------------------

bool needs_jitter_arcs(const SchedState& state, ActivityId a)
{
	const auto& act = state.instance().activities[a];
	if (state.bounds().job_count[a] < 2)
		return false;
	auto window = state.window() == DomainWindow::TwoPeriods ? JobWindow::TwoPeriods : JobWindow::OnePeriod;
	return !jitter_redundant(act.jitter, act.period, act.exec, state.bounds().slack[a], window);
}

namespace {

std::optional<std::vector<IntervalSet>> domains_of(const SchedState& state, ActivityId a)
{
	std::vector<IntervalSet> dom;
	auto n = state.bounds().job_count[a];
	dom.reserve(n);
	for (std::size_t j = 0; j < n; ++j) {
		dom.push_back(state.domain(a, j));
		if (dom.back().empty())
			return std::nullopt;
	}
	return dom;
}

// One potential collision between a job of each activity. The first job sits
// at x[u] + shift.
struct Mutual {
	std::size_t u, v;
	Time shift;
	Time eu, ev;

	bool collides(const std::vector<Time>& x) const
	{
		Time a = x[u] + shift;
		return a < x[v] + ev && x[v] < a + eu;
	}
	SubArc u_first() const { return {u, v, shift + eu}; }
	SubArc v_first() const { return {v, u, ev - shift}; }
};

class PairSearch {
public:
	PairSearch(std::vector<IntervalSet> dom, std::vector<SubArc> arcs, std::vector<Mutual> mutual,
	           const SubModelLimits& limits)
		: dom_(std::move(dom)), arcs_(std::move(arcs)), mutual_(std::move(mutual)), limits_(limits)
	{
	}

	std::optional<std::vector<Time>> run()
	{
		dfs();
		return best_;
	}

private:
	std::vector<IntervalSet> dom_;
	std::vector<SubArc> arcs_;
	std::vector<Mutual> mutual_;
	const SubModelLimits& limits_;
	std::optional<std::vector<Time>> best_;
	Time best_sum_ = std::numeric_limits<Time>::max();
	std::size_t nodes_ = 0;
	bool stop_ = false;

	void dfs()
	{
		if (stop_)
			return;
		if (++nodes_ > limits_.pair_nodes ||
		    ((nodes_ & 0x3f) == 0 && (std::chrono::steady_clock::now() > limits_.deadline ||
		                              (limits_.stop && limits_.stop->load())))) {
			stop_ = true;
			return;
		}
		auto x = least_solution(dom_, arcs_);
		if (!x)
			return;
		Time sum = std::accumulate(x->begin(), x->end(), Time{0});
		if (sum >= best_sum_)
			return;
		const Mutual* hit = nullptr;
		Time hit_at = std::numeric_limits<Time>::max();
		for (const auto& m : mutual_)
			if (m.collides(*x)) {
				Time at = std::min((*x)[m.u] + m.shift, (*x)[m.v]);
				if (at < hit_at) {
					hit_at = at;
					hit = &m;
				}
			}
		if (!hit) {
			best_ = std::move(x);
			best_sum_ = sum;
			return;
		}
		Mutual m = *hit;
		bool u_earlier = (*x)[m.u] + m.shift <= (*x)[m.v];
		for (int side = 0; side < 2 && !stop_; ++side) {
			bool u_first = (side == 0) == u_earlier;
			arcs_.push_back(u_first ? m.u_first() : m.v_first());
			dfs();
			arcs_.pop_back();
		}
	}
};

}  // namespace

std::optional<std::vector<Time>> sub_model(const SchedState& state, ActivityId a)
{
	auto dom = domains_of(state, a);
	if (!dom)
		return std::nullopt;
	const auto& act = state.instance().activities[a];
	return min_sum_starts(*dom, act.period, act.exec, act.jitter, state.bounds().hyper_period,
	                      needs_jitter_arcs(state, a));
}

std::optional<std::pair<std::vector<Time>, std::vector<Time>>> sub_model_pair(const SchedState& state, ActivityId a1,
                                                                              ActivityId a2,
                                                                              const SubModelLimits& limits)
{
	const auto& inst = state.instance();
	const Time h = state.bounds().hyper_period;
	auto d1 = domains_of(state, a1);
	auto d2 = domains_of(state, a2);
	if (!d1 || !d2)
		return std::nullopt;
	const std::size_t n1 = d1->size(), n2 = d2->size();
	const auto& x1 = inst.activities[a1];
	const auto& x2 = inst.activities[a2];

	std::vector<IntervalSet> dom = std::move(*d1);
	dom.insert(dom.end(), d2->begin(), d2->end());
	std::vector<SubArc> arcs;
	activity_arcs(arcs, 0, n1, x1.period, x1.exec, x1.jitter, h, needs_jitter_arcs(state, a1));
	activity_arcs(arcs, n1, n2, x2.period, x2.exec, x2.jitter, h, needs_jitter_arcs(state, a2));
	if (inst.dag.has_edge(a1, a2))
		for (std::size_t j = 0; j < std::min(n1, n2); ++j)
			arcs.push_back({j, n1 + j, x1.exec});
	if (inst.dag.has_edge(a2, a1))
		for (std::size_t j = 0; j < std::min(n1, n2); ++j)
			arcs.push_back({n1 + j, j, x2.exec});

	std::vector<Mutual> mutual;
	if (x1.resource == x2.resource) {
		auto maybe = [&](std::size_t u, std::size_t v, Time shift, Time eu, Time ev) {
			Time ulo = dom[u].min() + shift, uhi = dom[u].max() + shift + eu;
			Time vlo = dom[v].min(), vhi = dom[v].max() + ev;
			if (ulo < vhi && vlo < uhi)
				mutual.push_back({u, v, shift, eu, ev});
		};
		for (std::size_t j = 0; j < n1; ++j)
			for (std::size_t k = 0; k < n2; ++k)
				maybe(j, n1 + k, 0, x1.exec, x2.exec);
		maybe(0, n1 + n2 - 1, h, x1.exec, x2.exec);
		maybe(n1, n1 - 1, h, x2.exec, x1.exec);
	}
	auto x = PairSearch(std::move(dom), std::move(arcs), std::move(mutual), limits).run();
	if (!x)
		return std::nullopt;
	return std::make_pair(std::vector<Time>(x->begin(), x->begin() + static_cast<std::ptrdiff_t>(n1)),
	                      std::vector<Time>(x->begin() + static_cast<std::ptrdiff_t>(n1), x->end()));
}

std::pair<Time, Time> priority_key(const DerivedBounds& bounds, ActivityId a)
{
	Time i = bounds.slack[a], j = bounds.inherited_jitter[a];
	return {std::min(i, j), std::max(i, j)};
}

std::optional<ActivityId> choose_unschedule(const SchedState& state, ActivityId a_c)
{
	const auto& inst = state.instance();
	const auto& bounds = state.bounds();
	Time thresh = std::numeric_limits<Time>::max();
	for (const auto& act : inst.activities)
		thresh = std::min(thresh, act.period);
	const auto& preds = inst.dag.all_predecessors(a_c);
	auto resource = inst.resource_of(a_c);

	struct Cand {
		ActivityId id;
		Time jit, inher, slack;
		std::size_t succ;
	};
	std::vector<Cand> cands;
	for (ActivityId l = 0; l < inst.size(); ++l) {
		if (l == a_c || !state.scheduled(l) || inst.resource_of(l) != resource)
			continue;
		if (std::binary_search(preds.begin(), preds.end(), l))
			continue;
		cands.push_back({l, inst.activities[l].jitter, bounds.inherited_jitter[l], bounds.slack[l],
		                 state.scheduled_successors(l)});
	}
	if (cands.empty())
		return std::nullopt;

	// Lexicographic maximum of key, then larger slack, then lower id.
	auto pick = [&](auto filter, auto key) -> std::optional<ActivityId> {
		const Cand* best = nullptr;
		for (const auto& c : cands) {
			if (!filter(c))
				continue;
			if (!best) {
				best = &c;
				continue;
			}
			auto kc = key(c), kb = key(*best);
			if (kc > kb || (kc == kb && (c.slack > best->slack || (c.slack == best->slack && c.id < best->id))))
				best = &c;
		}
		return best ? std::optional<ActivityId>(best->id) : std::nullopt;
	};

	if (auto s1 = pick([&](const Cand& c) { return c.succ == 0 && c.jit >= thresh; },
	                   [](const Cand& c) { return c.slack; }))
		return s1;
	if (auto s2 = pick([&](const Cand& c) { return c.jit >= thresh; },
	                   [](const Cand& c) { return std::make_pair(-static_cast<Time>(c.succ), c.slack); }))
		return s2;
	return pick([](const Cand&) { return true; }, [](const Cand& c) { return std::make_pair(c.inher, c.slack); });
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

class ThreeLevel {
public:
	ThreeLevel(const Instance& inst, const DerivedBounds& bounds, const HeuristicOptions& opt)
		: inst_(inst), bounds_(bounds), opt_(opt), state_(inst, bounds, opt.window),
		  deadline_(Clock::now() + opt.time_limit), in_r_(inst.size(), false), in_scratch_(inst.size(), false)
	{
		for (ActivityId a = 0; a < inst.size(); ++a) {
			auto [k1, k2] = priority_key(bounds, a);
			queue_.insert({k1, k2, a});
		}
		limits_.pair_nodes = opt.pair_nodes;
		limits_.deadline = deadline_;
		limits_.stop = opt.stop;
		std::size_t n = inst.size();
		iteration_limit_ = opt.iteration_limit ? opt.iteration_limit : 50 * n * n + 1000;
	}

	HeuristicResult run()
	{
		auto t0 = Clock::now();
		HeuristicResult res;
		res.status = loop(res.reason);
		if (res.status == HeuristicStatus::Feasible)
			res.schedule = state_.schedule();
		stats_.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
		res.stats = stats_;
		return res;
	}

private:
	using Key = std::tuple<Time, Time, ActivityId>;

	bool expired() const { return Clock::now() > deadline_ || (opt_.stop && opt_.stop->load()); }

	const Instance& inst_;
	const DerivedBounds& bounds_;
	const HeuristicOptions& opt_;
	SchedState state_;
	Clock::time_point deadline_;
	SubModelLimits limits_;
	std::set<Key> queue_;
	std::vector<bool> in_r_, in_scratch_;
	std::set<std::pair<ActivityId, ActivityId>> level3_pairs_;
	std::optional<ActivityId> retry_;
	std::size_t iteration_limit_ = 0;
	HeuristicStats stats_;

	Key key_of(ActivityId a) const
	{
		auto [k1, k2] = priority_key(bounds_, a);
		return {k1, k2, a};
	}

	bool ready(ActivityId a) const
	{
		for (auto p : inst_.dag.predecessors(a))
			if (!state_.scheduled(p))
				return false;
		return true;
	}

	std::optional<ActivityId> pop()
	{
		if (retry_ && !state_.scheduled(*retry_) && ready(*retry_)) {
			auto a = *retry_;
			retry_.reset();
			queue_.erase(key_of(a));
			return a;
		}
		retry_.reset();
		for (auto it = queue_.begin(); it != queue_.end(); ++it) {
			auto a = std::get<2>(*it);
			if (ready(a)) {
				queue_.erase(it);
				return a;
			}
		}
		return std::nullopt;
	}

	void place(ActivityId a, std::vector<Time> starts)
	{
		state_.insert(a, std::move(starts));
		queue_.erase(key_of(a));
		check_domains();
	}

	void drop(const std::vector<ActivityId>& removed)
	{
		for (auto r : removed)
			queue_.insert(key_of(r));
		stats_.unschedules += removed.size();
		check_domains();
	}

	void check_domains()
	{
		if (!opt_.debug_domains)
			return;
		for (ActivityId a = 0; a < inst_.size(); ++a) {
			if (state_.scheduled(a))
				continue;
			for (std::size_t j = 0; j < bounds_.job_count[a]; ++j) {
				++stats_.domain_checks;
				if (!(state_.domain(a, j) == state_.domain_naive(a, j)))
					throw std::logic_error("incremental domain of activity " + std::to_string(a) + " job " +
					                       std::to_string(j) + " differs from the naive derivation");
			}
		}
	}

	// Keeps only Scratch members and the predecessors of the given
	// activities, closed under predecessors.
	void reset_to_scratch(std::initializer_list<ActivityId> anchors)
	{
		std::vector<bool> keep(inst_.size(), false);
		for (ActivityId a = 0; a < inst_.size(); ++a)
			keep[a] = in_scratch_[a];
		for (auto x : anchors)
			for (auto p : inst_.dag.all_predecessors(x))
				keep[p] = true;
		for (auto a : inst_.dag.topological_order()) {
			if (!state_.scheduled(a))
				keep[a] = false;
			for (auto p : inst_.dag.predecessors(a))
				if (!keep[p])
					keep[a] = false;
		}
		std::vector<ActivityId> removed;
		for (ActivityId a = 0; a < inst_.size(); ++a)
			if (state_.scheduled(a) && !keep[a]) {
				state_.remove_one(a);
				removed.push_back(a);
			}
		drop(removed);
	}

	void add_scratch(ActivityId a)
	{
		in_scratch_[a] = true;
		for (auto p : inst_.dag.all_predecessors(a))
			in_scratch_[p] = true;
	}

	bool level3_allowed(ActivityId a, ActivityId b)
	{
		if (!level3_pairs_.insert({std::min(a, b), std::max(a, b)}).second)
			return false;
		return stats_.level3 < inst_.size() * inst_.size() + 1;
	}

	HeuristicStatus loop(std::string& reason)
	{
		while (state_.scheduled_count() < inst_.size()) {
			if (++stats_.iterations > iteration_limit_) {
				reason = "iteration limit reached";
				return HeuristicStatus::Fail;
			}
			if (expired()) {
				reason = "time limit reached";
				return HeuristicStatus::Timeout;
			}
			auto next = pop();
			if (!next)
				throw std::logic_error("no ready activity although the schedule is incomplete");
			ActivityId a_c = *next;

			if (auto s = sub_model(state_, a_c)) {
				++stats_.level1;
				place(a_c, std::move(*s));
				continue;
			}

			auto a_u = choose_unschedule(state_, a_c);
			if (!a_u) {
				// Nothing on the resource may go: restart near scratch for a_c alone.
				if (!level3_allowed(a_c, a_c)) {
					reason = "activity " + std::to_string(a_c) + " cannot be placed";
					return HeuristicStatus::Fail;
				}
				++stats_.level3;
				reset_to_scratch({a_c});
				auto s = sub_model(state_, a_c);
				if (!s) {
					reason = "activity " + std::to_string(a_c) + " cannot be placed from scratch";
					return HeuristicStatus::Fail;
				}
				place(a_c, std::move(*s));
				add_scratch(a_c);
				continue;
			}

			drop(state_.unschedule(*a_u));
			queue_.insert(key_of(a_c));
			bool problematic = in_r_[*a_u];
			in_r_[a_c] = true;
			if (!problematic) {
				retry_ = a_c;
				continue;
			}

			if (auto s = sub_model_pair(state_, a_c, *a_u, limits_)) {
				++stats_.level2;
				place(a_c, std::move(s->first));
				place(*a_u, std::move(s->second));
				continue;
			}

			if (!level3_allowed(a_c, *a_u)) {
				reason = "pair " + std::to_string(a_c) + ", " + std::to_string(*a_u) + " failed twice from scratch";
				return HeuristicStatus::Fail;
			}
			++stats_.level3;
			reset_to_scratch({a_c, *a_u});
			auto s = sub_model_pair(state_, a_c, *a_u, limits_);
			if (!s) {
				reason = "pair " + std::to_string(a_c) + ", " + std::to_string(*a_u) + " cannot be placed";
				return expired() ? HeuristicStatus::Timeout : HeuristicStatus::Fail;
			}
			place(a_c, std::move(s->first));
			place(*a_u, std::move(s->second));
			add_scratch(a_c);
			add_scratch(*a_u);
		}
		return HeuristicStatus::Feasible;
	}
};

}  // namespace

HeuristicResult run_3ls(const Instance& instance, const HeuristicOptions& options)
{
	if (!instance.is_mapped())
		throw ModelError("instance must be mapped before scheduling");
	Instance inst = instance;
	if (options.mode == ScheduleMode::ZeroJitter)
		for (auto& a : inst.activities)
			a.jitter = 0;
	auto bounds = derive_bounds(inst);
	for (ActivityId a = 0; a < inst.size(); ++a)
		for (std::size_t j = 0; j < bounds.job_count[a]; ++j)
			if (initial_domain(inst, bounds, a, j, options.window).empty()) {
				HeuristicResult r;
				r.reason = "empty initial domain for activity " + std::to_string(a);
				return r;
			}
	return ThreeLevel(inst, bounds, options).run();
}

}  // namespace ttsched
