#include <algorithm>
#include <limits>
#include <map>
#include <tuple>

#include "ttsched/exact_solver.hpp"

namespace ttsched {

const char* to_string(SolveStatus status)
{
	switch (status) {
	case SolveStatus::Feasible: return "feasible";
	case SolveStatus::Infeasible: return "infeasible";
	case SolveStatus::Timeout: return "timeout";
	}
	return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

struct Arc {
	VarId from, to;
	Time w;
};

enum class Outcome { Ok, Fail, Stop };

constexpr Time minus_inf = std::numeric_limits<Time>::min() / 4;

// Theta-Lambda tree over tasks ordered by earliest start (Vilim). White
// leaves are in Theta, gray leaves in Lambda.
class ThetaLambda {
public:
	static constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

	void reset(std::size_t n)
	{
		size_ = 1;
		while (size_ < n)
			size_ *= 2;
		nodes_.assign(2 * size_, Node{});
	}

	void set_white(std::size_t leaf, Time est, Time p) { set(leaf, {p, est + p, p, est + p, none, none}); }
	void set_gray(std::size_t leaf, Time est, Time p) { set(leaf, {0, minus_inf, p, est + p, leaf, leaf}); }
	void clear(std::size_t leaf) { set(leaf, Node{}); }

	Time ect() const { return nodes_[1].ect; }
	Time ect_bar() const { return nodes_[1].ect_bar; }
	std::size_t responsible() const { return nodes_[1].resp_ect; }

private:
	struct Node {
		Time sum = 0, ect = minus_inf, sum_bar = 0, ect_bar = minus_inf;
		std::size_t resp_sum = none, resp_ect = none;
	};
	std::size_t size_ = 1;
	std::vector<Node> nodes_;

	void set(std::size_t leaf, const Node& value)
	{
		std::size_t i = size_ + leaf;
		nodes_[i] = value;
		for (i /= 2; i >= 1; i /= 2)
			nodes_[i] = combine(nodes_[2 * i], nodes_[2 * i + 1]);
	}

	static Node combine(const Node& l, const Node& r)
	{
		Node x;
		x.sum = l.sum + r.sum;
		x.ect = std::max(r.ect, l.ect + r.sum);
		if (l.sum_bar + r.sum >= l.sum + r.sum_bar) {
			x.sum_bar = l.sum_bar + r.sum;
			x.resp_sum = l.resp_sum;
		} else {
			x.sum_bar = l.sum + r.sum_bar;
			x.resp_sum = r.resp_sum;
		}
		x.ect_bar = r.ect_bar;
		x.resp_ect = r.resp_ect;
		if (l.ect + r.sum_bar > x.ect_bar) {
			x.ect_bar = l.ect + r.sum_bar;
			x.resp_ect = r.resp_sum;
		}
		if (l.ect_bar + r.sum > x.ect_bar) {
			x.ect_bar = l.ect_bar + r.sum;
			x.resp_ect = l.resp_ect;
		}
		return x;
	}
};

// One job on a resource: start = x[var] + offset, duration p.
struct DisjTask {
	VarId var;
	Time offset, p;
};

// Jobs of every resource with two or more jobs.
std::vector<std::vector<DisjTask>> resource_tasks(const BuiltModel& model)
{
	std::map<ResourceId, std::vector<DisjTask>> on;
	for (ActivityId a = 0; a < model.jobs.size(); ++a)
		for (const auto& r : model.jobs[a])
			on[model.resource[a]].push_back({r.var, r.offset, model.exec[a]});
	std::vector<std::vector<DisjTask>> out;
	for (auto& [res, list] : on)
		if (list.size() >= 2)
			out.push_back(std::move(list));
	return out;
}

std::vector<std::vector<std::size_t>> resources_of_vars(const std::vector<std::vector<DisjTask>>& tasks,
                                                        std::size_t n)
{
	std::vector<std::vector<std::size_t>> of(n);
	for (std::size_t r = 0; r < tasks.size(); ++r)
		for (const auto& t : tasks[r])
			if (of[t.var].empty() || of[t.var].back() != r)
				of[t.var].push_back(r);
	return of;
}

// Overload checking and edge finding (Vilim) over one resource. load() takes
// the time windows, negated for the mirrored pass that tightens latest
// completions; run() reports each raised earliest start to tighten(i, t) and
// returns false on overload or when tighten does.
class EdgeFinder {
public:
	template <class Lb, class Ub>
	void load(const std::vector<DisjTask>& tasks, bool mirrored, Lb lb, Ub ub)
	{
		const std::size_t n = tasks.size();
		est_.resize(n);
		lct_.resize(n);
		for (std::size_t i = 0; i < n; ++i) {
			const auto& t = tasks[i];
			Time lo = lb(t.var) + t.offset, hi = ub(t.var) + t.offset + t.p;
			est_[i] = mirrored ? -hi : lo;
			lct_[i] = mirrored ? -lo : hi;
		}
	}

	template <class Tighten>
	bool run(const std::vector<DisjTask>& tasks, Tighten tighten)
	{
		const std::size_t n = tasks.size();
		bound_ = est_;
		by_est_.resize(n);
		by_lct_.resize(n);
		rank_.resize(n);
		for (std::size_t i = 0; i < n; ++i)
			by_est_[i] = by_lct_[i] = i;
		std::sort(by_est_.begin(), by_est_.end(), [&](auto x, auto y) { return est_[x] < est_[y]; });
		std::sort(by_lct_.begin(), by_lct_.end(), [&](auto x, auto y) { return lct_[x] > lct_[y]; });
		tree_.reset(n);
		for (std::size_t k = 0; k < n; ++k) {
			rank_[by_est_[k]] = k;
			tree_.set_white(k, est_[by_est_[k]], tasks[by_est_[k]].p);
		}
		for (std::size_t q = 0; q < n; ++q) {
			std::size_t j = by_lct_[q];
			if (tree_.ect() > lct_[j])
				return false;
			while (tree_.ect_bar() > lct_[j]) {
				std::size_t leaf = tree_.responsible();
				std::size_t i = by_est_[leaf];
				bound_[i] = std::max(bound_[i], tree_.ect());
				tree_.clear(leaf);
			}
			tree_.set_gray(rank_[j], est_[j], tasks[j].p);
		}
		for (std::size_t i = 0; i < n; ++i)
			if (bound_[i] > est_[i] && !tighten(i, bound_[i]))
				return false;
		return true;
	}

private:
	ThetaLambda tree_;
	std::vector<Time> est_, lct_, bound_;
	std::vector<std::size_t> by_est_, by_lct_, rank_;
};

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// Node budget of restart k under BranchRule::Alternating.
std::size_t restart_budget(std::size_t k)
{
	return std::size_t{256} << std::min<std::size_t>(k / 2, 40);
}

BranchRule restart_rule(std::size_t k)
{
	return k % 2 == 0 ? BranchRule::MinSlack : BranchRule::WindowOrder;
}

constexpr Time plus_inf = std::numeric_limits<Time>::max() / 4;

// All resource pairs between the same two variables, merged into one
// constraint on d = x[v] - x[u]: d avoids every gap. Zero-jitter models put
// many pairs on one variable pair; job-level models mostly one.
struct Group {
	VarId u, v;
	std::vector<std::pair<Time, Time>> gaps;  // sorted, disjoint, closed
};

std::vector<Group> make_groups(const BuiltModel& model)
{
	std::map<std::pair<VarId, VarId>, std::vector<std::pair<Time, Time>>> by_vars;
	for (const auto& rp : model.pairs) {
		// Forbidden: -b_first < x[v] - x[u] < a_first.
		Time lo = -rp.b_first + 1, hi = rp.a_first - 1;
		if (lo > hi)
			continue;
		if (rp.u < rp.v)
			by_vars[{rp.u, rp.v}].push_back({lo, hi});
		else
			by_vars[{rp.v, rp.u}].push_back({-hi, -lo});
	}
	std::vector<Group> groups;
	for (auto& [key, gaps] : by_vars) {
		std::sort(gaps.begin(), gaps.end());
		Group g{key.first, key.second, {}};
		for (auto [lo, hi] : gaps) {
			if (!g.gaps.empty() && lo <= g.gaps.back().second + 1)
				g.gaps.back().second = std::max(g.gaps.back().second, hi);
			else
				g.gaps.push_back({lo, hi});
		}
		groups.push_back(std::move(g));
	}
	return groups;
}

// Index of the gap holding d, or npos.
std::size_t gap_at(const Group& g, Time d)
{
	auto it = std::upper_bound(g.gaps.begin(), g.gaps.end(), d,
	                           [](Time x, const std::pair<Time, Time>& gap) { return x < gap.first; });
	if (it == g.gaps.begin())
		return npos;
	--it;
	return d <= it->second ? static_cast<std::size_t>(it - g.gaps.begin()) : npos;
}

// Precedence-constraint posting over a simple temporal network. Every node
// keeps lb/ub of all variables consistent with the arcs, the gap constraints
// and edge finding; a node whose earliest-start schedule puts no difference
// in a gap is a solution.
class SparseSearch {
public:
	SparseSearch(const BuiltModel& model, const SolveLimits& limits)
		: model_(model), limits_(limits), n_(model.vars.size()), lb_(n_), ub_(n_), out_(n_), in_(n_),
		  groups_(make_groups(model)), groups_of_(n_), fwd_len_(n_, 0), bwd_len_(n_, 0), fwd_stamp_(n_, 0),
		  bwd_stamp_(n_, 0), in_queue_(n_, 0), dirty_mark_(groups_.size(), 0), dlo_(groups_.size(), -plus_inf),
		  dhi_(groups_.size(), plus_inf), deadline_(Clock::now() + limits.time_limit)
	{
		for (VarId v = 0; v < n_; ++v) {
			lb_[v] = model.vars[v].lb;
			ub_[v] = model.vars[v].ub;
		}
		for (const auto& a : model.arcs) {
			out_[a.from].push_back(arcs_.size());
			in_[a.to].push_back(arcs_.size());
			arcs_.push_back({a.from, a.to, a.weight});
		}
		for (std::size_t g = 0; g < groups_.size(); ++g) {
			groups_of_[groups_[g].u].push_back(g);
			groups_of_[groups_[g].v].push_back(g);
		}
		if (limits.edge_finding)
			make_resources();
	}

	SolveResult run()
	{
		auto t0 = Clock::now();
		SolveResult res;
		bool bounds_ok = std::all_of(model_.vars.begin(), model_.vars.end(),
		                             [](const JobVar& v) { return v.lb <= v.ub; });
		Outcome o = Outcome::Fail;
		if (bounds_ok) {
			for (VarId v = 0; v < n_; ++v)
				push(v, 3);
			for (std::size_t g = 0; g < groups_.size(); ++g)
				mark_dirty(g);
			for (std::size_t r = 0; r < tasks_.size(); ++r)
				mark_resource(r);
			o = propagate();
			if (o == Outcome::Ok) {
				auto root = checkpoint();
				o = search_with_restarts([&] { restore(root); });
			}
		}
		if (o == Outcome::Ok) {
			res.status = SolveStatus::Feasible;
			res.schedule = extract();
		} else {
			res.status = o == Outcome::Stop ? SolveStatus::Timeout : SolveStatus::Infeasible;
		}
		stats_.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
		res.stats = stats_;
		return res;
	}

private:
	const BuiltModel& model_;
	const SolveLimits& limits_;
	std::size_t n_;
	std::vector<Time> lb_, ub_;
	std::vector<Arc> arcs_;
	std::vector<std::vector<std::size_t>> out_, in_;
	std::vector<Group> groups_;
	std::vector<std::vector<std::size_t>> groups_of_;
	// Path lengths behind the current bound values; a length of n or more
	// reveals a positive cycle.
	std::vector<std::size_t> fwd_len_, bwd_len_;
	std::vector<std::uint64_t> fwd_stamp_, bwd_stamp_;
	std::uint64_t stamp_ = 1;
	std::vector<VarId> queue_;
	std::vector<unsigned char> in_queue_;  // bit 1: lb changed, bit 2: ub changed
	std::vector<std::size_t> dirty_;
	std::vector<unsigned char> dirty_mark_;
	std::vector<Time> dlo_, dhi_;  // current range of each group's difference
	std::vector<std::vector<DisjTask>> tasks_;  // per resource with two or more jobs
	std::vector<std::vector<std::size_t>> resources_of_;
	std::vector<std::size_t> res_dirty_;
	std::vector<unsigned char> res_mark_;
	EdgeFinder ef_;

	struct BoundChange {
		VarId var;
		Time lb, ub;
	};
	std::vector<BoundChange> trail_;
	struct RangeChange {
		std::size_t group;
		Time lo, hi;
	};
	std::vector<RangeChange> range_trail_;

	SolveStats stats_;
	Clock::time_point deadline_;
	bool stopped_ = false;
	BranchRule rule_ = BranchRule::MinSlack;
	std::size_t budget_end_ = std::numeric_limits<std::size_t>::max();
	bool budget_hit_ = false;

	template <class Restore>
	Outcome search_with_restarts(Restore back_to_root)
	{
		if (limits_.branching != BranchRule::Alternating) {
			rule_ = limits_.branching;
			return dfs();
		}
		for (std::size_t k = 0;; ++k) {
			rule_ = restart_rule(k);
			budget_end_ = stats_.nodes + restart_budget(k);
			budget_hit_ = false;
			Outcome o = dfs();
			if (o != Outcome::Stop || !budget_hit_ || stopped_)
				return o;
			back_to_root();
		}
	}

	void make_resources()
	{
		tasks_ = resource_tasks(model_);
		resources_of_ = resources_of_vars(tasks_, n_);
		res_mark_.assign(tasks_.size(), 0);
	}

	void mark_resource(std::size_t r)
	{
		if (!res_mark_[r]) {
			res_mark_[r] = 1;
			res_dirty_.push_back(r);
		}
	}

	void push(VarId v, unsigned char bits)
	{
		if (!in_queue_[v])
			queue_.push_back(v);
		in_queue_[v] |= bits;
	}

	void mark_dirty(std::size_t g)
	{
		if (!dirty_mark_[g]) {
			dirty_mark_[g] = 1;
			dirty_.push_back(g);
		}
	}

	bool check_time()
	{
		if (stopped_)
			return false;
		if (Clock::now() > deadline_ || stats_.nodes > limits_.node_limit || (limits_.stop && limits_.stop->load()))
			stopped_ = true;
		return !stopped_;
	}

	std::size_t& fwd_len(VarId v)
	{
		if (fwd_stamp_[v] != stamp_) {
			fwd_stamp_[v] = stamp_;
			fwd_len_[v] = 0;
		}
		return fwd_len_[v];
	}

	std::size_t& bwd_len(VarId v)
	{
		if (bwd_stamp_[v] != stamp_) {
			bwd_stamp_[v] = stamp_;
			bwd_len_[v] = 0;
		}
		return bwd_len_[v];
	}

	void clear_queues()
	{
		for (auto v : queue_)
			in_queue_[v] = 0;
		queue_.clear();
		for (auto g : dirty_)
			dirty_mark_[g] = 0;
		dirty_.clear();
		for (auto r : res_dirty_)
			res_mark_[r] = 0;
		res_dirty_.clear();
	}

	void touched(VarId v)
	{
		for (auto g : groups_of_[v])
			mark_dirty(g);
		if (!resources_of_.empty())
			for (auto r : resources_of_[v])
				mark_resource(r);
	}

	bool raise_lb(VarId v, Time value, std::size_t len)
	{
		trail_.push_back({v, lb_[v], ub_[v]});
		lb_[v] = value;
		fwd_len(v) = len;
		if (value > ub_[v] || len >= n_)
			return false;
		push(v, 1);
		touched(v);
		return true;
	}

	bool lower_ub(VarId v, Time value, std::size_t len)
	{
		trail_.push_back({v, lb_[v], ub_[v]});
		ub_[v] = value;
		bwd_len(v) = len;
		if (value < lb_[v] || len >= n_)
			return false;
		push(v, 2);
		touched(v);
		return true;
	}

	void set_range(std::size_t g, Time lo, Time hi)
	{
		range_trail_.push_back({g, dlo_[g], dhi_[g]});
		dlo_[g] = lo;
		dhi_[g] = hi;
	}

	bool propagate_group(std::size_t gi)
	{
		const auto& g = groups_[gi];
		VarId u = g.u, v = g.v;
		Time lo = std::max(dlo_[gi], lb_[v] - ub_[u]);
		Time hi = std::min(dhi_[gi], ub_[v] - lb_[u]);
		if (auto k = gap_at(g, lo); k != npos)
			lo = g.gaps[k].second + 1;
		if (auto k = gap_at(g, hi); k != npos)
			hi = g.gaps[k].first - 1;
		if (lo > hi)
			return false;
		if (lo != dlo_[gi] || hi != dhi_[gi])
			set_range(gi, lo, hi);
		if (lb_[u] + lo > lb_[v] && !raise_lb(v, lb_[u] + lo, fwd_len(u) + 1))
			return false;
		if (ub_[v] - lo < ub_[u] && !lower_ub(u, ub_[v] - lo, bwd_len(v) + 1))
			return false;
		if (lb_[v] - hi > lb_[u] && !raise_lb(u, lb_[v] - hi, fwd_len(v) + 1))
			return false;
		if (ub_[u] + hi < ub_[v] && !lower_ub(v, ub_[u] + hi, bwd_len(u) + 1))
			return false;
		return true;
	}

	Outcome propagate()
	{
		++stamp_;
		std::size_t head = 0;
		for (;;) {
			while (head < queue_.size()) {
				VarId v = queue_[head++];
				unsigned char bits = in_queue_[v];
				in_queue_[v] = 0;
				if ((++stats_.propagations & 0x3fff) == 0 && !check_time()) {
					clear_queues();
					return Outcome::Stop;
				}
				if (bits & 1) {
					std::size_t len = fwd_len(v) + 1;
					for (auto ai : out_[v]) {
						const auto& a = arcs_[ai];
						Time nl = lb_[v] + a.w;
						if (nl > lb_[a.to] && !raise_lb(a.to, nl, len)) {
							clear_queues();
							return Outcome::Fail;
						}
					}
				}
				if (bits & 2) {
					std::size_t len = bwd_len(v) + 1;
					for (auto ai : in_[v]) {
						const auto& a = arcs_[ai];
						Time nu = ub_[v] - a.w;
						if (nu < ub_[a.from] && !lower_ub(a.from, nu, len)) {
							clear_queues();
							return Outcome::Fail;
						}
					}
				}
				if (head > 4096 && head * 2 > queue_.size()) {
					queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(head));
					head = 0;
				}
			}
			queue_.clear();
			head = 0;
			if (!dirty_.empty()) {
				auto pending = std::move(dirty_);
				dirty_.clear();
				for (auto g : pending)
					dirty_mark_[g] = 0;
				for (auto g : pending)
					if (!propagate_group(g)) {
						clear_queues();
						return Outcome::Fail;
					}
				continue;
			}
			if (res_dirty_.empty())
				return Outcome::Ok;
			auto pending = std::move(res_dirty_);
			res_dirty_.clear();
			for (auto r : pending)
				res_mark_[r] = 0;
			for (auto r : pending)
				if (!edge_find(r, false) || !edge_find(r, true)) {
					clear_queues();
					return Outcome::Fail;
				}
		}
	}

	bool edge_find(std::size_t r, bool mirrored)
	{
		const auto& tasks = tasks_[r];
		ef_.load(tasks, mirrored, [&](VarId v) { return lb_[v]; }, [&](VarId v) { return ub_[v]; });
		return ef_.run(tasks, [&](std::size_t i, Time bound) {
			const auto& t = tasks[i];
			if (!mirrored) {
				Time v = bound - t.offset;
				return v <= lb_[t.var] || raise_lb(t.var, v, 0);
			}
			Time v = -bound - t.p - t.offset;
			return v >= ub_[t.var] || lower_ub(t.var, v, 0);
		});
	}

	struct Checkpoint {
		std::size_t trail, ranges;
	};

	Checkpoint checkpoint() const { return {trail_.size(), range_trail_.size()}; }

	void restore(const Checkpoint& cp)
	{
		while (trail_.size() > cp.trail) {
			const auto& c = trail_.back();
			lb_[c.var] = c.lb;
			ub_[c.var] = c.ub;
			trail_.pop_back();
		}
		while (range_trail_.size() > cp.ranges) {
			const auto& c = range_trail_.back();
			dlo_[c.group] = c.lo;
			dhi_[c.group] = c.hi;
			range_trail_.pop_back();
		}
	}

	// Branch: 1 moves the difference above the gap, 2 below it.
	struct Choice {
		std::size_t group = npos;
		std::size_t gap = npos;
		unsigned char first = 1;
	};

	// The group whose earliest-start difference sits in a gap and is most
	// constrained, or npos when the earliest-start schedule is conflict-free.
	Choice select() const
	{
		Choice best;
		if (rule_ == BranchRule::MinSlack) {
			Time best_key = std::numeric_limits<Time>::max();
			for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
				const auto& g = groups_[gi];
				auto k = gap_at(g, lb_[g.v] - lb_[g.u]);
				if (k == npos)
					continue;
				Time up = dhi_[gi] - g.gaps[k].second - 1;
				Time down = g.gaps[k].first - 1 - dlo_[gi];
				Time key = std::min(up, down);
				if (key < best_key) {
					best_key = key;
					best = {gi, k, static_cast<unsigned char>(up >= down ? 1 : 2)};
				}
			}
		} else {
			std::tuple<Time, Time> best_key{std::numeric_limits<Time>::max(), 0};
			for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
				const auto& g = groups_[gi];
				auto k = gap_at(g, lb_[g.v] - lb_[g.u]);
				if (k == npos)
					continue;
				Time width = std::min(ub_[g.u] - lb_[g.u], ub_[g.v] - lb_[g.v]);
				Time period =
				    std::min(model_.period[model_.vars[g.u].activity], model_.period[model_.vars[g.v].activity]);
				std::tuple<Time, Time> key{width, period};
				if (key < best_key) {
					best_key = key;
					// Earliest first: u before v pushes the difference up.
					best = {gi, k, static_cast<unsigned char>(lb_[g.u] <= lb_[g.v] ? 1 : 2)};
				}
			}
		}
		return best;
	}

	Outcome dfs()
	{
		++stats_.nodes;
		if ((stats_.nodes & 0xff) == 0 && !check_time())
			return Outcome::Stop;
		if (stopped_ || budget_hit_)
			return Outcome::Stop;
		if (stats_.nodes > budget_end_) {
			budget_hit_ = true;
			return Outcome::Stop;
		}
		auto c = select();
		if (c.group == npos)
			return Outcome::Ok;
		const auto& gap = groups_[c.group].gaps[c.gap];
		for (unsigned char side : {c.first, static_cast<unsigned char>(3 - c.first)}) {
			auto cp = checkpoint();
			++stats_.decisions;
			if (side == 1)
				set_range(c.group, gap.second + 1, dhi_[c.group]);
			else
				set_range(c.group, dlo_[c.group], gap.first - 1);
			mark_dirty(c.group);
			Outcome o = propagate();
			if (o == Outcome::Ok)
				o = dfs();
			if (o != Outcome::Fail)
				return o;
			restore(cp);
		}
		return Outcome::Fail;
	}

	Schedule extract() const
	{
		Schedule s;
		s.start.resize(model_.jobs.size());
		for (std::size_t a = 0; a < model_.jobs.size(); ++a)
			for (const auto& r : model_.jobs[a])
				s.start[a].push_back(lb_[r.var] + r.offset);
		s.zero_jitter = model_.zero_jitter_flags;
		return s;
	}
};

// Same search with path consistency: L[i][j] is the longest known path from
// i to j, a lower bound on x[j] - x[i]. Node n is the time origin, so
// variable bounds live in the matrix as well. Gap constraints read exact
// difference ranges instead of variable-bound estimates.
class DenseSearch {
public:
	DenseSearch(const BuiltModel& model, const SolveLimits& limits)
		: model_(model), limits_(limits), n_(model.vars.size()), dim_(n_ + 1),
		  dist_(dim_ * dim_, minus_inf), groups_(make_groups(model)), deadline_(Clock::now() + limits.time_limit)
	{
		if (limits.edge_finding)
			tasks_ = resource_tasks(model);
	}

	SolveResult run()
	{
		auto t0 = Clock::now();
		SolveResult res;
		Outcome o = init() ? propagate() : Outcome::Fail;
		if (o == Outcome::Ok) {
			auto root = trail_.size();
			o = search_with_restarts([&] { restore(root); });
		}
		if (o == Outcome::Ok) {
			res.status = SolveStatus::Feasible;
			res.schedule = extract();
		} else {
			res.status = o == Outcome::Stop ? SolveStatus::Timeout : SolveStatus::Infeasible;
		}
		stats_.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
		res.stats = stats_;
		return res;
	}

private:
	const BuiltModel& model_;
	const SolveLimits& limits_;
	std::size_t n_, dim_;
	std::vector<Time> dist_;
	std::vector<Group> groups_;
	std::vector<std::vector<DisjTask>> tasks_;
	EdgeFinder ef_;
	std::vector<std::pair<std::size_t, Time>> trail_;
	std::vector<std::size_t> rows_, cols_;
	SolveStats stats_;
	Clock::time_point deadline_;
	bool stopped_ = false;
	BranchRule rule_ = BranchRule::MinSlack;
	std::size_t budget_end_ = std::numeric_limits<std::size_t>::max();
	bool budget_hit_ = false;

	template <class Restore>
	Outcome search_with_restarts(Restore back_to_root)
	{
		if (limits_.branching != BranchRule::Alternating) {
			rule_ = limits_.branching;
			return dfs();
		}
		for (std::size_t k = 0;; ++k) {
			rule_ = restart_rule(k);
			budget_end_ = stats_.nodes + restart_budget(k);
			budget_hit_ = false;
			Outcome o = dfs();
			if (o != Outcome::Stop || !budget_hit_ || stopped_)
				return o;
			back_to_root();
		}
	}

	Time& at(std::size_t i, std::size_t j) { return dist_[i * dim_ + j]; }
	Time at(std::size_t i, std::size_t j) const { return dist_[i * dim_ + j]; }
	Time lb(VarId v) const { return at(n_, v); }
	Time ub(VarId v) const { return -at(v, n_); }

	bool check_time()
	{
		if (!stopped_ &&
		    (Clock::now() > deadline_ || stats_.nodes > limits_.node_limit || (limits_.stop && limits_.stop->load())))
			stopped_ = true;
		return !stopped_;
	}

	// Floyd-Warshall closure of the model arcs and windows.
	bool init()
	{
		const std::size_t o = n_;
		for (std::size_t i = 0; i < dim_; ++i)
			at(i, i) = 0;
		for (VarId v = 0; v < n_; ++v) {
			if (model_.vars[v].lb > model_.vars[v].ub)
				return false;
			at(o, v) = model_.vars[v].lb;
			at(v, o) = -model_.vars[v].ub;
		}
		for (const auto& a : model_.arcs)
			at(a.from, a.to) = std::max(at(a.from, a.to), a.weight);
		for (std::size_t k = 0; k < dim_; ++k) {
			if ((k & 31) == 0 && !check_time())
				return true;  // run() reports the timeout from propagate()
			const Time* rk = &dist_[k * dim_];
			for (std::size_t i = 0; i < dim_; ++i) {
				Time ik = at(i, k);
				if (ik == minus_inf)
					continue;
				Time* ri = &dist_[i * dim_];
				for (std::size_t j = 0; j < dim_; ++j)
					if (rk[j] != minus_inf && ik + rk[j] > ri[j])
						ri[j] = ik + rk[j];
			}
		}
		for (std::size_t i = 0; i < dim_; ++i)
			if (at(i, i) > 0)
				return false;
		return true;
	}

	// Posts x[v] >= x[u] + w and restores closure in O(n^2).
	bool add(std::size_t u, std::size_t v, Time w)
	{
		if (at(u, v) >= w)
			return true;
		if (at(v, u) + w > 0)
			return false;
		rows_.clear();
		cols_.clear();
		for (std::size_t i = 0; i < dim_; ++i)
			if (at(i, u) + w > at(i, v))
				rows_.push_back(i);
		for (std::size_t j = 0; j < dim_; ++j)
			if (w + at(v, j) > at(u, j))
				cols_.push_back(j);
		const Time* rv = &dist_[v * dim_];
		for (auto i : rows_) {
			Time base = at(i, u) + w;
			Time* ri = &dist_[i * dim_];
			for (auto j : cols_) {
				Time c = base + rv[j];
				if (c > ri[j]) {
					trail_.push_back({i * dim_ + j, ri[j]});
					ri[j] = c;
				}
			}
		}
		++stats_.propagations;
		return true;
	}

	Outcome propagate()
	{
		for (;;) {
			if (!check_time())
				return Outcome::Stop;
			bool changed = false;
			for (const auto& g : groups_) {
				Time lo = at(g.u, g.v), hi = -at(g.v, g.u);
				Time nlo = lo, nhi = hi;
				if (auto k = gap_at(g, nlo); k != npos)
					nlo = g.gaps[k].second + 1;
				if (auto k = gap_at(g, nhi); k != npos)
					nhi = g.gaps[k].first - 1;
				if (nlo > nhi)
					return Outcome::Fail;
				if (nlo > lo) {
					if (!add(g.u, g.v, nlo))
						return Outcome::Fail;
					changed = true;
				}
				if (nhi < hi) {
					if (!add(g.v, g.u, -nhi))
						return Outcome::Fail;
					changed = true;
				}
			}
			if (changed)
				continue;
			for (const auto& tasks : tasks_) {
				for (bool mirrored : {false, true}) {
					ef_.load(tasks, mirrored, [&](VarId v) { return lb(v); }, [&](VarId v) { return ub(v); });
					bool ok = ef_.run(tasks, [&](std::size_t i, Time bound) {
						const auto& t = tasks[i];
						if (!mirrored) {
							Time v = bound - t.offset;
							if (v <= lb(t.var))
								return true;
							changed = true;
							return add(n_, t.var, v);
						}
						Time v = -bound - t.p - t.offset;
						if (v >= ub(t.var))
							return true;
						changed = true;
						return add(t.var, n_, -v);
					});
					if (!ok)
						return Outcome::Fail;
				}
			}
			if (!changed)
				return Outcome::Ok;
		}
	}

	struct Choice {
		std::size_t group = npos;
		std::size_t gap = npos;
		unsigned char first = 1;  // 1: difference above the gap, 2: below
	};

	Choice select() const
	{
		Choice best;
		if (rule_ == BranchRule::MinSlack) {
			Time best_key = std::numeric_limits<Time>::max();
			for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
				const auto& g = groups_[gi];
				auto k = gap_at(g, lb(g.v) - lb(g.u));
				if (k == npos)
					continue;
				Time up = -at(g.v, g.u) - g.gaps[k].second - 1;
				Time down = g.gaps[k].first - 1 - at(g.u, g.v);
				Time key = std::min(up, down);
				if (key < best_key) {
					best_key = key;
					best = {gi, k, static_cast<unsigned char>(up >= down ? 1 : 2)};
				}
			}
		} else {
			std::tuple<Time, Time> best_key{std::numeric_limits<Time>::max(), 0};
			for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
				const auto& g = groups_[gi];
				auto k = gap_at(g, lb(g.v) - lb(g.u));
				if (k == npos)
					continue;
				Time width = std::min(ub(g.u) - lb(g.u), ub(g.v) - lb(g.v));
				Time period =
				    std::min(model_.period[model_.vars[g.u].activity], model_.period[model_.vars[g.v].activity]);
				std::tuple<Time, Time> key{width, period};
				if (key < best_key) {
					best_key = key;
					best = {gi, k, static_cast<unsigned char>(lb(g.u) <= lb(g.v) ? 1 : 2)};
				}
			}
		}
		return best;
	}

	void restore(std::size_t mark)
	{
		while (trail_.size() > mark) {
			dist_[trail_.back().first] = trail_.back().second;
			trail_.pop_back();
		}
	}

	Outcome dfs()
	{
		++stats_.nodes;
		if ((stats_.nodes & 0x3f) == 0 && !check_time())
			return Outcome::Stop;
		if (stopped_ || budget_hit_)
			return Outcome::Stop;
		if (stats_.nodes > budget_end_) {
			budget_hit_ = true;
			return Outcome::Stop;
		}
		auto c = select();
		if (c.group == npos)
			return Outcome::Ok;
		const auto& g = groups_[c.group];
		const auto gap = g.gaps[c.gap];
		for (unsigned char side : {c.first, static_cast<unsigned char>(3 - c.first)}) {
			auto mark = trail_.size();
			++stats_.decisions;
			bool ok = side == 1 ? add(g.u, g.v, gap.second + 1) : add(g.v, g.u, 1 - gap.first);
			Outcome o = ok ? propagate() : Outcome::Fail;
			if (o == Outcome::Ok)
				o = dfs();
			if (o != Outcome::Fail)
				return o;
			restore(mark);
		}
		return Outcome::Fail;
	}

	Schedule extract() const
	{
		Schedule s;
		s.start.resize(model_.jobs.size());
		for (std::size_t a = 0; a < model_.jobs.size(); ++a)
			for (const auto& r : model_.jobs[a])
				s.start[a].push_back(lb(r.var) + r.offset);
		s.zero_jitter = model_.zero_jitter_flags;
		return s;
	}
};

}  // namespace

SolveResult solve(const BuiltModel& model, const SolveLimits& limits)
{
	if (model.vars.size() <= limits.dense_var_limit)
		return DenseSearch(model, limits).run();
	return SparseSearch(model, limits).run();
}

SolveResult solve(const Instance& instance, ScheduleMode mode, const SolveLimits& limits, Improvements improvements)
{
	auto bounds = derive_bounds(instance);
	BuildOptions opt;
	opt.mode = mode;
	opt.improvements = improvements;
	opt.throw_on_empty_window = false;
	auto model = build_model(instance, bounds, opt);
	if (model.empty_window) {
		SolveResult r;
		r.status = SolveStatus::Infeasible;
		return r;
	}
	return solve(model, limits);
}

}  // namespace ttsched
