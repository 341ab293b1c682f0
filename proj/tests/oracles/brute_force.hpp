#ifndef TTSCHED_TESTS_BRUTE_FORCE_HPP
#define TTSCHED_TESTS_BRUTE_FORCE_HPP

// Exhaustive reference solvers. Deliberately written from the problem
// definition only; nothing here calls into the solvers under test.

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <vector>

#include "ttsched/core_model.hpp"

namespace ttsched::oracle {

struct Enumeration {
	bool feasible = false;
	std::vector<std::vector<Time>> starts;
	std::size_t leaves = 0;
	bool exhausted_budget = false;
};

// Depth-first enumeration of every start-time tuple inside the two-period
// windows. Each branching variable is one job, or one activity offset in
// zero-jitter mode. A subtree is cut only when some constraint among the
// assigned jobs fails or some unassigned variable has no value left that is
// consistent with them (forward checking), so the verdict is exact.
class StartTimeEnumerator {
public:
	StartTimeEnumerator(const Instance& inst, bool zero_jitter, std::size_t budget = 50'000'000)
		: inst_(inst), zj_(zero_jitter), budget_(budget)
	{
		h_ = 1;
		for (const auto& a : inst.activities)
			h_ = std::lcm(h_, a.period);
		for (ActivityId i = 0; i < inst.size(); ++i) {
			auto n = static_cast<std::size_t>(h_ / inst.activities[i].period);
			s_.emplace_back(n, 0);
			set_.emplace_back(n, false);
			if (zj_) {
				vars_.push_back({i, 0, true});
			} else {
				for (std::size_t j = 0; j < n; ++j)
					vars_.push_back({i, j, false});
			}
		}
		assigned_.assign(vars_.size(), false);
	}

	Enumeration run()
	{
		Enumeration out;
		out.feasible = dfs(0);
		out.leaves = nodes_;
		out.exhausted_budget = nodes_ >= budget_;
		if (out.feasible)
			out.starts = s_;
		return out;
	}

private:
	struct Var {
		ActivityId i;
		std::size_t j;
		bool whole_activity;
	};
	const Instance& inst_;
	bool zj_;
	std::size_t budget_;
	Time h_ = 1;
	std::vector<std::vector<Time>> s_;
	std::vector<std::vector<bool>> set_;
	std::vector<Var> vars_;
	std::vector<bool> assigned_;
	std::size_t nodes_ = 0;

	Time p(ActivityId i) const { return inst_.activities[i].period; }
	Time e(ActivityId i) const { return inst_.activities[i].exec; }
	std::size_t n(ActivityId i) const { return s_[i].size(); }

	static bool overlap(Time a, Time ea, Time b, Time eb) { return a < b + eb && b < a + ea; }

	Time lo(const Var& v) const { return v.whole_activity ? 0 : static_cast<Time>(v.j) * p(v.i); }
	Time hi(const Var& v) const
	{
		return v.whole_activity ? 2 * p(v.i) - e(v.i) : static_cast<Time>(v.j + 2) * p(v.i) - e(v.i);
	}

	void put(const Var& v, Time t)
	{
		if (v.whole_activity) {
			for (std::size_t j = 0; j < n(v.i); ++j) {
				s_[v.i][j] = t + static_cast<Time>(j) * p(v.i);
				set_[v.i][j] = true;
			}
		} else {
			s_[v.i][v.j] = t;
			set_[v.i][v.j] = true;
		}
	}

	void clear(const Var& v)
	{
		if (v.whole_activity)
			std::fill(set_[v.i].begin(), set_[v.i].end(), false);
		else
			set_[v.i][v.j] = false;
	}

	bool fits(const Var& v) const
	{
		if (!v.whole_activity)
			return consistent(v.i, v.j);
		for (std::size_t j = 0; j < n(v.i); ++j)
			if (!consistent(v.i, j))
				return false;
		return true;
	}

	// Every constraint whose jobs are all assigned, touching job (i, j).
	bool consistent(ActivityId i, std::size_t j) const
	{
		Time si = s_[i][j];
		auto ri = inst_.resource_of(i);
		for (ActivityId l = 0; l < inst_.size(); ++l) {
			if (l == i || inst_.resource_of(l) != ri)
				continue;
			for (std::size_t k = 0; k < n(l); ++k) {
				if (!set_[l][k])
					continue;
				Time sl = s_[l][k];
				if (overlap(si, e(i), sl, e(l)))
					return false;
				if (j == 0 && k + 1 == n(l) && overlap(si + h_, e(i), sl, e(l)))
					return false;
				if (k == 0 && j + 1 == n(i) && overlap(sl + h_, e(l), si, e(i)))
					return false;
			}
		}
		auto jit = inst_.activities[i].jitter;
		if (j > 0 && set_[i][j - 1]) {
			if (s_[i][j - 1] + e(i) > si)
				return false;
			if (std::abs(si - s_[i][j - 1] - p(i)) > jit)
				return false;
		}
		if (j + 1 < n(i) && set_[i][j + 1]) {
			if (si + e(i) > s_[i][j + 1])
				return false;
			if (std::abs(s_[i][j + 1] - si - p(i)) > jit)
				return false;
		}
		std::size_t last = n(i) - 1;
		if ((j == 0 || j == last) && set_[i][0] && set_[i][last]) {
			if (n(i) > 1 && s_[i][last] + e(i) > s_[i][0] + h_)
				return false;
			if (std::abs(s_[i][0] + h_ - p(i) - s_[i][last]) > jit)
				return false;
		}
		for (auto l : inst_.dag.successors(i))
			if (set_[l][j] && si + e(i) > s_[l][j])
				return false;
		for (auto l : inst_.dag.predecessors(i))
			if (set_[l][j] && s_[l][j] + e(l) > si)
				return false;
		return true;
	}

	// Number of values of v consistent with the current partial assignment.
	std::size_t support(const Var& v)
	{
		std::size_t count = 0;
		for (Time t = lo(v); t <= hi(v); ++t) {
			put(v, t);
			if (fits(v))
				++count;
			clear(v);
		}
		return count;
	}

	bool dfs(std::size_t depth)
	{
		if (depth == vars_.size())
			return true;
		if (++nodes_ >= budget_)
			return false;
		// Forward check every open variable and branch on the one with the
		// fewest values left.
		std::size_t pick = vars_.size(), fewest = 0;
		for (std::size_t k = 0; k < vars_.size(); ++k) {
			if (assigned_[k])
				continue;
			auto c = support(vars_[k]);
			if (c == 0)
				return false;
			if (pick == vars_.size() || c < fewest) {
				pick = k;
				fewest = c;
			}
		}
		const auto& v = vars_[pick];
		assigned_[pick] = true;
		for (Time t = lo(v); t <= hi(v); ++t) {
			put(v, t);
			if (fits(v) && dfs(depth + 1))
				return true;
			clear(v);
			if (nodes_ >= budget_)
				break;
		}
		assigned_[pick] = false;
		return false;
	}
};

inline Enumeration enumerate(const Instance& inst, bool zero_jitter, std::size_t budget = 50'000'000)
{
	return StartTimeEnumerator(inst, zero_jitter, budget).run();
}

// Minimum of sum(s) over s[j] in domain[j] (each a list of closed intervals)
// subject to s[j] + e <= s[j+1], s[n-1] + e <= s[0] + H and relative jitter
// including the wrap term. Exhaustive over s[0]; for each value a table over
// the previous start keeps the cheapest prefix, so every point is visited.
inline std::optional<Time> min_start_sum(const std::vector<std::vector<std::pair<Time, Time>>>& domain, Time p,
                                         Time e, Time jit, Time h)
{
	std::size_t n = domain.size();
	std::vector<std::vector<Time>> pts(n);
	for (std::size_t j = 0; j < n; ++j)
		for (auto [l, r] : domain[j])
			for (Time t = l; t <= r; ++t)
				pts[j].push_back(t);
	std::optional<Time> best;
	for (Time first : pts[0]) {
		// cost[q]: least sum of s[0..j] with s[j] = prev[q].
		std::vector<std::optional<Time>> cost{first};
		std::vector<Time> prev{first};
		for (std::size_t j = 1; j < n; ++j) {
			std::vector<std::optional<Time>> next(pts[j].size());
			for (std::size_t k = 0; k < pts[j].size(); ++k)
				for (std::size_t q = 0; q < prev.size(); ++q) {
					Time t = pts[j][k];
					if (!cost[q] || prev[q] + e > t || std::abs(t - prev[q] - p) > jit)
						continue;
					if (!next[k] || *cost[q] + t < *next[k])
						next[k] = *cost[q] + t;
				}
			cost = std::move(next);
			prev = pts[j];
		}
		for (std::size_t q = 0; q < prev.size(); ++q) {
			if (!cost[q] || (n > 1 && prev[q] + e > first + h) || std::abs(first + h - p - prev[q]) > jit)
				continue;
			if (!best || *cost[q] < *best)
				best = cost[q];
		}
	}
	return best;
}

}  // namespace ttsched::oracle

#endif
