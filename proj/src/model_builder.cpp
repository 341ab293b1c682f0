#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "ttsched/exact_solver.hpp"

namespace ttsched {

const char* to_string(ScheduleMode mode)
{
	return mode == ScheduleMode::ZeroJitter ? "zj" : "jc";
}

std::size_t BuiltModel::jitter_rows() const
{
	return static_cast<std::size_t>(
	    std::count_if(arcs.begin(), arcs.end(), [](const DiffArc& a) { return a.kind == ArcKind::Jitter; }));
}

std::string BuiltModel::var_name(VarId v) const
{
	const auto& jv = vars.at(v);
	return "s_" + std::to_string(jv.activity) + "_" + std::to_string(jv.job + 1);
}

namespace {

class Builder {
public:
	Builder(const Instance& inst, const DerivedBounds& bounds, const BuildOptions& opt)
		: inst_(inst), bounds_(bounds), opt_(opt)
	{
	}

	BuiltModel build()
	{
		m_.mode = opt_.mode;
		m_.improvements = opt_.improvements;
		m_.hyper_period = bounds_.hyper_period;
		m_.instance_hash = instance_fingerprint(inst_);
		for (const auto& a : inst_.activities) {
			m_.period.push_back(a.period);
			m_.exec.push_back(a.exec);
			m_.resource.push_back(inst_.resource_of(a.id));
		}
		if (opt_.mode == ScheduleMode::ZeroJitter)
			m_.zero_jitter_flags.assign(inst_.size(), true);
		else
			m_.zero_jitter_flags = zero_jitter_requirements(inst_);

		make_vars();
		if (m_.empty_window && opt_.throw_on_empty_window)
			throw ModelInfeasible("job window is empty: lower bound exceeds upper bound");
		make_self_arcs();
		make_dag_arcs();
		make_jitter_arcs();
		make_pairs();
		return std::move(m_);
	}

private:
	const Instance& inst_;
	const DerivedBounds& bounds_;
	const BuildOptions& opt_;
	BuiltModel m_;

	bool zj() const { return opt_.mode == ScheduleMode::ZeroJitter; }
	bool refine() const { return opt_.improvements.refine_bounds; }
	Time before(ActivityId a) const { return refine() ? bounds_.before[a] : 0; }
	Time after(ActivityId a) const { return refine() ? bounds_.after[a] : 0; }
	std::size_t jobs(ActivityId a) const { return bounds_.job_count[a]; }
	Time start_lb(ActivityId a, std::size_t j) const
	{
		const auto& r = m_.jobs[a][j];
		return m_.vars[r.var].lb + r.offset;
	}
	Time start_ub(ActivityId a, std::size_t j) const
	{
		const auto& r = m_.jobs[a][j];
		return m_.vars[r.var].ub + r.offset;
	}

	void make_vars()
	{
		m_.jobs.resize(inst_.size());
		for (ActivityId a = 0; a < inst_.size(); ++a) {
			const auto& act = inst_.activities[a];
			Time p = act.period, e = act.exec;
			if (zj()) {
				// s^j = x + j*p; every job window maps onto the same range for x.
				VarId v = m_.vars.size();
				m_.vars.push_back({a, 0, before(a), 2 * p - e - after(a)});
				for (std::size_t j = 0; j < jobs(a); ++j)
					m_.jobs[a].push_back({v, static_cast<Time>(j) * p});
			} else {
				for (std::size_t j = 0; j < jobs(a); ++j) {
					VarId v = m_.vars.size();
					Time lo = static_cast<Time>(j) * p + before(a);
					Time hi = static_cast<Time>(j + 2) * p - e - after(a);
					m_.vars.push_back({a, j, lo, hi});
					m_.jobs[a].push_back({v, 0});
				}
			}
		}
		for (const auto& v : m_.vars)
			if (v.lb > v.ub)
				m_.empty_window = true;
	}

	void arc(VarId from, VarId to, Time w, ArcKind kind, ActivityId a, std::size_t j)
	{
		m_.arcs.push_back({from, to, w, kind, a, j});
	}

	void make_self_arcs()
	{
		if (zj())
			return;  // implied by e <= p once jobs share one offset
		const Time h = m_.hyper_period;
		for (ActivityId a = 0; a < inst_.size(); ++a) {
			auto n = jobs(a);
			Time e = inst_.activities[a].exec;
			for (std::size_t j = 0; j + 1 < n; ++j)
				arc(m_.jobs[a][j].var, m_.jobs[a][j + 1].var, e, ArcKind::SelfOrder, a, j);
			if (n > 1)
				arc(m_.jobs[a][n - 1].var, m_.jobs[a][0].var, e - h, ArcKind::SelfOrder, a, n - 1);
		}
	}

	void make_dag_arcs()
	{
		for (auto [from, to] : inst_.dag.edges()) {
			Time e = inst_.activities[from].exec;
			if (zj()) {
				arc(m_.jobs[from][0].var, m_.jobs[to][0].var, e, ArcKind::DagOrder, from, 0);
				continue;
			}
			auto n = std::min(jobs(from), jobs(to));
			for (std::size_t j = 0; j < n; ++j)
				arc(m_.jobs[from][j].var, m_.jobs[to][j].var, e, ArcKind::DagOrder, from, j);
		}
	}

	void make_jitter_arcs()
	{
		if (zj())
			return;
		const Time h = m_.hyper_period;
		for (ActivityId a = 0; a < inst_.size(); ++a) {
			const auto& act = inst_.activities[a];
			auto n = jobs(a);
			if (n < 2)
				continue;  // the border deviation is identically zero
			Time slack = worst_case_slack(act.period, act.exec, before(a), after(a));
			if (opt_.improvements.omit_jitter &&
			    jitter_redundant(act.jitter, act.period, act.exec, slack, JobWindow::TwoPeriods)) {
				m_.jitter_omitted.push_back(a);
				continue;
			}
			m_.jitter_kept.push_back(a);
			Time p = act.period, jit = act.jitter;
			for (std::size_t j = 1; j < n; ++j) {
				VarId prev = m_.jobs[a][j - 1].var, cur = m_.jobs[a][j].var;
				arc(prev, cur, p - jit, ArcKind::Jitter, a, j);
				arc(cur, prev, -p - jit, ArcKind::Jitter, a, j);
			}
			// |s^1 + H - p - s^n| <= jit
			VarId first = m_.jobs[a][0].var, last = m_.jobs[a][n - 1].var;
			arc(last, first, p - h - jit, ArcKind::Jitter, a, 0);
			arc(first, last, h - p - jit, ArcKind::Jitter, a, 0);
		}
	}

	void make_pairs()
	{
		const Time h = m_.hyper_period;
		std::map<ResourceId, std::vector<ActivityId>> by_resource;
		for (ActivityId a = 0; a < inst_.size(); ++a)
			by_resource[inst_.resource_of(a)].push_back(a);

		// Zero-jitter jobs share a variable, so many job pairs collapse onto the
		// same constraint; keep one per (u, v, offset difference).
		std::set<std::tuple<VarId, VarId, Time>> seen;

		auto consider = [&](ActivityId a, std::size_t ja, Time shift_a, ActivityId b, std::size_t jb, bool wrap) {
			Time ea = inst_.activities[a].exec, eb = inst_.activities[b].exec;
			const auto& ra = m_.jobs[a][ja];
			const auto& rb = m_.jobs[b][jb];
			Time ca = ra.offset + shift_a, cb = rb.offset;
			if (opt_.improvements.prune_pairs) {
				Time a_lo = start_lb(a, ja) + shift_a, a_hi = start_ub(a, ja) + shift_a + ea;
				Time b_lo = start_lb(b, jb), b_hi = start_ub(b, jb) + eb;
				if (!(a_lo < b_hi && b_lo < a_hi)) {
					++m_.pruned_pairs;
					return;
				}
			}
			if (zj() && !seen.insert({ra.var, rb.var, ca - cb}).second)
				return;
			m_.pairs.push_back({a, ja, b, jb, wrap, ra.var, rb.var, ca + ea - cb, cb + eb - ca});
		};

		for (const auto& [res, acts] : by_resource) {
			for (std::size_t x = 0; x < acts.size(); ++x)
				for (std::size_t y = x + 1; y < acts.size(); ++y) {
					ActivityId a = acts[x], b = acts[y];
					for (std::size_t j = 0; j < jobs(a); ++j)
						for (std::size_t k = 0; k < jobs(b); ++k)
							consider(a, j, 0, b, k, false);
					consider(a, 0, h, b, jobs(b) - 1, true);
					consider(b, 0, h, a, jobs(a) - 1, true);
				}
		}
	}
};

}  // namespace

BuiltModel build_model(const Instance& instance, const DerivedBounds& bounds, const BuildOptions& options)
{
	if (!instance.is_mapped())
		throw ModelError("instance must be mapped before building a model");
	return Builder(instance, bounds, options).build();
}

}  // namespace ttsched
