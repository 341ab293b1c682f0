#include "ttsched/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace ttsched {

namespace {

const std::vector<SetRow>& rows()
{
	static const std::vector<SetRow> table{
	    {1, 20, {1, 2, 5, 10}, 4, 4, 0.24, 30, 45},
	    {2, 30, {1, 2, 5, 10}, 4, 6, 0.27, 50, 65},
	    {3, 50, {1, 2, 5, 10, 20, 50, 100}, 4, 8, 0.40, 90, 130},
	    {4, 100, {1, 2, 5, 10, 20, 50, 100}, 4, 15, 0.28, 180, 250},
	    {5, 500, {1, 2, 5, 10, 20, 50, 100}, 8, 50, 0.43, 1500, 2000},
	};
	return table;
}

Time log_uniform(std::mt19937_64& rng, double lo, double hi)
{
	std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
	return static_cast<Time>(std::llround(std::exp(u(rng))));
}

struct Pair {
	ActivityId writer, reader;
	std::uint64_t bytes;
};

// Tasks plus one message per writer/reader pair, and the chain edges routed
// through those messages.
Instance assemble(Platform platform, const std::vector<Time>& period, const std::vector<Time>& exec,
                  const std::vector<Pair>& pairs, const std::vector<std::vector<ActivityId>>& chains)
{
	Instance inst;
	inst.platform = platform;
	const auto n = period.size();
	for (ActivityId t = 0; t < n; ++t) {
		Activity a;
		a.id = t;
		a.period = period[t];
		a.exec = std::max<Time>(1, exec[t]);
		inst.activities.push_back(a);
	}
	std::map<std::pair<ActivityId, ActivityId>, ActivityId> message_of;
	for (const auto& p : pairs) {
		Activity m;
		m.id = inst.activities.size();
		m.kind = ActivityKind::Message;
		m.period = period[p.writer];
		m.size_bytes = p.bytes;
		m.exec = message_exec_time(p.bytes, platform);
		m.sender = p.writer;
		m.receiver = p.reader;
		message_of[{p.writer, p.reader}] = m.id;
		inst.activities.push_back(m);
	}
	std::set<std::pair<ActivityId, ActivityId>> edges;
	std::vector<std::vector<ActivityId>> full_chains;
	for (const auto& chain : chains) {
		std::vector<ActivityId> path{chain.front()};
		for (std::size_t k = 1; k < chain.size(); ++k) {
			auto m = message_of.at({chain[k - 1], chain[k]});
			edges.insert({chain[k - 1], m});
			edges.insert({m, chain[k]});
			path.push_back(m);
			path.push_back(chain[k]);
		}
		full_chains.push_back(std::move(path));
	}
	inst.dag = PrecedenceDag(inst.activities.size(), {edges.begin(), edges.end()});
	inst.chains = std::move(full_chains);
	return inst;
}

// Chains over equal-period tasks. Inside one period group every chain
// follows a fixed random rank, which keeps the union acyclic.
std::vector<std::vector<ActivityId>> draw_chains(std::mt19937_64& rng, const std::vector<Time>& period,
                                                 std::size_t count, std::size_t max_length)
{
	std::map<Time, std::vector<ActivityId>> groups;
	for (ActivityId t = 0; t < period.size(); ++t)
		groups[period[t]].push_back(t);
	std::vector<const std::vector<ActivityId>*> usable;
	for (auto& [p, g] : groups) {
		std::shuffle(g.begin(), g.end(), rng);
		if (g.size() >= 2)
			usable.push_back(&g);
	}
	std::vector<std::vector<ActivityId>> chains;
	if (usable.empty())
		return chains;
	std::vector<double> weight;
	for (auto g : usable)
		weight.push_back(static_cast<double>(g->size()));
	std::discrete_distribution<std::size_t> pick_group(weight.begin(), weight.end());
	for (std::size_t c = 0; c < count; ++c) {
		const auto& g = *usable[pick_group(rng)];
		auto longest = std::min(max_length, g.size());
		auto len = std::uniform_int_distribution<std::size_t>(2, longest)(rng);
		std::vector<std::size_t> pos(g.size());
		std::iota(pos.begin(), pos.end(), 0);
		std::shuffle(pos.begin(), pos.end(), rng);
		pos.resize(len);
		std::sort(pos.begin(), pos.end());
		std::vector<ActivityId> chain;
		for (auto k : pos)
			chain.push_back(g[k]);
		chains.push_back(std::move(chain));
	}
	return chains;
}

// Writer/reader pairs from chain links and from random reads, merged per
// pair with summed variable sizes.
std::vector<Pair> draw_pairs(std::mt19937_64& rng, std::size_t tasks,
                             const std::vector<std::vector<ActivityId>>& chains,
                             const std::vector<std::size_t>& accesses, double read_share, std::uint64_t var_min,
                             std::uint64_t var_max)
{
	std::map<std::pair<ActivityId, ActivityId>, std::uint64_t> bytes;
	auto var = [&] {
		return static_cast<std::uint64_t>(log_uniform(rng, static_cast<double>(var_min), static_cast<double>(var_max)));
	};
	for (const auto& chain : chains)
		for (std::size_t k = 1; k < chain.size(); ++k) {
			auto& b = bytes[{chain[k - 1], chain[k]}];
			if (b == 0)
				b = var();
		}
	// Exactly round(share * slots) of the access slots read another task's
	// variable; the slots themselves are drawn at random.
	std::vector<ActivityId> slots;
	for (ActivityId t = 0; t < tasks; ++t)
		slots.insert(slots.end(), accesses[t], t);
	std::shuffle(slots.begin(), slots.end(), rng);
	slots.resize(static_cast<std::size_t>(std::llround(read_share * static_cast<double>(slots.size()))));
	std::sort(slots.begin(), slots.end());
	std::uniform_int_distribution<ActivityId> other(0, tasks > 1 ? tasks - 2 : 0);
	for (auto t : slots) {
		if (tasks < 2)
			break;
		auto w = other(rng);
		if (w >= t)
			++w;
		bytes[{w, t}] += var();
	}
	std::vector<Pair> out;
	for (const auto& [key, b] : bytes)
		out.push_back({key.first, key.second, b});
	return out;
}

}  // namespace

const SetRow& set_row(int set_id)
{
	for (const auto& r : rows())
		if (r.id == set_id)
			return r;
	throw ParamError("unknown set id " + std::to_string(set_id) + " (expected 1 to 5)");
}

JitterPolicy JitterPolicy::parse(const std::string& text)
{
	JitterPolicy p;
	if (text == "p/2")
		p.kind = Kind::Half;
	else if (text == "p/5")
		p.kind = Kind::Fifth;
	else if (text == "p/10")
		p.kind = Kind::Tenth;
	else if (text == "0" || text == "zero")
		p.kind = Kind::Zero;
	else if (text.rfind("zj:", 0) == 0) {
		p.kind = Kind::ZeroJitterFraction;
		try {
			p.fraction = std::stod(text.substr(3));
		} catch (const std::exception&) {
			throw ParamError("bad zero-jitter fraction in '" + text + "'");
		}
		if (p.fraction < 0.0 || p.fraction > 1.0)
			throw ParamError("zero-jitter fraction must lie in [0, 1]");
	} else
		throw ParamError("unknown jitter policy '" + text + "' (p/2, p/5, p/10, 0, zj:<fraction>)");
	return p;
}

std::string JitterPolicy::str() const
{
	switch (kind) {
	case Kind::Half: return "p/2";
	case Kind::Fifth: return "p/5";
	case Kind::Tenth: return "p/10";
	case Kind::Zero: return "0";
	case Kind::ZeroJitterFraction: {
		char buf[32];
		std::snprintf(buf, sizeof buf, "zj:%.2f", fraction);
		return buf;
	}
	}
	return "?";
}

std::vector<bool> zero_jitter_selection(const Instance& instance, double fraction)
{
	auto h = hyper_period(instance);
	std::vector<ActivityId> order(instance.size());
	std::iota(order.begin(), order.end(), 0);
	auto jobs = [&](ActivityId a) { return job_count(instance.activities[a].period, h); };
	std::stable_sort(order.begin(), order.end(), [&](ActivityId a, ActivityId b) { return jobs(a) > jobs(b); });
	std::size_t total = 0;
	for (ActivityId a = 0; a < instance.size(); ++a)
		total += jobs(a);
	std::vector<bool> zj(instance.size(), false);
	std::size_t covered = 0;
	for (auto a : order) {
		if (static_cast<double>(covered) >= fraction * static_cast<double>(total) - 1e-9)
			break;
		zj[a] = true;
		covered += jobs(a);
	}
	return zj;
}

void apply_jitter(Instance& instance, const JitterPolicy& policy)
{
	std::vector<bool> zj;
	if (policy.kind == JitterPolicy::Kind::ZeroJitterFraction)
		zj = zero_jitter_selection(instance, policy.fraction);
	for (auto& a : instance.activities) {
		switch (policy.kind) {
		case JitterPolicy::Kind::Half: a.jitter = a.period / 2; break;
		case JitterPolicy::Kind::Fifth: a.jitter = a.period / 5; break;
		case JitterPolicy::Kind::Tenth: a.jitter = a.period / 10; break;
		case JitterPolicy::Kind::Zero: a.jitter = 0; break;
		case JitterPolicy::Kind::ZeroJitterFraction: a.jitter = zj[a.id] ? 0 : a.period / 5; break;
		}
	}
}

Instance generate(const GenParams& params)
{
	const auto& row = set_row(params.set_id);
	std::mt19937_64 rng(params.seed);
	auto tasks = params.tasks.value_or(row.tasks);
	auto menu = params.periods_ms.empty() ? row.periods_ms : params.periods_ms;
	auto acc = params.accesses_per_task.value_or(row.accesses_per_task);
	auto chain_count = params.chains.value_or(row.chains);
	auto share = params.read_share.value_or(row.read_share);
	if (tasks == 0 || menu.empty() || params.cores == 0)
		throw ParamError("need at least one task, one period and one core");
	if (share < 0.0 || share > 1.0)
		throw ParamError("read share must lie in [0, 1]");
	if (params.exec_min_us < 1 || params.exec_min_us > params.exec_max_us)
		throw ParamError("bad execution time range");
	if (params.var_min_bytes < 1 || params.var_min_bytes > params.var_max_bytes)
		throw ParamError("bad variable size range");
	if (params.max_chain_length < 2)
		throw ParamError("chains need at least two tasks");
	for (auto p : menu)
		if (p <= 0)
			throw ParamError("periods must be positive");

	std::uniform_int_distribution<std::size_t> pick(0, menu.size() - 1);
	std::vector<Time> period(tasks), exec(tasks);
	for (std::size_t t = 0; t < tasks; ++t) {
		period[t] = menu[pick(rng)] * ticks_per_ms;
		exec[t] = log_uniform(rng, static_cast<double>(params.exec_min_us), static_cast<double>(params.exec_max_us));
	}
	auto chains = draw_chains(rng, period, chain_count, params.max_chain_length);
	auto pairs = draw_pairs(rng, tasks, chains, std::vector<std::size_t>(tasks, acc), share, params.var_min_bytes,
	                        params.var_max_bytes);
	Platform platform;
	platform.resources = 2 * params.cores;
	auto inst = assemble(platform, period, exec, pairs, chains);
	apply_jitter(inst, params.jitter);
	return inst;
}

Instance scale_to_utilization(const Instance& instance, double u, double tolerance, ScaleScope scope)
{
	if (!(u > 0.0 && u <= 1.0))
		throw ScaleError("target utilization must lie in (0, 1]");
	if (!instance.is_mapped())
		throw ModelError("scaling needs a mapped instance");
	Instance out = instance;
	const auto m = instance.platform.resources;
	std::vector<std::vector<ActivityId>> on(m);
	for (const auto& a : instance.activities)
		on[*a.resource].push_back(a.id);

	for (ResourceId y = 0; y < m; ++y) {
		if (on[y].empty() || (scope == ScaleScope::Cores && !instance.platform.is_core(y)))
			continue;
		double r = 0.0;
		for (auto a : on[y])
			r += static_cast<double>(instance.activities[a].exec) / static_cast<double>(instance.activities[a].period);
		double f = u / r;
		double got = 0.0;
		for (auto a : on[y]) {
			auto& act = out.activities[a];
			act.exec = std::max<Time>(1, std::llround(static_cast<double>(act.exec) * f));
			act.exec = std::min(act.exec, act.period);
			got += static_cast<double>(act.exec) / static_cast<double>(act.period);
		}
		// Rounding drift: nudge single execution times, longest period first
		// (the finest steps), while that brings r closer to u.
		std::vector<ActivityId> fine(on[y]);
		std::stable_sort(fine.begin(), fine.end(), [&](ActivityId a, ActivityId b) {
			return out.activities[a].period > out.activities[b].period;
		});
		for (bool moved = true; moved && std::abs(got - u) > tolerance / 2;) {
			moved = false;
			for (auto a : fine) {
				auto& act = out.activities[a];
				double step = 1.0 / static_cast<double>(act.period);
				Time dir = got > u ? -1 : 1;
				if ((dir < 0 && act.exec <= 1) || (dir > 0 && act.exec >= act.period))
					continue;
				double next = got + static_cast<double>(dir) * step;
				if (std::abs(next - u) >= std::abs(got - u))
					continue;
				act.exec += dir;
				got = next;
				moved = true;
				if (std::abs(got - u) <= tolerance / 2)
					break;
			}
		}
		if (std::abs(got - u) > tolerance) {
			char buf[160];
			std::snprintf(buf, sizeof buf, "resource %zu reaches %.4f instead of %.4f", y, got, u);
			throw ScaleError(buf);
		}
	}
	return out;
}

PeriodSetting parse_period_setting(const std::string& text)
{
	if (text == "initial")
		return PeriodSetting::Initial;
	if (text == "mono")
		return PeriodSetting::Mono;
	if (text == "harmonic")
		return PeriodSetting::Harmonic;
	if (text == "non-harmonic")
		return PeriodSetting::NonHarmonic;
	throw ParamError("unknown period setting '" + text + "' (initial, mono, harmonic, non-harmonic)");
}

const char* to_string(PeriodSetting setting)
{
	switch (setting) {
	case PeriodSetting::Initial: return "initial";
	case PeriodSetting::Mono: return "mono";
	case PeriodSetting::Harmonic: return "harmonic";
	case PeriodSetting::NonHarmonic: return "non-harmonic";
	}
	return "?";
}

Instance rewrite_periods(const Instance& instance, PeriodSetting setting)
{
	static const std::map<Time, Time> non_harmonic{{1, 2}, {2, 5}, {5, 7}, {10, 12}};
	Instance out = instance;
	for (auto& a : out.activities) {
		Time ms = a.period / ticks_per_ms;
		switch (setting) {
		case PeriodSetting::Initial: break;
		case PeriodSetting::Mono: ms = 10; break;
		case PeriodSetting::Harmonic:
			if (ms == 2)
				ms = 5;
			break;
		case PeriodSetting::NonHarmonic: {
			auto it = non_harmonic.find(ms);
			if (it == non_harmonic.end())
				throw ParamError("non-harmonic rewrite expects periods of 1, 2, 5 or 10 ms");
			ms = it->second;
			break;
		}
		}
		Time scaled = a.period == 0 ? 0 : a.jitter * ms * ticks_per_ms / a.period;
		a.period = ms * ticks_per_ms;
		a.jitter = scaled;
		a.exec = std::min(a.exec, a.period);
	}
	return out;
}

Instance ems_case_study(std::uint64_t seed)
{
	// Task period shares of the automotive characterization, without the
	// angle-synchronous class; 200 and 1000 ms fold to 100 ms.
	static const std::vector<std::pair<Time, double>> shares{{1, 3}, {2, 2},   {5, 2},   {10, 25}, {20, 25},
	                                                         {50, 3}, {100, 20}, {200, 1}, {1000, 4}};
	constexpr std::size_t tasks = 2000, chains = 60, max_access = 12;
	constexpr double read_share = 1.0;
	constexpr double total_load = 3 * 0.896;
	constexpr std::uint64_t cycles_per_instruction = 3;

	std::mt19937_64 rng(seed);
	std::vector<double> w;
	for (auto [p, s] : shares)
		w.push_back(s);
	std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
	Platform platform;
	platform.resources = 6;
	platform.core_freq_hz = 125'000'000;
	platform.bandwidth_bytes_per_s = 400'000'000;
	platform.latency_ns = 250;

	std::vector<Time> period(tasks), exec(tasks);
	std::vector<double> instructions(tasks);
	double load = 0.0;
	for (std::size_t t = 0; t < tasks; ++t) {
		period[t] = std::min<Time>(shares[pick(rng)].first, 100) * ticks_per_ms;
		instructions[t] = static_cast<double>(log_uniform(rng, 200, 20000));
		load += instructions[t] * cycles_per_instruction * 1e6 / static_cast<double>(platform.core_freq_hz) /
		        static_cast<double>(period[t]);
	}
	// Instruction counts are drawn log-uniform and then scaled so that the
	// three cores carry the target load.
	double k = total_load / load;
	for (std::size_t t = 0; t < tasks; ++t) {
		double us = instructions[t] * k * cycles_per_instruction * 1e6 / static_cast<double>(platform.core_freq_hz);
		exec[t] = std::max<Time>(1, std::llround(us));
	}
	auto ch = draw_chains(rng, period, chains, 11);
	std::uniform_int_distribution<std::size_t> acc(1, max_access);
	std::vector<std::size_t> accesses(tasks);
	for (auto& a : accesses)
		a = acc(rng);
	auto pairs = draw_pairs(rng, tasks, ch, accesses, read_share, 1, 512);
	auto inst = assemble(platform, period, exec, pairs, ch);
	apply_jitter(inst, JitterPolicy{JitterPolicy::Kind::Fifth, 0.0});
	return inst;
}

}  // namespace ttsched
