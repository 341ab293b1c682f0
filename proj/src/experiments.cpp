#include "ttsched/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ttsched/heuristic.hpp"
#include "ttsched/io.hpp"
#include "ttsched/mapper.hpp"
#include "ttsched/validator.hpp"

namespace ttsched {

using Clock = std::chrono::steady_clock;

Method parse_method(const std::string& text)
{
	if (text == "exact")
		return Method::Exact;
	if (text == "3ls" || text == "heuristic")
		return Method::Heuristic;
	throw ParamError("unknown method '" + text + "' (exact, 3ls)");
}

const char* to_string(Method method)
{
	return method == Method::Exact ? "exact" : "3ls";
}

ScheduleMode parse_mode(const std::string& text)
{
	if (text == "zj")
		return ScheduleMode::ZeroJitter;
	if (text == "jc")
		return ScheduleMode::JitterConstrained;
	throw ParamError("unknown mode '" + text + "' (zj, jc)");
}

const char* to_string(PointStatus status)
{
	switch (status) {
	case PointStatus::Feasible: return "feasible";
	case PointStatus::Infeasible: return "infeasible";
	case PointStatus::Timeout: return "timeout";
	case PointStatus::Fail: return "fail";
	case PointStatus::ScaleError: return "scale-error";
	}
	return "?";
}

SolveOutcome solve_checked(const Instance& mapped, Method method, ScheduleMode mode,
                           std::chrono::milliseconds time_limit, BranchRule branching,
                           const std::atomic<bool>* stop)
{
	SolveOutcome out;
	auto t0 = Clock::now();
	if (method == Method::Exact) {
		SolveLimits limits;
		limits.time_limit = time_limit;
		limits.branching = branching;
		limits.stop = stop;
		auto r = solve(mapped, mode, limits);
		out.schedule = std::move(r.schedule);
		out.status = r.status == SolveStatus::Feasible     ? PointStatus::Feasible
		             : r.status == SolveStatus::Infeasible ? PointStatus::Infeasible
		                                                   : PointStatus::Timeout;
	} else {
		HeuristicOptions opt;
		opt.mode = mode;
		opt.time_limit = time_limit;
		opt.stop = stop;
		auto r = run_3ls(mapped, opt);
		out.schedule = std::move(r.schedule);
		out.detail = r.reason;
		out.status = r.status == HeuristicStatus::Feasible ? PointStatus::Feasible
		             : r.status == HeuristicStatus::Timeout ? PointStatus::Timeout
		                                                    : PointStatus::Fail;
	}
	out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
	if (out.status == PointStatus::Feasible) {
		if (!out.schedule)
			throw SoundnessError("feasible verdict without a schedule");
		auto rep = validate(mapped, *out.schedule);
		if (!rep.ok) {
			const auto& v = rep.violations.front();
			throw SoundnessError(std::string(to_string(method)) + " schedule rejected: " + to_string(v.kind) +
			                     " on activity " + std::to_string(v.activity) + " job " + std::to_string(v.job) +
			                     " (" + v.detail + ")");
		}
		if (mode == ScheduleMode::ZeroJitter)
			for (bool z : is_zero_jitter(mapped, *out.schedule))
				if (!z)
					throw SoundnessError("zero-jitter mode produced a jittering activity");
	}
	return out;
}

SweepResult max_util_sweep(const Instance& mapped, Method method, ScheduleMode mode, const SweepOptions& options,
                           const std::string& instance_id)
{
	SweepResult res;
	res.instance_id = instance_id;
	res.method = method;
	res.mode = mode;
	int failed_at = 0;
	for (int pct = options.start_percent; pct <= options.stop_percent; pct += options.step_percent) {
		if (failed_at && pct > failed_at + options.diagnostic_points * options.step_percent)
			break;
		if (options.stop && options.stop->load())
			break;
		PointOutcome pt;
		pt.percent = pct;
		try {
			auto scaled = scale_to_utilization(mapped, pct / 100.0);
			auto out = solve_checked(scaled, method, mode, options.time_limit, options.branching, options.stop);
			pt.status = out.status;
			pt.seconds = out.seconds;
			pt.jobs = derive_bounds(scaled).total_jobs();
			if (out.schedule)
				pt.memory_bytes = schedule_memory_bytes(scaled, *out.schedule);
		} catch (const ScaleError&) {
			pt.status = PointStatus::ScaleError;
		}
		res.points.push_back(pt);
		bool ok = pt.status == PointStatus::Feasible;
		if (!failed_at) {
			if (ok)
				res.max_percent = pct;
			else
				failed_at = pct;
		} else if (ok) {
			res.anomalies.push_back(pct);
		}
	}
	return res;
}

void run_pool(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job,
              const std::atomic<bool>* stop)
{
	std::atomic<std::size_t> next{0};
	std::mutex err_mutex;
	std::exception_ptr err;
	auto worker = [&] {
		for (;;) {
			if ((stop && stop->load()) || err)
				return;
			auto i = next.fetch_add(1);
			if (i >= n)
				return;
			try {
				job(i);
			} catch (...) {
				std::lock_guard lock(err_mutex);
				if (!err)
					err = std::current_exception();
			}
		}
	};
	workers = std::max<std::size_t>(1, std::min(workers, n));
	std::vector<std::thread> pool;
	for (std::size_t w = 1; w < workers; ++w)
		pool.emplace_back(worker);
	worker();
	for (auto& t : pool)
		t.join();
	if (err)
		std::rethrow_exception(err);
}

std::size_t default_workers()
{
	if (const char* v = std::getenv("TTSCHED_WORKERS")) {
		char* end = nullptr;
		auto n = std::strtoul(v, &end, 10);
		if (end != v && n > 0)
			return n;
	}
	return std::max(1u, std::thread::hardware_concurrency());
}

std::chrono::milliseconds default_time_limit(std::chrono::milliseconds fallback)
{
	if (const char* v = std::getenv("TTSCHED_TIME_LIMIT")) {
		char* end = nullptr;
		double s = std::strtod(v, &end);
		if (end != v && s > 0)
			return std::chrono::milliseconds(static_cast<long long>(s * 1000));
	}
	return fallback;
}

Experiment parse_experiment(const std::string& text)
{
	if (text == "jitter-sweep")
		return Experiment::JitterSweep;
	if (text == "zj-fraction-sweep")
		return Experiment::ZeroJitterFractionSweep;
	if (text == "period-study")
		return Experiment::PeriodStudy;
	if (text == "scale-study")
		return Experiment::ScaleStudy;
	if (text == "ems")
		return Experiment::Ems;
	throw ParamError("unknown experiment '" + text +
	                 "' (jitter-sweep, zj-fraction-sweep, period-study, scale-study, ems)");
}

const char* to_string(Experiment experiment)
{
	switch (experiment) {
	case Experiment::JitterSweep: return "jitter-sweep";
	case Experiment::ZeroJitterFractionSweep: return "zj-fraction-sweep";
	case Experiment::PeriodStudy: return "period-study";
	case Experiment::ScaleStudy: return "scale-study";
	case Experiment::Ems: return "ems";
	}
	return "?";
}

Summary summarize(std::vector<double> v)
{
	Summary s;
	s.count = v.size();
	if (v.empty())
		return s;
	std::sort(v.begin(), v.end());
	auto q = [&](double f) {
		double pos = f * static_cast<double>(v.size() - 1);
		auto lo = static_cast<std::size_t>(std::floor(pos));
		auto hi = std::min(lo + 1, v.size() - 1);
		return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
	};
	double sum = 0;
	for (double x : v)
		sum += x;
	s.mean = sum / static_cast<double>(v.size());
	s.min = v.front();
	s.max = v.back();
	s.q1 = q(0.25);
	s.median = q(0.5);
	s.q3 = q(0.75);
	return s;
}

namespace {

struct InstanceKey {
	int set = 1;
	std::uint64_t seed = 1;
	std::size_t cores = 3;
	PeriodSetting setting = PeriodSetting::Initial;
	bool ems = false;

	std::string id() const
	{
		if (ems)
			return "ems-s" + std::to_string(seed);
		std::string s = "set" + std::to_string(set) + "-s" + std::to_string(seed) + "-c" + std::to_string(cores);
		if (setting != PeriodSetting::Initial)
			s += std::string("-") + to_string(setting);
		return s;
	}
	auto tie() const { return std::tie(set, seed, cores, setting, ems); }
	bool operator<(const InstanceKey& o) const { return tie() < o.tie(); }
};

struct Item {
	std::size_t instance;
	JitterPolicy jitter;
	Method method;
	ScheduleMode mode;
};

std::string fmt(double x, int digits = 4)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.*f", digits, x);
	return buf;
}

std::vector<JitterPolicy> policies(const std::vector<std::string>& names)
{
	std::vector<JitterPolicy> out;
	for (const auto& n : names)
		out.push_back(JitterPolicy::parse(n));
	return out;
}

ScheduleMode mode_for(const JitterPolicy& p)
{
	return p.kind == JitterPolicy::Kind::Zero ? ScheduleMode::ZeroJitter : ScheduleMode::JitterConstrained;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, const std::atomic<bool>* stop)
{
	std::vector<InstanceKey> keys;
	std::vector<Item> items;
	auto add_instance = [&](InstanceKey k) {
		keys.push_back(k);
		return keys.size() - 1;
	};
	auto jitters = spec.jitters;
	switch (spec.experiment) {
	case Experiment::JitterSweep:
		if (jitters.empty())
			jitters = policies({"p/2", "p/5", "p/10", "0"});
		for (int set : spec.sets)
			for (auto seed : spec.seeds)
				for (auto c : spec.cores) {
					auto k = add_instance({set, seed, c});
					for (const auto& j : jitters)
						for (auto m : spec.methods)
							items.push_back({k, j, m, mode_for(j)});
				}
		break;
	case Experiment::ZeroJitterFractionSweep:
		if (jitters.empty())
			for (int f = 0; f <= 100; f += std::max(1, spec.zj_step_percent))
				jitters.push_back({JitterPolicy::Kind::ZeroJitterFraction, f / 100.0});
		for (int set : spec.sets)
			for (auto seed : spec.seeds)
				for (auto c : spec.cores) {
					auto k = add_instance({set, seed, c});
					for (const auto& j : jitters)
						for (auto m : spec.methods)
							items.push_back({k, j, m, ScheduleMode::JitterConstrained});
				}
		break;
	case Experiment::PeriodStudy:
	case Experiment::ScaleStudy: {
		if (jitters.empty())
			jitters = policies({"0", "p/5"});
		std::vector<PeriodSetting> settings{PeriodSetting::Initial};
		if (spec.experiment == Experiment::PeriodStudy)
			settings = {PeriodSetting::Mono, PeriodSetting::Harmonic, PeriodSetting::Initial,
			            PeriodSetting::NonHarmonic};
		for (int set : spec.sets)
			for (auto seed : spec.seeds)
				for (auto c : spec.cores)
					for (auto st : settings) {
						auto k = add_instance({set, seed, c, st});
						for (const auto& j : jitters)
							for (auto m : spec.methods)
								items.push_back({k, j, m, mode_for(j)});
					}
		break;
	}
	case Experiment::Ems:
		if (jitters.empty())
			jitters = policies({"p/5"});
		for (auto seed : spec.seeds) {
			auto k = add_instance({0, seed, 3, PeriodSetting::Initial, true});
			for (const auto& j : jitters)
				for (auto m : spec.methods)
					items.push_back({k, j, m, mode_for(j)});
		}
		break;
	}

	std::vector<Instance> mapped(keys.size());
	run_pool(
	    keys.size(), spec.workers,
	    [&](std::size_t i) {
		    const auto& k = keys[i];
		    if (k.ems) {
			    mapped[i] = map_instance(ems_case_study(k.seed), false);
			    return;
		    }
		    GenParams g;
		    g.set_id = k.set;
		    g.seed = k.seed;
		    g.cores = k.cores;
		    auto base = rewrite_periods(generate(g), k.setting);
		    mapped[i] = map_instance(base, true, spec.mapping_limit);
	    },
	    stop);

	auto sweep = spec.sweep;
	sweep.stop = stop;
	ExperimentReport report;
	report.sweeps.resize(items.size());
	std::vector<bool> done(items.size(), false);
	std::mutex io_mutex;
	std::ofstream partial(spec.out_prefix + "_points.partial.csv");
	partial << "experiment,instance,jitter,method,mode,percent,status,seconds\n";

	auto label = [&](const Item& it) {
		return keys[it.instance].id() + "," + it.jitter.str() + "," + to_string(it.method) + "," +
		       to_string(it.mode);
	};
	run_pool(
	    items.size(), spec.workers,
	    [&](std::size_t i) {
		    const auto& it = items[i];
		    auto inst = mapped[it.instance];
		    apply_jitter(inst, it.jitter);
		    SweepResult r;
		    if (keys[it.instance].ems) {
			    // The case study runs at its own load; no scaling.
			    auto out = solve_checked(inst, it.method, it.mode, sweep.time_limit, sweep.branching, stop);
			    PointOutcome pt;
			    double top = 0;
			    for (double u : utilization(inst))
				    top = std::max(top, u);
			    pt.percent = static_cast<int>(std::lround(top * 100));
			    pt.status = out.status;
			    pt.seconds = out.seconds;
			    pt.jobs = derive_bounds(inst).total_jobs();
			    if (out.schedule)
				    pt.memory_bytes = schedule_memory_bytes(inst, *out.schedule);
			    r.method = it.method;
			    r.mode = it.mode;
			    r.points.push_back(pt);
			    r.max_percent = out.status == PointStatus::Feasible ? pt.percent : 0;
		    } else {
			    r = max_util_sweep(inst, it.method, it.mode, sweep);
		    }
		    r.instance_id = keys[it.instance].id();
		    std::lock_guard lock(io_mutex);
		    for (const auto& p : r.points)
			    partial << to_string(spec.experiment) << "," << label(it) << "," << p.percent << ","
			            << to_string(p.status) << "," << fmt(p.seconds) << "\n";
		    partial.flush();
		    // A sweep cut short by the stop flag is not a result.
		    if (stop && stop->load())
			    return;
		    report.sweeps[i] = std::move(r);
		    done[i] = true;
	    },
	    stop);
	partial.close();

	std::ostringstream points, sweeps, summary;
	const std::string head = "experiment,instance,set,seed,cores,setting,jitter,method,mode";
	points << head << ",percent,status,seconds,jobs,memory_bytes\n";
	sweeps << head << ",max_percent,points,anomalies,seconds\n";
	std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
	std::vector<std::string> group_order;
	for (std::size_t i = 0; i < items.size(); ++i) {
		const auto& it = items[i];
		const auto& k = keys[it.instance];
		std::string lead = std::string(to_string(spec.experiment)) + "," + k.id() + "," + std::to_string(k.set) +
		                   "," + std::to_string(k.seed) + "," + std::to_string(k.cores) + "," +
		                   to_string(k.setting) + "," + it.jitter.str() + "," + to_string(it.method) + "," +
		                   to_string(it.mode);
		report.labels.push_back(lead);
		if (!done[i]) {
			++report.interrupted;
			continue;
		}
		const auto& r = report.sweeps[i];
		double secs = 0;
		for (const auto& p : r.points) {
			points << lead << "," << p.percent << "," << to_string(p.status) << "," << fmt(p.seconds) << ","
			       << p.jobs << "," << p.memory_bytes << "\n";
			secs += p.seconds;
		}
		std::string anomalies;
		for (auto a : r.anomalies)
			anomalies += (anomalies.empty() ? "" : " ") + std::to_string(a);
		sweeps << lead << "," << r.max_percent << "," << r.points.size() << "," << anomalies << "," << fmt(secs)
		       << "\n";
		std::string g = std::string(to_string(spec.experiment)) + "," + to_string(k.setting) + "," +
		                std::to_string(k.cores) + "," + it.jitter.str() + "," + to_string(it.method) + "," +
		                to_string(it.mode);
		if (!groups.count(g))
			group_order.push_back(g);
		groups[g].first.push_back(r.max_percent);
		if (!r.points.empty())
			groups[g].second.push_back(secs / static_cast<double>(r.points.size()));
	}
	summary << "experiment,setting,cores,jitter,method,mode,count,mean,min,q1,median,q3,max,mean_point_seconds\n";
	for (const auto& g : group_order) {
		auto s = summarize(groups[g].first);
		auto t = summarize(groups[g].second);
		summary << g << "," << s.count << "," << fmt(s.mean, 2) << "," << fmt(s.min, 2) << "," << fmt(s.q1, 2)
		        << "," << fmt(s.median, 2) << "," << fmt(s.q3, 2) << "," << fmt(s.max, 2) << ","
		        << fmt(t.mean) << "\n";
	}
	write_file(spec.out_prefix + "_points.csv", points.str());
	write_file(spec.out_prefix + "_sweeps.csv", sweeps.str());
	write_file(spec.out_prefix + "_summary.csv", summary.str());
	if (!report.interrupted)
		std::remove((spec.out_prefix + "_points.partial.csv").c_str());
	return report;
}

}  // namespace ttsched
