#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ttsched/exact_solver.hpp"
#include "ttsched/experiments.hpp"
#include "ttsched/generator.hpp"
#include "ttsched/heuristic.hpp"
#include "ttsched/io.hpp"
#include "ttsched/mapper.hpp"
#include "ttsched/validator.hpp"

using namespace ttsched;

namespace {

enum Exit { ok = 0, infeasible = 1, timeout = 2, input_error = 3 };

std::atomic<bool> interrupted{false};

extern "C" void on_sigint(int)
{
	// A second Ctrl-C kills the process outright.
	if (interrupted.exchange(true)) {
		std::signal(SIGINT, SIG_DFL);
		std::raise(SIGINT);
	}
}

Instance load_instance(const std::string& path)
{
	return instance_from_json(read_file(path));
}

void emit(const std::string& path, const std::string& text)
{
	if (path.empty() || path == "-")
		std::cout << text;
	else
		write_file(path, text);
}

Instance require_mapped(const Instance& inst)
{
	if (!inst.is_mapped())
		throw InputError("instance has no mapping; run 'ttsched map' first");
	return inst;
}

BranchRule parse_branching(const std::string& text)
{
	if (text == "min-slack")
		return BranchRule::MinSlack;
	if (text == "window")
		return BranchRule::WindowOrder;
	if (text == "alternating")
		return BranchRule::Alternating;
	throw ParamError("unknown branching '" + text + "' (alternating, window, min-slack)");
}

// Jitter and utilization adjustments shared by solve, sweep and export.
struct Prep {
	std::string jit;
	double util = 0;

	void add(CLI::App* app, bool with_util = true)
	{
		app->add_option("--jit", jit, "jitter policy applied first: p/2, p/5, p/10, 0, zj:<fraction>");
		if (with_util)
			app->add_option("--util", util, "scale core loads to this utilization first (0 < u <= 1)");
	}
	Instance apply(Instance inst) const
	{
		if (!jit.empty())
			apply_jitter(inst, JitterPolicy::parse(jit));
		if (util > 0)
			inst = scale_to_utilization(inst, util);
		return inst;
	}
};

std::string seconds(double s)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.3f", s);
	return buf;
}

}  // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Time-triggered scheduling with jitter requirements"};
	app.require_subcommand(1);
	app.set_help_all_flag("--help-all");

	// generate
	GenParams gen;
	std::string gen_out, gen_jit;
	bool gen_ems = false;
	auto* g = app.add_subcommand("generate", "draw a synthetic instance (unmapped)");
	g->add_option("--set", gen.set_id, "generator set 1-5")->check(CLI::Range(1, 5));
	g->add_option("--seed", gen.seed, "random seed");
	g->add_option("--cores", gen.cores, "core count")->check(CLI::PositiveNumber);
	g->add_option("--jit", gen_jit, "jitter policy (default p/5)");
	g->add_flag("--ems", gen_ems, "engine management case study instead of a set");
	g->add_option("-o,--out", gen_out, "output file (stdout if omitted)");

	// map
	std::string map_in, map_out, map_method = "exact";
	double map_limit = 10;
	auto* mp = app.add_subcommand("map", "assign tasks to cores and messages to ports");
	mp->add_option("instance", map_in, "instance JSON")->required();
	mp->add_option("--method", map_method, "exact or greedy")->check(CLI::IsMember({"exact", "greedy"}));
	mp->add_option("--time-limit", map_limit, "seconds for the exact mapping");
	mp->add_option("-o,--out", map_out, "output file (stdout if omitted)");

	// solve
	std::string solve_in, solve_out, solve_csv, solve_method = "exact", solve_mode = "jc", solve_branch = "alternating";
	double solve_limit = 3000;
	Prep solve_prep;
	auto* sv = app.add_subcommand("solve", "schedule a mapped instance");
	sv->add_option("instance", solve_in, "mapped instance JSON")->required();
	sv->add_option("--method", solve_method, "exact or 3ls")->check(CLI::IsMember({"exact", "3ls"}));
	sv->add_option("--mode", solve_mode, "zj or jc")->check(CLI::IsMember({"zj", "jc"}));
	sv->add_option("--time-limit", solve_limit, "seconds");
	sv->add_option("--branching", solve_branch, "exact search rule: alternating, window, min-slack");
	solve_prep.add(sv);
	sv->add_option("-o,--out", solve_out, "schedule JSON");
	sv->add_option("--csv", solve_csv, "schedule CSV");

	// validate
	std::string val_in, val_sched;
	auto* vl = app.add_subcommand("validate", "check a schedule against its instance");
	vl->add_option("instance", val_in, "mapped instance JSON")->required();
	vl->add_option("schedule", val_sched, "schedule JSON")->required();

	// sweep
	std::string sw_in, sw_method = "exact", sw_mode = "jc", sw_branch = "alternating";
	SweepOptions sw_opt;
	double sw_limit = 3000;
	Prep sw_prep;
	auto* sw = app.add_subcommand("sweep", "raise the utilization until the first failure");
	sw->add_option("instance", sw_in, "mapped instance JSON")->required();
	sw->add_option("--method", sw_method, "exact or 3ls")->check(CLI::IsMember({"exact", "3ls"}));
	sw->add_option("--mode", sw_mode, "zj or jc")->check(CLI::IsMember({"zj", "jc"}));
	sw->add_option("--start", sw_opt.start_percent, "first point in percent");
	sw->add_option("--step", sw_opt.step_percent, "step in percent")->check(CLI::PositiveNumber);
	sw->add_option("--stop", sw_opt.stop_percent, "last point in percent");
	sw->add_option("--diagnostic", sw_opt.diagnostic_points, "points to try past the first failure");
	sw->add_option("--time-limit", sw_limit, "seconds per point");
	sw->add_option("--branching", sw_branch, "exact search rule");
	sw_prep.add(sw, false);

	// experiment
	std::string ex_name, ex_branch = "alternating";
	std::vector<std::string> ex_methods{"exact", "3ls"}, ex_jits;
	ExperimentSpec ex;
	double ex_limit = -1;
	std::size_t ex_workers = 0;
	auto* xp = app.add_subcommand("experiment", "run one of the experiment drivers");
	xp->add_option("name", ex_name, "jitter-sweep, zj-fraction-sweep, period-study, scale-study, ems")->required();
	xp->add_option("--sets", ex.sets, "generator sets")->check(CLI::Range(1, 5));
	xp->add_option("--seeds", ex.seeds, "seeds");
	xp->add_option("--cores", ex.cores, "core counts");
	xp->add_option("--methods", ex_methods, "exact, 3ls");
	xp->add_option("--jit", ex_jits, "jitter policies (default: the experiment's menu)");
	xp->add_option("--zj-step", ex.zj_step_percent, "zero-jitter fraction step in percent");
	xp->add_option("--start", ex.sweep.start_percent, "first point in percent");
	xp->add_option("--step", ex.sweep.step_percent, "step in percent")->check(CLI::PositiveNumber);
	xp->add_option("--time-limit", ex_limit, "seconds per point (default TTSCHED_TIME_LIMIT or 3000)");
	xp->add_option("--workers", ex_workers, "threads (default TTSCHED_WORKERS or all cores)");
	xp->add_option("--branching", ex_branch, "exact search rule");
	xp->add_option("--out", ex.out_prefix, "prefix of the CSV reports");

	// export
	std::string exp_in, exp_out, exp_format = "smt2", exp_mode = "jc";
	bool exp_plain = false;
	Prep exp_prep;
	auto* xo = app.add_subcommand("export", "write the exact model for an external solver");
	xo->add_option("instance", exp_in, "mapped instance JSON")->required();
	xo->add_option("--format", exp_format, "smt2 or lp")->check(CLI::IsMember({"smt2", "lp"}));
	xo->add_option("--mode", exp_mode, "zj or jc")->check(CLI::IsMember({"zj", "jc"}));
	xo->add_flag("--no-improvements", exp_plain, "emit the model without the four reductions");
	exp_prep.add(xo);
	xo->add_option("-o,--out", exp_out, "output file (stdout if omitted)");

	// gantt
	std::string gt_in, gt_sched, gt_out;
	auto* gt = app.add_subcommand("gantt", "render a schedule as SVG");
	gt->add_option("instance", gt_in, "mapped instance JSON")->required();
	gt->add_option("schedule", gt_sched, "schedule JSON")->required();
	gt->add_option("-o,--out", gt_out, "SVG file (stdout if omitted)");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		int code = app.exit(e);
		return code == 0 ? ok : input_error;
	}
	std::signal(SIGINT, on_sigint);

	try {
		if (*g) {
			Instance inst;
			if (gen_ems) {
				inst = ems_case_study(gen.seed);
			} else {
				if (!gen_jit.empty())
					gen.jitter = JitterPolicy::parse(gen_jit);
				inst = generate(gen);
			}
			emit(gen_out, instance_to_json(inst));
			return ok;
		}
		if (*mp) {
			auto limit = std::chrono::milliseconds(static_cast<long long>(map_limit * 1000));
			auto mapped = map_instance(load_instance(map_in), map_method == "exact", limit);
			auto r = utilization(mapped);
			std::cerr << "activities " << mapped.size() << ", loads";
			for (double u : r)
				std::cerr << " " << seconds(u);
			std::cerr << "\n";
			emit(map_out, instance_to_json(mapped));
			return ok;
		}
		if (*sv) {
			auto inst = solve_prep.apply(require_mapped(load_instance(solve_in)));
			auto limit = std::chrono::milliseconds(static_cast<long long>(solve_limit * 1000));
			auto out = solve_checked(inst, parse_method(solve_method), parse_mode(solve_mode), limit,
			                         parse_branching(solve_branch), &interrupted);
			std::cout << to_string(out.status) << " in " << seconds(out.seconds) << " s";
			if (!out.detail.empty())
				std::cout << " (" << out.detail << ")";
			std::cout << "\n";
			if (out.schedule) {
				std::cout << "schedule memory " << schedule_memory_bytes(inst, *out.schedule) << " bytes\n";
				if (!solve_out.empty())
					write_file(solve_out, schedule_to_json(inst, *out.schedule));
				if (!solve_csv.empty())
					write_file(solve_csv, schedule_to_csv(inst, *out.schedule));
			}
			switch (out.status) {
			case PointStatus::Feasible: return ok;
			case PointStatus::Timeout: return timeout;
			default: return infeasible;
			}
		}
		if (*vl) {
			auto inst = require_mapped(load_instance(val_in));
			auto s = schedule_from_json(read_file(val_sched), inst);
			auto rep = validate(inst, s);
			if (rep.ok) {
				std::cout << "valid\n";
				return ok;
			}
			std::cout << rep.violations.size() << " violations\n";
			for (const auto& v : rep.violations)
				std::cout << to_string(v.kind) << " activity " << v.activity << " job " << v.job << ": " << v.detail
				          << "\n";
			return infeasible;
		}
		if (*sw) {
			auto inst = sw_prep.apply(require_mapped(load_instance(sw_in)));
			sw_opt.time_limit = std::chrono::milliseconds(static_cast<long long>(sw_limit * 1000));
			sw_opt.branching = parse_branching(sw_branch);
			sw_opt.stop = &interrupted;
			auto r = max_util_sweep(inst, parse_method(sw_method), parse_mode(sw_mode), sw_opt, sw_in);
			std::cout << "percent,status,seconds,jobs,memory_bytes\n";
			for (const auto& p : r.points)
				std::cout << p.percent << "," << to_string(p.status) << "," << seconds(p.seconds) << "," << p.jobs
				          << "," << p.memory_bytes << "\n";
			std::cout << "max " << r.max_percent << "%\n";
			for (int a : r.anomalies)
				std::cout << "anomaly: feasible at " << a << "% after the first failure\n";
			if (interrupted)
				return timeout;
			return r.max_percent > 0 ? ok : infeasible;
		}
		if (*xp) {
			ex.experiment = parse_experiment(ex_name);
			ex.methods.clear();
			for (const auto& m : ex_methods)
				ex.methods.push_back(parse_method(m));
			for (const auto& j : ex_jits)
				ex.jitters.push_back(JitterPolicy::parse(j));
			ex.sweep.time_limit = ex_limit > 0 ? std::chrono::milliseconds(static_cast<long long>(ex_limit * 1000))
			                                   : default_time_limit(std::chrono::seconds(3000));
			ex.sweep.branching = parse_branching(ex_branch);
			ex.workers = ex_workers ? ex_workers : default_workers();
			auto rep = run_experiment(ex, &interrupted);
			std::cout << rep.sweeps.size() - rep.interrupted << " sweeps written to " << ex.out_prefix << "_*.csv\n";
			if (rep.interrupted) {
				std::cout << rep.interrupted << " sweeps interrupted; partial points in " << ex.out_prefix
				          << "_points.partial.csv\n";
				return timeout;
			}
			return ok;
		}
		if (*xo) {
			auto inst = exp_prep.apply(require_mapped(load_instance(exp_in)));
			BuildOptions bo;
			bo.mode = parse_mode(exp_mode);
			bo.improvements = exp_plain ? Improvements::none() : Improvements::all();
			bo.throw_on_empty_window = false;
			auto model = build_model(inst, derive_bounds(inst), bo);
			if (model.empty_window)
				std::cerr << "warning: some job has an empty window; the model is infeasible\n";
			emit(exp_out, exp_format == "smt2" ? export_smtlib(model) : export_lp(model));
			return ok;
		}
		if (*gt) {
			auto inst = require_mapped(load_instance(gt_in));
			emit(gt_out, render_gantt(inst, schedule_from_json(read_file(gt_sched), inst)));
			return ok;
		}
	} catch (const InputError& e) {
		std::cerr << "input error: " << e.what() << "\n";
		return input_error;
	} catch (const ParamError& e) {
		std::cerr << "bad parameter: " << e.what() << "\n";
		return input_error;
	} catch (const ScaleError& e) {
		std::cerr << "cannot scale: " << e.what() << "\n";
		return input_error;
	} catch (const ModelError& e) {
		std::cerr << "invalid instance: " << e.what() << "\n";
		return input_error;
	} catch (const SoundnessError& e) {
		std::cerr << "internal error: " << e.what() << "\n";
		return 4;
	}
	return ok;
}
