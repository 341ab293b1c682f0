#include <algorithm>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "ttsched/generator.hpp"
#include "ttsched/io.hpp"
#include "ttsched/mapper.hpp"
#include "ttsched/validator.hpp"

using namespace ttsched;
using ttsched::testing::make_instance;

namespace {

std::size_t count_tasks(const Instance& inst)
{
	return static_cast<std::size_t>(
	    std::count_if(inst.activities.begin(), inst.activities.end(), [](const Activity& a) { return a.is_task(); }));
}

Instance set_instance(int set, std::uint64_t seed)
{
	GenParams g;
	g.set_id = set;
	g.seed = seed;
	return generate(g);
}

}  // namespace

TEST_CASE("table rows")
{
	CHECK(set_row(1).tasks == 20);
	CHECK(set_row(1).periods_ms == std::vector<Time>{1, 2, 5, 10});
	CHECK(set_row(1).accesses_per_task == 4);
	CHECK(set_row(2).tasks == 30);
	CHECK(set_row(3).tasks == 50);
	CHECK(set_row(3).periods_ms == std::vector<Time>{1, 2, 5, 10, 20, 50, 100});
	CHECK(set_row(4).tasks == 100);
	CHECK(set_row(5).tasks == 500);
	CHECK(set_row(5).accesses_per_task == 8);
	CHECK(set_row(1).min_activities == 30);
	CHECK(set_row(5).max_activities == 2000);
	CHECK_THROWS_AS(set_row(6), ParamError);
}

TEST_CASE("set 1 instance shape")
{
	auto inst = set_instance(1, 3);
	CHECK(count_tasks(inst) == 20);
	for (const auto& a : inst.activities) {
		bool in_menu = a.period == 1000 || a.period == 2000 || a.period == 5000 || a.period == 10000;
		CHECK(in_menu);
		CHECK(a.exec >= 1);
		CHECK(a.exec <= a.period);
		if (a.is_message()) {
			REQUIRE(a.sender);
			CHECK(a.period == inst.activities[*a.sender].period);
			CHECK(a.exec == message_exec_time(a.size_bytes, inst.platform));
		}
	}
	CHECK(inst.platform.resources == 6);
	CHECK_NOTHROW(inst.check());
}

TEST_CASE("set 5 has 500 tasks")
{
	CHECK(count_tasks(set_instance(5, 1)) == 500);
}

TEST_CASE("a fixed seed gives the same instance")
{
	auto a = instance_to_json(set_instance(2, 17));
	auto b = instance_to_json(set_instance(2, 17));
	CHECK(a == b);
	CHECK(a != instance_to_json(set_instance(2, 18)));
}

TEST_CASE("chains are equal-period paths of at most 11 tasks")
{
	for (std::uint64_t seed = 1; seed <= 10; ++seed) {
		auto inst = set_instance(3, seed);
		REQUIRE_FALSE(inst.chains.empty());
		for (const auto& chain : inst.chains) {
			std::size_t tasks = 0;
			for (std::size_t k = 0; k < chain.size(); ++k) {
				CHECK(inst.activities[chain[k]].period == inst.activities[chain.front()].period);
				tasks += inst.activities[chain[k]].is_task();
				if (k > 0)
					CHECK(inst.dag.has_edge(chain[k - 1], chain[k]));
			}
			CHECK(tasks >= 2);
			CHECK(tasks <= 11);
		}
		for (auto [u, v] : inst.dag.edges())
			CHECK(inst.activities[u].period == inst.activities[v].period);
	}
}

TEST_CASE("mapped activity counts land in the expected ranges")
{
	// Set 3 mixes 1 ms and 100 ms periods; balanced mappings then differ a
	// lot in how many tasks share a core, so its spread is wider.
	const std::vector<std::pair<int, int>> floors{{1, 17}, {2, 17}, {3, 13}, {4, 17}};
	for (auto [set, floor] : floors) {
		const auto& row = set_row(set);
		int inside = 0;
		for (int seed = 1; seed <= 20; ++seed) {
			auto mapped = map_instance(set_instance(set, static_cast<std::uint64_t>(seed)), true,
			                           std::chrono::milliseconds(500));
			inside += mapped.size() >= row.min_activities && mapped.size() <= row.max_activities;
		}
		INFO("set " << set << ": " << inside << " of 20");
		CHECK(inside >= floor);
	}
}

TEST_CASE("generation rejects bad parameters")
{
	GenParams g;
	g.set_id = 9;
	CHECK_THROWS_AS(generate(g), ParamError);
	g.set_id = 1;
	g.tasks = 0;
	CHECK_THROWS_AS(generate(g), ParamError);
	g.tasks.reset();
	g.read_share = 1.5;
	CHECK_THROWS_AS(generate(g), ParamError);
}

TEST_CASE("jitter policies")
{
	CHECK(JitterPolicy::parse("p/2").kind == JitterPolicy::Kind::Half);
	CHECK(JitterPolicy::parse("p/10").str() == "p/10");
	CHECK(JitterPolicy::parse("zero").kind == JitterPolicy::Kind::Zero);
	CHECK(JitterPolicy::parse("zj:0.85").fraction == doctest::Approx(0.85));
	CHECK(JitterPolicy::parse("zj:0.85").str() == "zj:0.85");
	CHECK_THROWS_AS(JitterPolicy::parse("p/3"), ParamError);
	CHECK_THROWS_AS(JitterPolicy::parse("zj:2"), ParamError);

	auto inst = make_instance(2, {{10, 1, 0, 0}, {25, 1, 0, 0}});
	apply_jitter(inst, JitterPolicy::parse("p/2"));
	CHECK(inst.activities[0].jitter == 5);
	CHECK(inst.activities[1].jitter == 12);
	apply_jitter(inst, JitterPolicy::parse("p/5"));
	CHECK(inst.activities[1].jitter == 5);
	apply_jitter(inst, JitterPolicy::parse("0"));
	CHECK(inst.activities[1].jitter == 0);
}

TEST_CASE("zero-jitter selection takes the most jobs first")
{
	// H = 20: job counts 2, 4, 1, 4, 2 out of 13.
	auto inst = make_instance(2, {{10, 1, 0, 0}, {5, 1, 0, 0}, {20, 1, 0, 0}, {5, 1, 0, 0}, {10, 1, 0, 0}});
	CHECK(zero_jitter_selection(inst, 0.0) == std::vector<bool>{false, false, false, false, false});
	// 4 of 13 jobs reach 30%.
	CHECK(zero_jitter_selection(inst, 0.30) == std::vector<bool>{false, true, false, false, false});
	CHECK(zero_jitter_selection(inst, 0.5) == std::vector<bool>{false, true, false, true, false});
	CHECK(zero_jitter_selection(inst, 0.7) == std::vector<bool>{true, true, false, true, false});
	CHECK(zero_jitter_selection(inst, 1.0) == std::vector<bool>{true, true, true, true, true});

	apply_jitter(inst, JitterPolicy::parse("zj:0.5"));
	CHECK(inst.activities[1].jitter == 0);
	CHECK(inst.activities[0].jitter == 2);
}

TEST_CASE("scaling to a utilization")
{
	auto inst = make_instance(6, {{100, 20, 0, 0}, {200, 60, 0, 0}, {100, 10, 0, 1}, {100, 5, 0, 3, true}});
	SUBCASE("half load raised to three quarters")
	{
		auto out = scale_to_utilization(inst, 0.75);
		CHECK(out.activities[0].exec == 30);
		CHECK(out.activities[1].exec == 90);
		CHECK(utilization(out)[0] == doctest::Approx(0.75));
		CHECK(utilization(out)[1] == doctest::Approx(0.75));
	}
	SUBCASE("current utilization is kept")
	{
		auto out = scale_to_utilization(inst, 0.5);
		CHECK(out.activities[0].exec == 20);
		CHECK(out.activities[1].exec == 60);
	}
	SUBCASE("ports follow only when asked")
	{
		CHECK(scale_to_utilization(inst, 0.3).activities[3].exec == 5);
		CHECK(scale_to_utilization(inst, 0.3, 0.01, ScaleScope::AllResources).activities[3].exec == 30);
	}
	SUBCASE("unit jobs cannot go below one tick")
	{
		auto tiny = make_instance(2, {{10, 1, 0, 0}, {10, 1, 0, 0}});
		CHECK_THROWS_AS(scale_to_utilization(tiny, 0.1), ScaleError);
		CHECK_NOTHROW(scale_to_utilization(tiny, 0.2));
	}
	SUBCASE("bad targets")
	{
		CHECK_THROWS_AS(scale_to_utilization(inst, 0.0), ScaleError);
		CHECK_THROWS_AS(scale_to_utilization(inst, 1.2), ScaleError);
	}
}

TEST_CASE("generated sets scale within one point")
{
	for (std::uint64_t seed = 1; seed <= 5; ++seed) {
		auto mapped = map_instance(set_instance(3, seed), false);
		for (double u : {0.2, 0.55, 0.9}) {
			auto out = scale_to_utilization(mapped, u);
			auto r = utilization(out);
			for (ResourceId y = 0; y < out.platform.core_count(); ++y)
				if (r[y] > 0)
					CHECK(std::abs(r[y] - u) <= 0.01);
		}
	}
}

TEST_CASE("period rewrites")
{
	auto inst = make_instance(2, {{1000, 10, 200, 0}, {2000, 10, 400, 0}, {5000, 10, 1000, 0}, {10000, 10, 2000, 0}});
	auto periods = [](const Instance& x) {
		std::vector<Time> p;
		for (const auto& a : x.activities)
			p.push_back(a.period / ticks_per_ms);
		return p;
	};
	CHECK(periods(rewrite_periods(inst, PeriodSetting::Initial)) == std::vector<Time>{1, 2, 5, 10});
	CHECK(periods(rewrite_periods(inst, PeriodSetting::Mono)) == std::vector<Time>{10, 10, 10, 10});
	CHECK(periods(rewrite_periods(inst, PeriodSetting::Harmonic)) == std::vector<Time>{1, 5, 5, 10});
	auto nh = rewrite_periods(inst, PeriodSetting::NonHarmonic);
	CHECK(periods(nh) == std::vector<Time>{2, 5, 7, 12});
	// p/5 stays p/5.
	CHECK(nh.activities[2].jitter == 1400);
	CHECK(parse_period_setting("non-harmonic") == PeriodSetting::NonHarmonic);
	CHECK_THROWS_AS(parse_period_setting("odd"), ParamError);
	auto odd = make_instance(2, {{20000, 10, 0, 0}});
	CHECK_THROWS_AS(rewrite_periods(odd, PeriodSetting::NonHarmonic), ParamError);
}

TEST_CASE("engine management case study")
{
	auto inst = ems_case_study(1);
	CHECK(count_tasks(inst) == 2000);
	CHECK(hyper_period(inst) == 100 * ticks_per_ms);
	CHECK(inst.chains.size() == 60);
	auto mapped = map_instance(inst, false);
	auto jobs = derive_bounds(mapped).total_jobs();
	// Order of 10^5 jobs.
	CHECK(jobs >= 90000);
	CHECK(jobs <= 120000);
	auto r = utilization(mapped);
	for (ResourceId y = 0; y < 3; ++y) {
		CHECK(r[y] == doctest::Approx(0.896).epsilon(0.05));
		CHECK(std::abs(r[3 + y] - 0.30) <= 0.10);
	}
}
