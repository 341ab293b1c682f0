#include <random>

#include "doctest.h"
#include "oracles/brute_force.hpp"
#include "oracles/random_instances.hpp"
#include "support.hpp"
#include "ttsched/heuristic.hpp"
#include "ttsched/validator.hpp"

using namespace ttsched;
using testing::make_instance;

namespace {

std::vector<std::vector<std::pair<Time, Time>>> as_pairs(const std::vector<IntervalSet>& dom)
{
	std::vector<std::vector<std::pair<Time, Time>>> out;
	for (const auto& d : dom)
		out.push_back(d.intervals());
	return out;
}

Time sum(const std::vector<Time>& v)
{
	Time s = 0;
	for (auto x : v)
		s += x;
	return s;
}

}  // namespace

TEST_CASE("interval set basics")
{
	auto s = IntervalSet(4, 16);
	s.subtract(6, 6);
	s.subtract(-100, 4);
	CHECK(s.str() == "{[5, 5] u [7, 16]}");
	CHECK(s.cardinality() == 11);
	CHECK(*s.next(6) == 7);
	CHECK(*s.next(0) == 5);
	CHECK_FALSE(s.next(17).has_value());
	CHECK(s.contains(5));
	CHECK_FALSE(s.contains(6));
	s.unite(6, 6);
	CHECK(s == IntervalSet(5, 16));
	s.clamp(8, 9);
	CHECK(s == IntervalSet(8, 9));
	CHECK(IntervalSet(3, 2).empty());
}

TEST_CASE("initial domains")
{
	auto inst = testing::ten_chain_instance();
	auto b = derive_bounds(inst);
	CHECK(initial_domain(inst, b, 1, 0, DomainWindow::TwoPeriods) == IntervalSet(4, 16));

	auto plain = make_instance(2, {{10, 1, 10, 0}});
	auto pb = derive_bounds(plain);
	CHECK(initial_domain(plain, pb, 0, 0, DomainWindow::OnePeriod) == IntervalSet(0, 8));
	CHECK(initial_domain(plain, pb, 0, 0, DomainWindow::TwoPeriods) == IntervalSet(0, 18));

	// e = p: the -1 on the right end leaves nothing in one period.
	auto full = make_instance(2, {{5, 5, 0, 0}});
	auto fb = derive_bounds(full);
	CHECK(initial_domain(full, fb, 0, 0, DomainWindow::OnePeriod).empty());
	CHECK(initial_domain(full, fb, 0, 0, DomainWindow::TwoPeriods) == IntervalSet(0, 4));
	auto r = run_3ls(full, {.window = DomainWindow::OnePeriod});
	CHECK(r.status == HeuristicStatus::Fail);
}

TEST_CASE("running example: a2 after a8@4 and a10@6")
{
	auto inst = testing::ten_chain_instance();
	auto b = derive_bounds(inst);
	SchedState st(inst, b, DomainWindow::TwoPeriods);
	CHECK(st.domain(1, 0) == IntervalSet(4, 16));
	st.insert(7, {4, 17});
	st.insert(9, {6});
	CHECK(st.domain(1, 0).str() == "{[5, 5] u [7, 16]}");
	CHECK(st.domain(1, 0) == st.domain_naive(1, 0));

	auto s = sub_model(st, 1);
	REQUIRE(s.has_value());
	CHECK((*s)[0] == 5);
}

TEST_CASE("insert trims co-mapped and successor domains")
{
	auto inst = make_instance(2, {{10, 1, 10, 0}, {10, 1, 10, 0}, {10, 2, 10, 0}}, {{0, 2}});
	auto b = derive_bounds(inst);
	SchedState st(inst, b, DomainWindow::TwoPeriods);
	auto before = st.domain(1, 0);
	st.insert(0, {4});
	CHECK(before.contains(4));
	CHECK_FALSE(st.domain(1, 0).contains(4));
	CHECK(st.domain(1, 0).contains(3));
	CHECK(st.domain(1, 0).contains(5));
	// e = 2 successor: its start must be >= 5 and its span must miss [4, 5).
	CHECK(st.domain(2, 0).min() == 5);
	CHECK(st.domain(2, 0) == st.domain_naive(2, 0));

	auto removed = st.unschedule(0);
	CHECK(removed == std::vector<ActivityId>{0});
	CHECK(st.domain(1, 0) == before);
}

TEST_CASE("sub-model examples")
{
	SUBCASE("single job, earliest point")
	{
		auto s = min_sum_starts({IntervalSet(3, 9)}, 20, 1, 20, 20, false);
		REQUIRE(s.has_value());
		CHECK((*s)[0] == 3);
	}
	SUBCASE("zero jitter pair of jobs")
	{
		const Time p = 10;
		auto s = min_sum_starts({IntervalSet(0, 4), IntervalSet(p + 2, p + 6)}, p, 1, 0, 2 * p);
		REQUIRE(s.has_value());
		CHECK(*s == std::vector<Time>{2, p + 2});
		auto brute = oracle::min_start_sum({{{0, 4}}, {{p + 2, p + 6}}}, p, 1, 0, 2 * p);
		CHECK(brute == sum(*s));
	}
	SUBCASE("greedy without jitter skips to the previous finish")
	{
		auto s = min_sum_starts({IntervalSet(0, 6), IntervalSet::from({{2, 3}, {8, 12}})}, 10, 4, 10, 20, false);
		REQUIRE(s.has_value());
		CHECK(*s == std::vector<Time>{0, 8});
	}
	SUBCASE("infeasible")
	{
		auto s = min_sum_starts({IntervalSet(0, 1), IntervalSet(15, 16)}, 10, 1, 1, 20);
		CHECK_FALSE(s.has_value());
	}
}

TEST_CASE("least solution minimizes the start sum")
{
	std::mt19937_64 rng(7);
	std::size_t compared = 0;
	for (int round = 0; round < 300; ++round) {
		std::uniform_int_distribution<Time> pd(4, 9), jd(0, 2), nd(1, 6), parts(1, 4);
		Time p = pd(rng), jit = jd(rng);
		Time e = std::uniform_int_distribution<Time>(1, p / 2)(rng);
		std::size_t n = static_cast<std::size_t>(nd(rng));
		Time h = p * static_cast<Time>(n);
		std::vector<IntervalSet> dom;
		for (std::size_t j = 0; j < n; ++j) {
			IntervalSet d(static_cast<Time>(j) * p, static_cast<Time>(j + 2) * p - e - 1);
			auto holes = parts(rng) - 1;
			for (Time k = 0; k < holes; ++k) {
				Time c = std::uniform_int_distribution<Time>(d.min(), d.max())(rng);
				d.subtract(c, c + std::uniform_int_distribution<Time>(0, 2)(rng));
			}
			dom.push_back(d);
		}
		auto got = min_sum_starts(dom, p, e, jit, h);
		auto want = oracle::min_start_sum(as_pairs(dom), p, e, jit, h);
		REQUIRE(got.has_value() == want.has_value());
		if (got) {
			CHECK(sum(*got) == *want);
			++compared;
		}
	}
	CHECK(compared > 100);
}

TEST_CASE("unschedule rule")
{
	// Activities 1..3 share core 0 with activity 0, which is a_c.
	auto inst = make_instance(2, {{10, 1, 0, 0}, {10, 1, 10, 0}, {10, 1, 10, 0}, {10, 1, 0, 0}, {10, 1, 10, 1}},
	                          {{2, 4}});
	auto b = derive_bounds(inst);

	SUBCASE("step 1 takes the largest slack")
	{
		b.slack = {9, 5, 7, 8, 9};
		SchedState st(inst, b, DomainWindow::TwoPeriods);
		st.insert(1, {0});
		st.insert(3, {2});
		CHECK(choose_unschedule(st, 0) == ActivityId{1});
	}
	SUBCASE("step 1 wins over a larger slack that has a scheduled successor")
	{
		b.slack = {9, 3, 7, 8, 9};
		SchedState st(inst, b, DomainWindow::TwoPeriods);
		st.insert(1, {0});
		st.insert(2, {1});
		st.insert(4, {2});
		CHECK(choose_unschedule(st, 0) == ActivityId{1});
	}
	SUBCASE("step 2 when every eligible candidate has scheduled successors")
	{
		b.slack = {9, 3, 7, 8, 9};
		SchedState st(inst, b, DomainWindow::TwoPeriods);
		st.insert(2, {1});
		st.insert(4, {2});
		st.insert(3, {5});
		CHECK(choose_unschedule(st, 0) == ActivityId{2});
	}
	SUBCASE("step 3 below the threshold")
	{
		auto low = inst;
		for (auto& a : low.activities)
			a.jitter = 0;
		auto lb = derive_bounds(low);
		lb.slack = {9, 3, 7, 8, 9};
		lb.inherited_jitter = {0, 4, 4, 2, 0};
		SchedState st(low, lb, DomainWindow::TwoPeriods);
		st.insert(1, {0});
		st.insert(2, {1});
		st.insert(3, {4});
		CHECK(choose_unschedule(st, 0) == ActivityId{2});
	}
	SUBCASE("predecessors of a_c and other resources are never chosen")
	{
		SchedState st(inst, b, DomainWindow::TwoPeriods);
		st.insert(2, {0});
		st.insert(4, {1});
		CHECK(choose_unschedule(st, 4) == std::nullopt);
	}
}

TEST_CASE("priority key")
{
	DerivedBounds b;
	b.slack = {5, 2, 7};
	b.inherited_jitter = {3, 9, 1};
	CHECK(priority_key(b, 0) == std::pair<Time, Time>{3, 5});
	CHECK(priority_key(b, 1) == std::pair<Time, Time>{2, 9});
	CHECK(priority_key(b, 2) == std::pair<Time, Time>{1, 7});
}

TEST_CASE("independent unit activities pack from zero")
{
	auto inst = make_instance(2, {{4, 1, 4, 0}, {4, 1, 4, 0}, {4, 1, 4, 0}, {4, 1, 4, 0}});
	auto r = run_3ls(inst);
	REQUIRE(r.status == HeuristicStatus::Feasible);
	CHECK(r.stats.level1 == 4);
	CHECK(r.stats.level2 == 0);
	std::vector<Time> firsts;
	for (const auto& s : r.schedule->start)
		firsts.push_back(s[0]);
	std::sort(firsts.begin(), firsts.end());
	CHECK(firsts == std::vector<Time>{0, 1, 2, 3});
	CHECK(validate(inst, *r.schedule).ok);
}

TEST_CASE("ten-activity graph on two cores")
{
	auto inst = testing::ten_chain_instance();
	for (auto i : {2, 3, 5, 6})
		inst.activities[i].resource = 1;
	for (auto mode : {ScheduleMode::JitterConstrained, ScheduleMode::ZeroJitter}) {
		auto r = run_3ls(inst, {.mode = mode, .debug_domains = true});
		REQUIRE(r.status == HeuristicStatus::Feasible);
		CHECK(validate(inst, *r.schedule).ok);
		CHECK(r.stats.domain_checks > 0);
	}
}

TEST_CASE("heuristic output is sound and zero-jitter mode is zero-jitter")
{
	std::mt19937_64 rng(2024);
	std::size_t feasible = 0, solved = 0;
	for (int round = 0; round < 120; ++round) {
		auto inst = oracle::tiny_instance(rng);
		for (auto mode : {ScheduleMode::JitterConstrained, ScheduleMode::ZeroJitter}) {
			bool zj = mode == ScheduleMode::ZeroJitter;
			auto r = run_3ls(inst, {.mode = mode, .debug_domains = true});
			auto truth = oracle::enumerate(inst, zj);
			REQUIRE_FALSE(truth.exhausted_budget);
			feasible += truth.feasible;
			if (r.status != HeuristicStatus::Feasible)
				continue;
			++solved;
			CHECK(truth.feasible);
			auto rep = validate(inst, *r.schedule);
			CHECK(rep.ok);
			if (zj)
				for (bool z : is_zero_jitter(inst, *r.schedule))
					CHECK(z);
		}
	}
	MESSAGE("3-LS solved " << solved << " of " << feasible << " feasible cases");
	CHECK(solved * 10 >= feasible * 7);
}

TEST_CASE("a repeated conflict is settled by one pair placement")
{
	// Three zero-jitter p = 4 activities and one p = 6 activity fill a single
	// core. The first clash unschedules one activity; when the clash repeats
	// with that activity already marked problematic, both go in together.
	auto inst = make_instance(2, {{4, 1, 0, 0}, {4, 1, 0, 0}, {6, 1, 1, 0}, {4, 1, 0, 0}}, {{0, 1}, {0, 3}});
	auto r = run_3ls(inst, {.debug_domains = true});
	REQUIRE(r.status == HeuristicStatus::Feasible);
	CHECK(r.stats.level2 == 1);
	CHECK(r.stats.level3 == 0);
	CHECK(r.stats.unschedules == 2);
	CHECK(validate(inst, *r.schedule).ok);
}
