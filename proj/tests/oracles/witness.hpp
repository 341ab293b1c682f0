#ifndef TTSCHED_TESTS_WITNESS_HPP
#define TTSCHED_TESTS_WITNESS_HPP

#include <algorithm>
#include <array>
#include <optional>

#include "oracles/brute_force.hpp"
#include "support.hpp"

namespace ttsched::oracle {

// Two chains crossing cores on a 3-core platform:
//   a1 (core 0, p 9) -> a5 (port of core 2) -> a2 (core 2)
//   a3 (core 1, p 6) -> a6 (port of core 2) -> a4 (core 2)
// Ids 0..5 stand for a1..a6. a2 and a5 may jitter by 2, the rest by 0.
inline Instance crossing_chains(const std::array<Time, 6>& e)
{
	auto inst = testing::make_instance(
	    6, {{9, e[0], 0, 0}, {9, e[1], 2, 2}, {6, e[2], 0, 1}, {6, e[3], 0, 2}, {9, e[4], 2, 5, true}, {6, e[5], 0, 5, true}},
	    {{0, 4}, {4, 1}, {2, 5}, {5, 3}}, {{0, 4, 1}, {2, 5, 3}});
	inst.activities[4].sender = 0;
	inst.activities[4].receiver = 1;
	inst.activities[5].sender = 2;
	inst.activities[5].receiver = 3;
	return inst;
}

// Execution times in 1..4 ordered by (largest e, total e, lexicographic);
// the first vector whose instance enumeration proves ZJ-infeasible and
// JC-feasible.
inline std::optional<std::array<Time, 6>> find_crossing_witness()
{
	std::vector<std::array<Time, 6>> all;
	std::array<Time, 6> e{};
	auto rec = [&](auto&& self, std::size_t k) -> void {
		if (k == 6) {
			all.push_back(e);
			return;
		}
		for (Time v = 1; v <= 4; ++v) {
			e[k] = v;
			self(self, k + 1);
		}
	};
	rec(rec, 0);
	auto key = [](const std::array<Time, 6>& x) {
		Time sum = 0;
		for (auto v : x)
			sum += v;
		return std::make_tuple(*std::max_element(x.begin(), x.end()), sum, x);
	};
	std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
	for (const auto& x : all) {
		auto inst = crossing_chains(x);
		auto zj = enumerate(inst, true);
		if (zj.feasible || zj.exhausted_budget)
			continue;
		if (enumerate(inst, false).feasible)
			return x;
	}
	return std::nullopt;
}

// Result of the search above, pinned.
inline constexpr std::array<Time, 6> crossing_witness{1, 1, 2, 1, 2, 2};

}  // namespace ttsched::oracle

#endif
