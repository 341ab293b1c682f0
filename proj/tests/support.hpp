#ifndef TTSCHED_TESTS_SUPPORT_HPP
#define TTSCHED_TESTS_SUPPORT_HPP

#include <vector>

#include "ttsched/core_model.hpp"

namespace ttsched::testing {

struct Act {
	Time p, e, jit;
	ResourceId r;
	bool message = false;
};

inline Instance make_instance(std::size_t resources, const std::vector<Act>& acts,
                              const std::vector<std::pair<ActivityId, ActivityId>>& edges = {},
                              std::vector<std::vector<ActivityId>> chains = {})
{
	Instance inst;
	inst.platform.resources = resources;
	for (std::size_t i = 0; i < acts.size(); ++i) {
		Activity a;
		a.id = i;
		a.kind = acts[i].message ? ActivityKind::Message : ActivityKind::Task;
		a.period = acts[i].p;
		a.exec = acts[i].e;
		a.jitter = acts[i].jit;
		a.resource = acts[i].r;
		inst.activities.push_back(a);
	}
	inst.dag = PrecedenceDag(acts.size(), edges);
	inst.chains = std::move(chains);
	return inst;
}

// Ten activities with periods 9, 6 and 18 joined by three short chains, one
// core, all e = 1.
inline Instance ten_chain_instance(std::size_t core_of_a10 = 0)
{
	std::vector<Act> acts(10, Act{9, 1, 9, 0});
	for (auto i : {2, 5, 3, 6})
		acts[i].p = acts[i].jit = 6;
	acts[9].p = acts[9].jit = 18;
	acts[9].r = core_of_a10;
	return make_instance(6, acts, {{2, 5}, {5, 3}, {5, 6}, {0, 4}, {4, 1}, {8, 7}, {7, 1}});
}

}  // namespace ttsched::testing

#endif
