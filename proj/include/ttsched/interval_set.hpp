#ifndef TTSCHED_INTERVAL_SET_HPP
#define TTSCHED_INTERVAL_SET_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ttsched/core_model.hpp"

namespace ttsched {

// Sorted, disjoint, non-adjacent closed integer intervals.
class IntervalSet {
public:
	using Interval = std::pair<Time, Time>;

	IntervalSet() = default;
	IntervalSet(Time lo, Time hi);
	static IntervalSet from(std::vector<Interval> parts);

	bool empty() const { return parts_.empty(); }
	const std::vector<Interval>& intervals() const { return parts_; }
	std::size_t size() const { return parts_.size(); }
	Time min() const { return parts_.front().first; }
	Time max() const { return parts_.back().second; }
	bool contains(Time t) const;
	std::uint64_t cardinality() const;

	// Least member >= t.
	std::optional<Time> next(Time t) const;

	void subtract(Time lo, Time hi);
	void clamp(Time lo, Time hi);
	void unite(Time lo, Time hi);

	bool operator==(const IntervalSet& other) const { return parts_ == other.parts_; }
	std::string str() const;

private:
	std::vector<Interval> parts_;
};

}  // namespace ttsched

#endif
