#include "ttsched/interval_set.hpp"

#include <algorithm>

namespace ttsched {

IntervalSet::IntervalSet(Time lo, Time hi)
{
	if (lo <= hi)
		parts_.emplace_back(lo, hi);
}

IntervalSet IntervalSet::from(std::vector<Interval> parts)
{
	IntervalSet s;
	for (auto [l, r] : parts)
		s.unite(l, r);
	return s;
}

bool IntervalSet::contains(Time t) const
{
	auto it = std::upper_bound(parts_.begin(), parts_.end(), t,
	                           [](Time v, const Interval& iv) { return v < iv.first; });
	return it != parts_.begin() && std::prev(it)->second >= t;
}

std::uint64_t IntervalSet::cardinality() const
{
	std::uint64_t n = 0;
	for (auto [l, r] : parts_)
		n += static_cast<std::uint64_t>(r - l + 1);
	return n;
}

std::optional<Time> IntervalSet::next(Time t) const
{
	auto it = std::lower_bound(parts_.begin(), parts_.end(), t,
	                           [](const Interval& iv, Time v) { return iv.second < v; });
	if (it == parts_.end())
		return std::nullopt;
	return std::max(t, it->first);
}

void IntervalSet::subtract(Time lo, Time hi)
{
	if (lo > hi || parts_.empty() || hi < parts_.front().first || lo > parts_.back().second)
		return;
	std::vector<Interval> out;
	out.reserve(parts_.size() + 1);
	for (auto [l, r] : parts_) {
		if (r < lo || l > hi) {
			out.emplace_back(l, r);
			continue;
		}
		if (l < lo)
			out.emplace_back(l, lo - 1);
		if (r > hi)
			out.emplace_back(hi + 1, r);
	}
	parts_ = std::move(out);
}

void IntervalSet::clamp(Time lo, Time hi)
{
	if (lo > hi) {
		parts_.clear();
		return;
	}
	std::vector<Interval> out;
	for (auto [l, r] : parts_) {
		Time a = std::max(l, lo), b = std::min(r, hi);
		if (a <= b)
			out.emplace_back(a, b);
	}
	parts_ = std::move(out);
}

void IntervalSet::unite(Time lo, Time hi)
{
	if (lo > hi)
		return;
	std::vector<Interval> out;
	bool placed = false;
	for (auto [l, r] : parts_) {
		if (r + 1 < lo) {
			out.emplace_back(l, r);
		} else if (hi + 1 < l) {
			if (!placed) {
				out.emplace_back(lo, hi);
				placed = true;
			}
			out.emplace_back(l, r);
		} else {
			lo = std::min(lo, l);
			hi = std::max(hi, r);
		}
	}
	if (!placed)
		out.emplace_back(lo, hi);
	parts_ = std::move(out);
}

std::string IntervalSet::str() const
{
	if (parts_.empty())
		return "{}";
	std::string s = "{";
	for (std::size_t i = 0; i < parts_.size(); ++i) {
		if (i)
			s += " u ";
		s += "[" + std::to_string(parts_[i].first) + ", " + std::to_string(parts_[i].second) + "]";
	}
	return s + "}";
}

}  // namespace ttsched
