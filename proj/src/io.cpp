#include "ttsched/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ttsched {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* key, const std::string& where)
{
	if (!j.contains(key))
		throw InputError(where + ": missing field '" + key + "'");
	try {
		return j.at(key).get<T>();
	} catch (const json::exception& e) {
		throw InputError(where + ": field '" + key + "' has the wrong type");
	}
}

template <class T>
T field_or(const json& j, const char* key, T fallback, const std::string& where)
{
	return j.contains(key) ? field<T>(j, key, where) : fallback;
}

void check_version(const json& j)
{
	auto v = field<int>(j, "schema_version", "document");
	if (v != schema_version)
		throw InputError("unsupported schema_version " + std::to_string(v));
}

json parse(const std::string& text)
{
	try {
		return json::parse(text);
	} catch (const json::parse_error& e) {
		throw InputError(std::string("invalid JSON: ") + e.what());
	}
}

// Flagged and really periodic; a flagged activity whose starts drift is
// written out in full rather than silently rounded to an offset.
bool stored_as_offset(const Instance& inst, const Schedule& s, ActivityId i)
{
	if (i >= s.zero_jitter.size() || !s.zero_jitter[i] || s.start[i].empty())
		return false;
	for (std::size_t k = 1; k < s.start[i].size(); ++k)
		if (s.start[i][k] - s.start[i][k - 1] != inst.activities[i].period)
			return false;
	return true;
}

}  // namespace

std::string instance_to_json(const Instance& inst)
{
	json j;
	j["schema_version"] = schema_version;
	const auto& p = inst.platform;
	j["platform"] = {{"resources", p.resources},
	                 {"core_freq_hz", p.core_freq_hz},
	                 {"bandwidth_bytes_per_s", p.bandwidth_bytes_per_s},
	                 {"latency_ns", p.latency_ns},
	                 {"granularity_ns", p.granularity_ns}};
	j["activities"] = json::array();
	for (const auto& a : inst.activities) {
		json x{{"id", a.id},
		       {"kind", a.is_task() ? "task" : "message"},
		       {"period", a.period},
		       {"exec", a.exec},
		       {"jitter", a.jitter}};
		if (a.is_message()) {
			x["size_bytes"] = a.size_bytes;
			if (a.sender)
				x["sender"] = *a.sender;
			if (a.receiver)
				x["receiver"] = *a.receiver;
		}
		j["activities"].push_back(std::move(x));
	}
	j["dag_edges"] = json::array();
	for (auto [u, v] : inst.dag.edges())
		j["dag_edges"].push_back({u, v});
	j["chains"] = inst.chains;
	if (inst.is_mapped()) {
		j["mapping"] = json::array();
		for (const auto& a : inst.activities)
			j["mapping"].push_back(*a.resource);
	}
	return j.dump(1, '\t') + "\n";
}

Instance instance_from_json(const std::string& text)
{
	auto j = parse(text);
	check_version(j);
	Instance inst;
	auto pj = field<json>(j, "platform", "document");
	inst.platform.resources = field<std::size_t>(pj, "resources", "platform");
	inst.platform.core_freq_hz = field_or<std::uint64_t>(pj, "core_freq_hz", inst.platform.core_freq_hz, "platform");
	inst.platform.bandwidth_bytes_per_s =
	    field_or<std::uint64_t>(pj, "bandwidth_bytes_per_s", inst.platform.bandwidth_bytes_per_s, "platform");
	inst.platform.latency_ns = field_or<std::uint64_t>(pj, "latency_ns", inst.platform.latency_ns, "platform");
	inst.platform.granularity_ns =
	    field_or<std::uint64_t>(pj, "granularity_ns", inst.platform.granularity_ns, "platform");
	if (inst.platform.resources == 0 || inst.platform.resources % 2 != 0)
		throw InputError("platform: resources must be a positive even number");

	auto acts = field<json>(j, "activities", "document");
	if (!acts.is_array())
		throw InputError("activities must be an array");
	for (std::size_t i = 0; i < acts.size(); ++i) {
		const auto& x = acts[i];
		std::string where = "activity " + std::to_string(i);
		Activity a;
		a.id = field<std::size_t>(x, "id", where);
		if (a.id != i)
			throw InputError(where + ": ids must be 0, 1, 2, ... in order");
		auto kind = field<std::string>(x, "kind", where);
		if (kind != "task" && kind != "message")
			throw InputError(where + ": kind must be task or message");
		a.kind = kind == "task" ? ActivityKind::Task : ActivityKind::Message;
		a.period = field<Time>(x, "period", where);
		a.exec = field<Time>(x, "exec", where);
		a.jitter = field<Time>(x, "jitter", where);
		if (a.is_message()) {
			a.size_bytes = field_or<std::uint64_t>(x, "size_bytes", 0, where);
			if (x.contains("sender"))
				a.sender = field<std::size_t>(x, "sender", where);
			if (x.contains("receiver"))
				a.receiver = field<std::size_t>(x, "receiver", where);
		}
		inst.activities.push_back(a);
	}
	std::vector<std::pair<ActivityId, ActivityId>> edges;
	for (const auto& e : field_or<json>(j, "dag_edges", json::array(), "document")) {
		if (!e.is_array() || e.size() != 2)
			throw InputError("dag_edges entries must be [from, to]");
		auto u = e[0].get<std::size_t>(), v = e[1].get<std::size_t>();
		if (u >= inst.size() || v >= inst.size())
			throw InputError("dag edge refers to an unknown activity");
		edges.emplace_back(u, v);
	}
	try {
		inst.dag = PrecedenceDag(inst.size(), edges);
	} catch (const CycleError& e) {
		throw InputError(e.what());
	}
	inst.chains = field_or<std::vector<std::vector<ActivityId>>>(j, "chains", {}, "document");
	if (j.contains("mapping")) {
		auto map = field<std::vector<ResourceId>>(j, "mapping", "document");
		if (map.size() != inst.size())
			throw InputError("mapping must list one resource per activity");
		for (std::size_t i = 0; i < map.size(); ++i)
			inst.activities[i].resource = map[i];
	}
	try {
		inst.check();
	} catch (const ModelError& e) {
		throw InputError(e.what());
	}
	return inst;
}

std::string schedule_to_json(const Instance& inst, const Schedule& s)
{
	json j;
	j["schema_version"] = schema_version;
	char hash[20];
	std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(instance_fingerprint(inst)));
	j["instance_hash"] = hash;
	j["hyper_period"] = hyper_period(inst);
	j["activities"] = json::array();
	for (ActivityId i = 0; i < s.size(); ++i) {
		bool zj = stored_as_offset(inst, s, i);
		json x{{"id", i}, {"zero_jitter", zj}};
		if (zj)
			x["offset"] = s.start[i].front();
		else
			x["starts"] = s.start[i];
		j["activities"].push_back(std::move(x));
	}
	return j.dump(1, '\t') + "\n";
}

Schedule schedule_from_json(const std::string& text, const Instance& inst)
{
	auto j = parse(text);
	check_version(j);
	auto h = hyper_period(inst);
	auto acts = field<json>(j, "activities", "document");
	if (!acts.is_array() || acts.size() != inst.size())
		throw InputError("schedule must list every activity of the instance");
	Schedule s;
	s.start.resize(inst.size());
	s.zero_jitter.assign(inst.size(), false);
	for (std::size_t i = 0; i < acts.size(); ++i) {
		const auto& x = acts[i];
		std::string where = "schedule entry " + std::to_string(i);
		if (field<std::size_t>(x, "id", where) != i)
			throw InputError(where + ": ids must be in order");
		bool zj = field_or<bool>(x, "zero_jitter", false, where);
		s.zero_jitter[i] = zj;
		if (zj) {
			auto off = field<Time>(x, "offset", where);
			auto n = job_count(inst.activities[i].period, h);
			for (std::size_t k = 0; k < n; ++k)
				s.start[i].push_back(off + static_cast<Time>(k) * inst.activities[i].period);
		} else {
			s.start[i] = field<std::vector<Time>>(x, "starts", where);
		}
	}
	return s;
}

std::string schedule_to_csv(const Instance& inst, const Schedule& s)
{
	std::ostringstream out;
	out << "activity,zero_jitter,job,start\n";
	for (ActivityId i = 0; i < s.size(); ++i) {
		bool zj = stored_as_offset(inst, s, i);
		if (zj) {
			out << i << ",1,," << s.start[i].front() << "\n";
			continue;
		}
		for (std::size_t k = 0; k < s.start[i].size(); ++k)
			out << i << ",0," << k << "," << s.start[i][k] << "\n";
	}
	return out.str();
}

std::string read_file(const std::string& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw InputError("cannot read " + path);
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw InputError("cannot write " + path);
	out << text;
	if (!out)
		throw InputError("write failed for " + path);
}

std::string render_gantt(const Instance& inst, const Schedule& s)
{
	const double width = 1200, lane = 28, left = 70, top = 20;
	const auto m = inst.platform.resources;
	const Time h = hyper_period(inst);
	const double scale = width / static_cast<double>(h);
	std::ostringstream out;
	out.setf(std::ios::fixed);
	out.precision(2);
	double total_h = top + lane * static_cast<double>(m) + 24;
	out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 20 << "\" height=\"" << total_h
	    << "\" font-family=\"monospace\" font-size=\"10\">\n";
	for (ResourceId r = 0; r < m; ++r) {
		double y = top + lane * static_cast<double>(r);
		bool core = inst.platform.is_core(r);
		auto idx = core ? r : r - inst.platform.core_count();
		out << "<text x=\"4\" y=\"" << y + lane * 0.65 << "\">" << (core ? "core " : "port ") << idx << "</text>\n";
		out << "<rect x=\"" << left << "\" y=\"" << y << "\" width=\"" << width << "\" height=\"" << lane
		    << "\" fill=\"#f4f4f4\" stroke=\"#999\"/>\n";
	}
	auto box = [&](double x0, double w, double y, const std::string& fill, const std::string& label) {
		out << "<rect x=\"" << left + x0 << "\" y=\"" << y + 3 << "\" width=\"" << std::max(w, 0.5)
		    << "\" height=\"" << lane - 6 << "\" fill=\"" << fill << "\" stroke=\"#333\" stroke-width=\"0.5\"><title>"
		    << label << "</title></rect>\n";
		if (w > 7.0 * static_cast<double>(label.size()))
			out << "<text x=\"" << left + x0 + 2 << "\" y=\"" << y + lane * 0.65 << "\">" << label << "</text>\n";
	};
	for (ActivityId i = 0; i < s.size() && i < inst.size(); ++i) {
		const auto& a = inst.activities[i];
		if (!a.resource)
			continue;
		char fill[16];
		int hue = static_cast<int>((i * 137) % 360);
		std::snprintf(fill, sizeof fill, "hsl(%d,60%%,70%%)", hue);
		double y = top + lane * static_cast<double>(*a.resource);
		for (std::size_t k = 0; k < s.start[i].size(); ++k) {
			Time t = ((s.start[i][k] % h) + h) % h;
			std::string label = "a" + std::to_string(i) + "^" + std::to_string(k);
			Time first = std::min(a.exec, h - t);
			box(static_cast<double>(t) * scale, static_cast<double>(first) * scale, y, fill, label);
			if (first < a.exec)
				box(0, static_cast<double>(a.exec - first) * scale, y, fill, label);
		}
	}
	out << "<text x=\"" << left << "\" y=\"" << total_h - 6 << "\">0</text>\n";
	out << "<text x=\"" << left + width - 40 << "\" y=\"" << total_h - 6 << "\">H=" << h << "</text>\n";
	out << "</svg>\n";
	return out.str();
}

}  // namespace ttsched
