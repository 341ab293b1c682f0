#include <cstdio>
#include <map>
#include <regex>
#include <sstream>

#include "ttsched/exact_solver.hpp"

namespace ttsched {

namespace {

std::string hex64(std::uint64_t v)
{
	char buf[19];
	std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
	return buf;
}

std::string smt_int(Time v)
{
	return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v);
}

// x[to] >= x[from] + w
std::string smt_diff(const BuiltModel& m, VarId from, VarId to, Time w)
{
	auto f = m.var_name(from), t = m.var_name(to);
	if (w > 0)
		return "(<= (+ " + f + " " + std::to_string(w) + ") " + t + ")";
	if (w < 0)
		return "(<= " + f + " (+ " + t + " " + std::to_string(-w) + "))";
	return "(<= " + f + " " + t + ")";
}

const char* arc_label(ArcKind k)
{
	switch (k) {
	case ArcKind::SelfOrder: return "self";
	case ArcKind::DagOrder: return "dag";
	case ArcKind::Jitter: return "jit";
	}
	return "arc";
}

// Writes "lhs_coef*a + ... <= rhs" style rows with signed coefficients.
std::string lp_term(Time coef, const std::string& var, bool first)
{
	std::string s;
	if (coef < 0)
		s = first ? "-" : " - ";
	else if (!first)
		s = " + ";
	Time c = coef < 0 ? -coef : coef;
	if (c != 1)
		s += std::to_string(c) + " ";
	return s + var;
}

}  // namespace

std::string export_smtlib(const BuiltModel& m)
{
	std::ostringstream os;
	os << "; ttsched model hash=" << hex64(m.instance_hash) << " mode=" << to_string(m.mode) << "\n";
	os << "; vars=" << m.vars.size() << " pairs=" << m.pairs.size() << " arcs=" << m.arcs.size() << "\n";
	os << "(set-logic QF_LIA)\n";
	for (VarId v = 0; v < m.vars.size(); ++v)
		os << "(declare-fun " << m.var_name(v) << " () Int)\n";
	for (VarId v = 0; v < m.vars.size(); ++v) {
		auto n = m.var_name(v);
		os << "(assert (and (<= " << smt_int(m.vars[v].lb) << " " << n << ") (<= " << n << " "
		   << smt_int(m.vars[v].ub) << ")))\n";
	}
	for (const auto& a : m.arcs)
		os << "(assert " << smt_diff(m, a.from, a.to, a.weight) << ")\n";
	for (const auto& p : m.pairs)
		os << "(assert (or " << smt_diff(m, p.u, p.v, p.a_first) << " " << smt_diff(m, p.v, p.u, p.b_first) << "))\n";
	os << "(check-sat)\n(get-model)\n";
	return os.str();
}

std::string export_lp(const BuiltModel& m)
{
	const Time h = m.hyper_period;
	std::ostringstream os;
	os << "\\ ttsched model hash=" << hex64(m.instance_hash) << " mode=" << to_string(m.mode) << "\n";
	os << "\\ feasibility problem; x_k = 1 orders the first job of pair k before the second\n";
	os << "Minimize\n obj: 0 " << (m.vars.empty() ? std::string("x_dummy") : m.var_name(0)) << "\n";
	os << "Subject To\n";

	std::size_t k = 0;
	for (const auto& a : m.arcs) {
		// x[to] - x[from] >= w
		os << " " << arc_label(a.kind) << "_" << k++ << ": " << lp_term(1, m.var_name(a.to), true)
		   << lp_term(-1, m.var_name(a.from), false) << " >= " << a.weight << "\n";
	}
	for (std::size_t p = 0; p < m.pairs.size(); ++p) {
		const auto& rp = m.pairs[p];
		// Wrap pairs carry a +H shift, which needs one more H of slack.
		Time big = rp.wrap ? 3 * h : 2 * h;
		auto u = m.var_name(rp.u), v = m.var_name(rp.v), x = "x_" + std::to_string(p);
		os << " res_" << p << "_a: " << lp_term(1, u, true) << lp_term(-1, v, false) << lp_term(big, x, false)
		   << " <= " << big - rp.a_first << "\n";
		os << " res_" << p << "_b: " << lp_term(1, v, true) << lp_term(-1, u, false) << lp_term(-big, x, false)
		   << " <= " << -rp.b_first << "\n";
	}
	if (!m.improvements.variable_bounds) {
		for (VarId v = 0; v < m.vars.size(); ++v) {
			auto n = m.var_name(v);
			os << " win_" << v << "_lo: " << n << " >= " << m.vars[v].lb << "\n";
			os << " win_" << v << "_hi: " << n << " <= " << m.vars[v].ub << "\n";
		}
	}

	os << "Bounds\n";
	for (VarId v = 0; v < m.vars.size(); ++v) {
		if (m.improvements.variable_bounds)
			os << " " << m.vars[v].lb << " <= " << m.var_name(v) << " <= " << m.vars[v].ub << "\n";
		else
			os << " " << m.var_name(v) << " >= 0\n";
	}
	if (!m.pairs.empty()) {
		os << "Binaries\n";
		for (std::size_t p = 0; p < m.pairs.size(); ++p)
			os << " x_" << p << "\n";
	}
	if (!m.vars.empty()) {
		os << "Generals\n";
		for (VarId v = 0; v < m.vars.size(); ++v)
			os << " " << m.var_name(v) << "\n";
	}
	os << "End\n";
	return os.str();
}

Schedule decode_smt_model(const BuiltModel& m, std::string_view text)
{
	static const std::regex entry(R"(\(define-fun\s+(s_\d+_\d+)\s+\(\)\s+Int\s+(\(\s*-\s*\d+\s*\)|-?\d+)\s*\))");
	std::map<std::string, Time> values;
	std::string s(text);
	for (std::sregex_iterator it(s.begin(), s.end(), entry), end; it != end; ++it) {
		std::string raw = (*it)[2];
		Time v;
		if (raw.front() == '(') {
			auto digits = raw.find_first_of("0123456789");
			v = -std::stoll(raw.substr(digits));
		} else {
			v = std::stoll(raw);
		}
		values[(*it)[1]] = v;
	}
	Schedule out;
	out.start.resize(m.jobs.size());
	for (std::size_t a = 0; a < m.jobs.size(); ++a)
		for (const auto& r : m.jobs[a]) {
			auto name = m.var_name(r.var);
			auto f = values.find(name);
			if (f == values.end())
				throw std::runtime_error("solver model lacks " + name);
			out.start[a].push_back(f->second + r.offset);
		}
	out.zero_jitter = m.zero_jitter_flags;
	return out;
}

}  // namespace ttsched
