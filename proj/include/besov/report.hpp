#pragma once

// Serialization of results: JSON (numbers with 17 significant digits,
// non-finite values as "inf"/"-inf" strings or null for NaN), CSV tables
// and JUnit-style XML.

#include "besov/kernels.hpp"
#include "besov/rate.hpp"
#include "besov/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace besov::report {

using json = nlohmann::ordered_json;

inline std::string number(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void dump(const json& j, std::string& out, int indent, int depth) {
  auto newline = [&](int d) {
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += ": ";
        dump(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Numeric arrays stay on one line.
      bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number() || e.is_null(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump(e, out, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      out += number(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Pretty JSON with %.17g numbers. Deterministic for a given document.
inline std::string dump(const json& j) {
  std::string out;
  detail::dump(j, out, 2, 0);
  out += '\n';
  return out;
}

inline json exponent(LpExponent p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

inline json moment_order(const MomentOrder& k) {
  if (k.infinite) return "inf";
  return k.k;
}

// ---------------------------------------------------------------------------

inline json to_json(const MomentTensor& t) {
  json entries = json::array();
  for (std::size_t e = 0; e < t.indices().size(); ++e)
    entries.push_back({{"index", t.indices()[e]}, {"value", t.values()[e]}});
  return {{"order", t.order()}, {"entries", entries}};
}

inline json to_json(const MollifierSpec& rho, const MomentReport& r, const AdmissibilityVerdict& v) {
  json tensors = json::array();
  for (const auto& t : r.tensors) tensors.push_back(to_json(t));
  json fractional = json::array();
  for (const auto& [s, value] : r.fractional) fractional.push_back({{"s", s}, {"value", value}});
  json interval = json::array({0.0, v.upper ? json(*v.upper) : json("inf")});
  return {{"kernel_id", rho.id()},
          {"dim", rho.dim()},
          {"k0", moment_order(r.k0)},
          {"admissible_interval", interval},
          {"nonnegative", r.nonnegative},
          {"moment_condition_below_one", v.moment_condition_below_one},
          {"tensors", tensors},
          {"fractional_moments", fractional},
          {"rationale", v.rationale}};
}

inline json to_json(const EtaTestReport& r) {
  return {{"s", r.s},
          {"epsilons", r.epsilons},
          {"partial_sums", r.partial_sums},
          {"tail_shares", r.tail_shares},
          {"converged", r.converged}};
}

inline json to_json(const PowerLawFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.points}};
}

inline json to_json(const KeylemDiagnostic& d) {
  json entries = json::array();
  for (const auto& [e, v] : d.entries) entries.push_back(json::array({e, v}));
  return {{"entries", entries}, {"decreasing_fraction", d.decreasing_fraction}};
}

inline json to_json(const verify::RatioReport& r) {
  json members = json::array();
  for (const auto& m : r.members)
    members.push_back({{"id", m.id},
                       {"besov_q", m.besov_q},
                       {"lp_q", m.lp_q},
                       {"functional", m.functional},
                       {"ratio", m.excluded ? json(nullptr) : json(m.ratio)},
                       {"excluded", m.excluded},
                       {"lp_last_term_share", m.lp_last_term_share},
                       {"functional_tail_share", m.functional_tail_share}});
  return {{"kernel_id", r.kernel_id},
          {"s", r.params.s},
          {"p", exponent(r.params.p)},
          {"q", exponent(r.params.q)},
          {"min_ratio", r.min_ratio},
          {"max_ratio", r.max_ratio},
          {"spread", r.spread()},
          {"members", members}};
}

inline json to_json(const verify::EquivalenceReport& r) {
  return {{"ratios", to_json(r.ratios)},
          {"k0", moment_order(r.k0)},
          {"predicted_admissible", r.predicted_admissible},
          {"eta_test", to_json(r.eta)},
          {"cap", r.cap},
          {"verdict", r.verdict},
          {"passed", r.passed}};
}

inline json to_json(const verify::OneSidedReport& r) {
  return {{"ratios", to_json(r.ratios)}, {"cap", r.cap}, {"passed", r.passed}};
}

inline json to_json(const verify::TaylorReport& r) {
  return {{"kernel_id", r.kernel_id},
          {"empirical_slope", r.fit.slope},
          {"predicted_k0", moment_order(r.k0)},
          {"constant_estimate", r.constant},
          {"fit", to_json(r.fit)},
          {"passed", r.passed}};
}

// ---------------------------------------------------------------------------
// CSV

inline void write_profile_csv(std::ostream& os, const RateProfile& p) {
  os << "epsilon,deviation\n";
  for (std::size_t i = 0; i < p.epsilons.size(); ++i)
    os << csv_number(p.epsilons[i]) << ',' << csv_number(p.deviations[i]) << '\n';
}

/// Reads the "epsilon,deviation" table back into a profile.
inline RateProfile read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("profile CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "epsilon,deviation") throw InvalidArgument("profile CSV must start with the header 'epsilon,deviation'");
  RateProfile p;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument("profile CSV row lacks a comma: '" + line + "'");
    try {
      p.epsilons.push_back(std::stod(line.substr(0, comma)));
      p.deviations.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw InvalidArgument("profile CSV row is not numeric: '" + line + "'");
    }
  }
  p.validate();
  return p;
}

inline void write_summary_csv(std::ostream& os, const std::vector<verify::SummaryRow>& rows) {
  os << "kernel_id,s,k0,slope,min_ratio,max_ratio,verdict\n";
  for (const auto& r : rows)
    os << r.kernel_id << ',' << csv_number(r.s) << ',' << r.k0.str() << ',' << csv_number(r.slope) << ','
       << csv_number(r.min_ratio) << ',' << csv_number(r.max_ratio) << ',' << r.verdict << '\n';
}

// ---------------------------------------------------------------------------
// JUnit XML

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline void write_junit(std::ostream& os, const verify::SuiteResult& r) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<testsuite name=\"besov-verify\" tests=\"" << r.checks.size() << "\" failures=\"" << r.failures()
     << "\" time=\"" << std::fixed << std::setprecision(3) << r.seconds << "\">\n";
  for (const auto& c : r.checks) {
    os << "  <testcase classname=\"" << xml_escape(c.group) << "\" name=\"" << xml_escape(c.name) << "\" time=\""
       << c.seconds << "\"";
    if (c.passed) {
      os << "/>\n";
    } else {
      os << ">\n    <failure message=\"" << xml_escape(c.detail) << "\"/>\n  </testcase>\n";
    }
  }
  os << "</testsuite>\n";
  os.unsetf(std::ios::fixed);
}

}  // namespace besov::report
