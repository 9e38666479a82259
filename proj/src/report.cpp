#include "pim/report.hpp"

#include <cstdio>

namespace pim {

std::string verdict_str(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::pass_at_depth: return "pass-at-depth";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

bool passing(const ConditionReport& r) {
  return r.verdict == Verdict::pass || r.verdict == Verdict::pass_at_depth;
}

std::string report_line(const ConditionReport& r) {
  std::string line = "check " + r.condition + " verdict=" + verdict_str(r.verdict);
  if (r.depth >= 0) line += " depth=" + std::to_string(r.depth);
  if (!r.witness.empty()) line += " witness={" + r.witness + "}";
  if (!r.numeric_data.empty()) {
    line += " data=";
    for (std::size_t i = 0; i < r.numeric_data.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", r.numeric_data[i]);
      line += (i ? "," : "") + std::string(buf);
    }
  }
  if (!r.note.empty()) line += " note=" + r.note;
  return line;
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass:
    case Verdict::pass_at_depth: return 0;
    case Verdict::fail: return 1;
    case Verdict::inconclusive: return 2;
  }
  return 3;
}

}  // namespace pim
