#pragma once

#include <string>
#include <vector>

namespace pim {

// A verdict at finite depth. Truncation is never reported as failure: when a
// deeper search could still change the answer, the verdict is pass_at_depth or
// inconclusive, with the depth stamped on the report.
enum class Verdict { pass, pass_at_depth, fail, inconclusive };

std::string verdict_str(Verdict v);

struct ConditionReport {
  std::string condition;  // H1|H2|H3-surrogate|M|M+|C|C+|P1|P2|Markov|FirstReturn|Kac|...
  Verdict verdict = Verdict::inconclusive;
  long depth = -1;        // truncation depth stamped on the verdict, -1 if exact
  std::string witness;    // key=value payload; mandatory when verdict is fail
  std::vector<double> numeric_data;
  std::string note;
};

bool passing(const ConditionReport& r);  // pass or pass_at_depth

// One line per report: "check <name> verdict=<v> [depth=<n>] [witness=...] [note=...]"
std::string report_line(const ConditionReport& r);

// Exit-code convention: pass/pass-at-depth 0, fail 1, inconclusive 2.
int exit_code(Verdict v);

}  // namespace pim
