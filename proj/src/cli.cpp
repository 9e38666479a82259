#include "pim/cli.hpp"

#include "pim/io.hpp"
#include "pim/measure.hpp"
#include "pim/thermo.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pim {

namespace {

std::string fp(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Potential parse_potential(const std::string& spec, const PiecewiseMap& map) {
  if (spec == "id") return Potential::identity_fn(map);
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "const") return Potential::constant_fn(parse_rational(arg));
  if (kind == "neglogdf") return Potential::neg_log_deriv(parse_rational(arg));
  throw std::invalid_argument("unknown potential '" + spec + "' (const:<p/q>|id|neglogdf:<t>)");
}

int code_max(int a, int b) { return std::max(a, b); }

struct Stage {
  std::ostream& out;       // record stream
  std::ostream& artifact;  // parseable dumps (tower/scheme/measure) land here
  int code = 0;

  void emit(const ConditionReport& r) {
    out << report_line(r) << "\n";
    code = code_max(code, exit_code(r.verdict));
  }
  void line(const std::string& s) { out << s << "\n"; }
};

std::size_t cell_budget(const RunConfig& c) { return c.budget ? c.budget : kDefaultCellBudget; }
std::size_t elem_budget(const RunConfig& c) { return c.budget ? c.budget : kDefaultElementBudget; }

NiceCertificate certified_base(const RunConfig& config, const PiecewiseMap& map) {
  if (config.nice.empty())
    throw std::invalid_argument("this command needs --nice <lo>..<hi>");
  return certify_nice(map, parse_interval(config.nice), config.horizon);
}

std::string cert_line(const NiceCertificate& cert) {
  std::string s = "nice candidate=" + iv_str(cert.candidate) +
                  " horizon=" + std::to_string(cert.horizon) + " verdict=";
  switch (cert.verdict) {
    case NiceVerdict::nice: s += "nice"; break;
    case NiceVerdict::not_nice: s += "not-nice"; break;
    case NiceVerdict::inconclusive: s += "inconclusive"; break;
  }
  s += " class=";
  s += cert.boundary_orbit_class == OrbitClass::eventually_periodic ? "eventually-periodic"
                                                                    : "open-ended";
  if (cert.witness)
    s += " witness={point=" + rat_str(cert.witness->boundary_point) +
         " n=" + std::to_string(cert.witness->hit_time) + "}";
  return s;
}

int cert_code(const NiceCertificate& cert) {
  switch (cert.verdict) {
    case NiceVerdict::nice: return 0;
    case NiceVerdict::not_nice: return 1;
    case NiceVerdict::inconclusive: return 2;
  }
  return 3;
}

InducingScheme obtain_scheme(const RunConfig& config, const PiecewiseMap& map, Stage& stage) {
  if (!config.scheme_file.empty()) return load_scheme_file(config.scheme_file);
  NiceCertificate cert = certified_base(config, map);
  stage.line(cert_line(cert));
  if (cert.verdict != NiceVerdict::nice)
    throw PreconditionUnverified("base candidate is not certified nice");
  std::optional<Interval> extended;
  if (!config.extended.empty()) extended = parse_interval(config.extended);
  return build_canonical_scheme(map, cert, config.tau_max, extended, elem_budget(config));
}

// ---- stages ----

int stage_tower(const RunConfig& config, Stage& stage, const PiecewiseMap& map) {
  Tower tower = build_tower(map, config.depth, elem_budget(config));
  dump_tower(stage.artifact, tower);
  stage.emit(check_markov(tower, map, std::max(1u, config.depth)));
  return stage.code;
}

int stage_nice(const RunConfig& config, Stage& stage, const PiecewiseMap& map) {
  NiceCertificate cert = certified_base(config, map);
  stage.line(cert_line(cert));
  return cert_code(cert);
}

int stage_scheme(const RunConfig& config, Stage& stage, const PiecewiseMap& map) {
  InducingScheme scheme = obtain_scheme(config, map, stage);
  dump_scheme(stage.artifact, scheme);
  return stage.code;
}

int stage_check(const RunConfig& config, Stage& stage, const PiecewiseMap& map) {
  InducingScheme scheme = obtain_scheme(config, map, stage);
  std::vector<Cond> which{Cond::H1, Cond::H2, Cond::C, Cond::M};
  if (scheme.extended_base) {
    which.push_back(Cond::Cplus);
    which.push_back(Cond::Mplus);
  }
  unsigned m_max = std::max(config.depth, scheme.tau_max);
  auto reports = check_conditions(map, scheme, m_max, which);
  for (const ConditionReport& r : reports) stage.emit(r);

  if (!config.nice.empty()) {
    NiceCertificate cert = certified_base(config, map);
    if (cert.verdict == NiceVerdict::nice) {
      stage.emit(check_nested_or_disjoint(map, cert, config.tau_max, elem_budget(config)));
      stage.emit(check_H3_surrogate(map, cert, config.tau_max, elem_budget(config)));
    }
  }

  bool mc_pass = true;
  for (const ConditionReport& r : reports)
    if ((r.condition == "M" || r.condition == "C") && !passing(r)) mc_pass = false;
  if (mc_pass) {
    Tower tower = build_tower(map, config.depth, elem_budget(config));
    if (tower.saturated)
      stage.emit(embed_in_tower(scheme, tower, map, config.sample_budget, reports));
    else
      stage.line("# FirstReturn skipped: tower unsaturated at depth " +
                 std::to_string(config.depth));
  } else {
    stage.line("# FirstReturn skipped: M or C did not pass");
  }
  return stage.code;
}

int stage_lift(const RunConfig& config, Stage& stage, const PiecewiseMap& map) {
  InducingScheme scheme = obtain_scheme(config, map, stage);
  if (config.measure_file.empty())
    throw std::invalid_argument("lift needs --measure <file>");
  RationalMeasure nu = load_measure_file(config.measure_file);
  LiftResult lift = lift_measure(scheme, map, nu);
  std::string header = "lift Q=" + rat_str(lift.Q) + " captured=" + rat_str(lift.captured_mass) +
                       " deficit=" + rat_str(lift.mass_deficit) +
                       " complete=" + (lift.Q_is_complete ? "1" : "0");
  if (lift.Q_tail)
    header += " tail=" + rat_str(*lift.Q_tail) + " effective=" + rat_str(lift.Q + *lift.Q_tail);
  stage.line(header);
  for (const Interval& x : lift.support_X) stage.line("X " + iv_str(x));
  dump_measure(stage.artifact, flatten(lift.measure));
  return stage.code;
}

int stage_kac(const RunConfig& config, Stage& stage, const PiecewiseMap& map) {
  InducingScheme scheme = obtain_scheme(config, map, stage);
  if (config.measure_file.empty()) throw std::invalid_argument("kac needs --measure <file>");
  RationalMeasure mu = load_measure_file(config.measure_file);
  Tower tower = build_tower(map, config.depth, elem_budget(config));
  unsigned m_max = std::max(config.depth, scheme.tau_max);
  auto priors = check_conditions(map, scheme, m_max, {Cond::M, Cond::C});
  for (const ConditionReport& r : priors) stage.emit(r);
  stage.emit(kac_roundtrip_check(scheme, tower, map, mu, config.test_depth, priors));
  return stage.code;
}

int stage_thermo(const RunConfig& config, Stage& stage, const PiecewiseMap& map) {
  InducingScheme scheme = obtain_scheme(config, map, stage);
  Potential phi = parse_potential(config.potential, map);
  std::size_t word_budget = config.budget ? config.budget : 100'000;

  stage.emit(check_H2(scheme, map, config.n_max, word_budget));

  // cylinder records up to length 2, capped for readability
  std::size_t printed = 0;
  const std::size_t cyl_cap = 128;
  std::vector<std::vector<std::size_t>> words;
  for (std::size_t a = 0; a < scheme.elements.size(); ++a) words.push_back({a});
  for (std::size_t a = 0; a < scheme.elements.size(); ++a)
    for (std::size_t b = 0; b < scheme.elements.size(); ++b) words.push_back({a, b});
  for (const auto& word : words) {
    if (printed >= cyl_cap) {
      stage.line("# cyl records truncated");
      break;
    }
    Cylinder c = cylinder(scheme, map, word);
    std::string w;
    for (std::size_t i = 0; i < word.size(); ++i) w += (i ? "," : "") + std::to_string(word[i]);
    if (c.interval) {
      stage.line("cyl " + w + " " + iv_str(*c.interval) + " diam=" + rat_str(c.diameter));
      ++printed;
    }
  }

  HolderFit fit = fit_holder(scheme, map, phi, 1, config.n_max, word_budget);
  for (const VnValue& v : fit.variations)
    stage.line("Vn n=" + std::to_string(v.n) + " value=" + rat_str(v.value) +
               " cylinders=" + std::to_string(v.cylinders_seen) +
               (v.lower_bound_only ? " lower-bound" : ""));
  std::string verdict = fit.verdict == HolderFit::Verdict::consistent     ? "consistent"
                        : fit.verdict == HolderFit::Verdict::violated     ? "violated"
                                                                          : "inconclusive";
  stage.line("holder A=" + fp(fit.fitted_A) + " gamma=" + fp(fit.fitted_gamma) + " verdict=" +
             verdict + " prec=double53" + (fit.note.empty() ? "" : " note=" + fit.note));
  if (fit.verdict == HolderFit::Verdict::violated) stage.code = code_max(stage.code, 1);
  if (fit.verdict == HolderFit::Verdict::inconclusive) stage.code = code_max(stage.code, 2);

  SummabilityReport recc = recc_summability(scheme, map, phi, parse_rational(config.epsilon),
                                            config.pl_bound, scheme.tau_max);
  std::string sum1 = "sum1 N=" + std::to_string(recc.truncation) + " partial=";
  sum1 += recc.sum1_exact ? rat_str(recc.sum1_partial_exact) : fp(recc.sum1_partial);
  if (recc.sum1_tail) sum1 += " tail=" + rat_str(*recc.sum1_tail);
  sum1 += " verdict=" + verdict_str(recc.sum1_verdict) + " note=" + recc.sum1_note;
  if (!recc.sum1_exact) sum1 += " prec=double53";
  stage.line(sum1);
  std::string sum2 = "sum2 N=" + std::to_string(recc.truncation) +
                     " partial=" + fp(recc.sum2_partial);
  if (recc.sum2_tail) sum2 += " tail=" + fp(*recc.sum2_tail);
  sum2 += " verdict=" + verdict_str(recc.sum2_verdict) + " note=" + recc.sum2_note +
          " prec=double53";
  stage.line(sum2);
  stage.code = code_max(stage.code, exit_code(recc.sum1_verdict));
  stage.code = code_max(stage.code, exit_code(recc.sum2_verdict));
  return stage.code;
}

int stage_diagnostics(const RunConfig& config, Stage& stage, const PiecewiseMap& map) {
  unsigned n_max = std::max(1u, std::min(config.depth, 12u));
  auto [p1, p2] = check_P1_P2(map, n_max, P1P2Config{0.05, rat(1, 2), cell_budget(config), 4096});
  stage.emit(p1);
  stage.emit(p2);
  auto laps = lap_entropy(map, n_max, cell_budget(config));
  stage.line("threshold lap-estimate=" + fp(laps.back().quotient) + " P1=" +
             verdict_str(p1.verdict) + " P2=" + verdict_str(p2.verdict) +
             " note=estimates-only prec=double53");
  return stage.code;
}

int dispatch(const RunConfig& config, std::ostream& out, std::ostream& artifact,
             std::ostream& err) {
  Stage stage{out, artifact};
  try {
    PiecewiseMap map = load_map_file(config.map_file);
    if (config.command == "tower") return stage_tower(config, stage, map);
    if (config.command == "nice") return stage_nice(config, stage, map);
    if (config.command == "scheme") return stage_scheme(config, stage, map);
    if (config.command == "check") return stage_check(config, stage, map);
    if (config.command == "lift") return stage_lift(config, stage, map);
    if (config.command == "kac") return stage_kac(config, stage, map);
    if (config.command == "thermo") return stage_thermo(config, stage, map);
    if (config.command == "diagnostics") return stage_diagnostics(config, stage, map);
    err << "unknown command: " << config.command << "\n";
    return 3;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const CellBudgetExceeded& e) {
    err << "budget: " << e.what() << "\n";
    return 2;
  } catch (const ElementBudgetExceeded& e) {
    err << "budget: " << e.what() << "\n";
    return 2;
  } catch (const WordBudgetExceeded& e) {
    err << "budget: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionUnverified& e) {
    err << "precondition: " << e.what() << "\n";
    return 2;
  } catch (const ZeroBaseMass& e) {
    err << "precondition: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.command == "report") {
    // consolidated bundle over the stages that make sense for the inputs
    std::vector<RunConfig> stages;
    for (const char* cmd : {"tower", "diagnostics", "nice", "scheme", "check", "kac", "thermo"}) {
      RunConfig sub = config;
      sub.command = cmd;
      if ((sub.command == "nice" || sub.command == "scheme") && config.nice.empty()) continue;
      if (sub.command == "check" && config.nice.empty() && config.scheme_file.empty()) continue;
      if (sub.command == "kac" && config.measure_file.empty()) continue;
      if (sub.command == "thermo" && config.nice.empty() && config.scheme_file.empty()) continue;
      stages.push_back(std::move(sub));
    }
    return run_bundle(stages, out, err);
  }
  bool artifact_command =
      config.command == "tower" || config.command == "scheme" || config.command == "lift";
  if (!config.out_file.empty()) {
    std::ofstream file(config.out_file);
    if (!file) {
      err << "cannot open output file: " << config.out_file << "\n";
      return 3;
    }
    // --out captures the artifact of artifact-producing commands and the
    // record stream otherwise
    if (artifact_command) return dispatch(config, out, file, err);
    return dispatch(config, file, file, err);
  }
  return dispatch(config, out, out, err);
}

int run_bundle(const std::vector<RunConfig>& configs, std::ostream& out, std::ostream& err) {
  int code = 0;
  for (const RunConfig& config : configs) {
    // buffer per stage, flush in stage order
    std::ostringstream buffer;
    out << "stage " << config.command << "\n";
    RunConfig sub = config;
    sub.out_file.clear();
    int stage_code = run(sub, buffer, err);
    out << buffer.str();
    out << "stage-exit " << stage_code << "\n";
    code = code_max(code, stage_code);
  }
  return code;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"exact toolkit for Markov extensions and inducing schemes of piecewise "
               "affine interval maps"};
  app.require_subcommand(1);

  RunConfig config;
  if (const char* env = std::getenv("PIM_BUDGET")) config.budget = std::strtoull(env, nullptr, 10);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--map", config.map_file, "map definition file")->required();
    sub->add_option("--depth", config.depth, "tower depth / M-check search depth");
    sub->add_option("--tau-max", config.tau_max, "scheme truncation depth");
    sub->add_option("--horizon", config.horizon, "nice certification horizon");
    sub->add_option("--nice", config.nice, "base candidate lo/q..hi/q");
    sub->add_option("--extended", config.extended, "extended base lo/q..hi/q");
    sub->add_option("--scheme", config.scheme_file, "scheme dump file");
    sub->add_option("--measure", config.measure_file, "measure file");
    sub->add_option("--test-depth", config.test_depth, "test partition depth");
    sub->add_option("--n-max", config.n_max, "cylinder/variation depth");
    sub->add_option("--potential", config.potential, "const:<p/q> | id | neglogdf:<t>");
    sub->add_option("--epsilon", config.epsilon, "epsilon for the second summability check");
    sub->add_option("--pl-bound", config.pl_bound, "caller-supplied pressure bound");
    sub->add_option("--budget", config.budget, "enumeration budget override");
    sub->add_option("--sample-budget", config.sample_budget, "first-return sample budget");
    sub->add_option("--out", config.out_file, "write records to file instead of stdout");
  };
  for (const char* name : {"tower", "nice", "scheme", "check", "lift", "kac", "thermo",
                           "diagnostics", "report"})
    add_common(app.add_subcommand(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  config.command = app.get_subcommands().front()->get_name();
  return run(config, std::cout, std::cerr);
}

}  // namespace pim
