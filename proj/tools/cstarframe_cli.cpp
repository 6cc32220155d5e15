// Command-line front end: generate instances, compute bounds and duals,
// check frame / K-frame / atomic certificates, run the property suites.
//
// Exit codes: 0 pass/valid, 1 invalid/refuted, 2 usage, 3 numerical consistency error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cstarframe/cstar_core.hpp"
#include "cstarframe/errors.hpp"
#include "cstarframe/frame_core.hpp"
#include "cstarframe/harness.hpp"
#include "cstarframe/json_io.hpp"
#include "cstarframe/operator_frames.hpp"
#include "cstarframe/random.hpp"

namespace {

using namespace cstarframe;
using json = nlohmann::json;

enum Exit : int { kValid = 0, kInvalid = 1, kUsage = 2, kConsistency = 3 };

struct Common {
  std::uint64_t seed = 1;
  int trials = 200;
  std::string spec;
  std::optional<int> rank;
  std::optional<int> count;
  std::vector<std::string> tols;
  std::string in;
  std::string out;
  bool json_out = false;
  bool text_out = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--trials", c.trials, "Trials per suite")->check(CLI::PositiveNumber);
  cmd->add_option("--spec", c.spec, "Algebra block sizes, e.g. 2,1");
  cmd->add_option("--rank", c.rank, "Module rank m")->check(CLI::PositiveNumber);
  cmd->add_option("--count", c.count, "Number of frame vectors N")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", c.tols, "Tolerance override name=value (repeatable)");
  cmd->add_option("--in", c.in, "Input JSON file");
  cmd->add_option("--out", c.out, "Output file (default stdout)");
  auto* j = cmd->add_flag("--json", c.json_out, "JSON output");
  auto* t = cmd->add_flag("--text", c.text_out, "Human-readable output");
  j->excludes(t);
}

AlgebraSpec parse_spec(const std::string& text) {
  if (text.empty()) return AlgebraSpec{1};
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      dims.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad --spec entry: '" + item + "'");
    }
  }
  try {
    return AlgebraSpec(dims);
  } catch (const StructuralError& e) {
    throw UsageError(e.what());
  }
}

std::map<std::string, double> parse_tols(const std::vector<std::string>& items) {
  std::map<std::string, double> out = harness::default_tolerances();
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--tol expects name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    if (!out.contains(name)) throw UsageError("unknown tolerance name: " + name);
    double v = 0.0;
    try {
      v = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("bad tolerance value in '" + item + "'");
    }
    if (!(v > 0.0)) throw UsageError("tolerance " + name + " must be positive");
    out[name] = v;
  }
  return out;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw UsageError("cannot write " + c.out);
  f << text;
}

void emit_json(const Common& c, const json& j) { emit(c, j.dump(2) + "\n"); }

json load_input(const Common& c) {
  if (c.in.empty()) throw UsageError("--in FILE is required");
  return io::read_file(c.in);
}

/// Accepts a bare FrameSystem document or one wrapped as {"frame": ...}.
FrameSystem load_frame(const json& doc) {
  if (doc.is_object() && doc.contains("frame")) return io::frame_from_json(doc.at("frame"), "$.frame");
  return io::frame_from_json(doc);
}

ModuleOperator load_operator(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ParseError(std::string("at $: missing field \"") + key + "\"");
  return io::operator_from_json(doc.at(key), std::string("$.") + key);
}

std::string fmt_bounds(const FrameBounds& b) {
  std::ostringstream s;
  s.precision(17);
  s << "lower " << b.lower << "\nupper " << b.upper << "\n" << (b.is_frame ? "frame" : "not a frame (Bessel only)")
    << "\n";
  return s.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Frames, K-frames and atomic systems in Hilbert C*-modules over finite-dimensional C*-algebras"};
  app.require_subcommand(1);

  Common c;
  std::string kind = "frame";
  double min_lower = 0.0;
  auto* gen = app.add_subcommand("gen", "Emit a random frame, operator, (frame, K) pair or (S, T) pair as JSON");
  add_common(gen, c);
  gen->add_option("--kind", kind, "frame | operator | pair | douglas")
      ->check(CLI::IsMember({"frame", "operator", "pair", "douglas"}));
  gen->add_option("--min-lower", min_lower, "Minimum lower frame bound for generated frames");

  auto* bounds = app.add_subcommand("bounds", "Optimal Loewner frame bounds");
  add_common(bounds, c);

  auto* dual = app.add_subcommand("dual", "Canonical dual frame");
  add_common(dual, c);

  std::optional<double> lower;
  std::optional<double> upper;
  std::string flavor = "loewner";
  auto* check_frame = app.add_subcommand("check-frame", "Verify frame bounds (default: optimal bounds, frame or not)");
  add_common(check_frame, c);
  check_frame->add_option("--lower", lower, "Lower bound C");
  check_frame->add_option("--upper", upper, "Upper bound D");
  check_frame->add_option("--flavor", flavor, "loewner | norm")->check(CLI::IsMember({"loewner", "norm"}));

  auto* check_kframe = app.add_subcommand("check-kframe", "K-frame certificate for {\"frame\", \"K\"} input");
  add_common(check_kframe, c);
  check_kframe->add_option("--lower", lower, "Lower bound C (default: optimal)");
  check_kframe->add_option("--upper", upper, "Upper bound D (default: optimal)");

  auto* check_atomic = app.add_subcommand("check-atomic", "Atomic-system certificate for {\"frame\", \"K\"} input");
  add_common(check_atomic, c);

  auto* douglas = app.add_subcommand("douglas", "Douglas factorization report for {\"S\", \"T\"} input");
  add_common(douglas, c);

  std::vector<std::string> suites;
  std::optional<std::uint64_t> replay;
  auto* props = app.add_subcommand("properties", "Run the randomized property suites");
  add_common(props, c);
  props->add_option("--suite", suites, "Suite id (repeatable; default all)");
  props->add_option("--replay", replay, "Replay one trial seed of a single --suite");
  props->add_flag_callback("--list", [] {
    for (const auto& n : harness::suite_names()) std::cout << n << "\n";
    throw CLI::Success();
  }, "List suite ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kValid : kUsage;
  }

  const auto tols = parse_tols(c.tols);
  const auto tol = [&](const char* name) { return tols.at(name); };
  const bool as_json = c.json_out;

  if (*gen) {
    const AlgebraSpec spec = parse_spec(c.spec);
    const int m = c.rank.value_or(2);
    const int n = c.count.value_or(std::max(m, 3));
    Rng rng(c.seed);
    json doc;
    if (kind == "frame") {
      doc = io::to_json(random_frame(spec, m, n, c.seed, min_lower));
    } else if (kind == "operator") {
      doc = io::to_json(random_operator(spec, m, m, rng));
    } else if (kind == "pair") {
      doc["frame"] = io::to_json(random_frame(spec, m, n, c.seed, min_lower));
      doc["K"] = io::to_json(random_operator(spec, m, m, rng));
    } else {
      const ModuleOperator t = random_operator(spec, n, m, rng);
      doc["T"] = io::to_json(t);
      doc["S"] = io::to_json(random_operator(spec, m, m, rng));
    }
    doc["seed"] = c.seed;
    emit_json(c, doc);
    return kValid;
  }

  if (*bounds) {
    const FrameSystem f = load_frame(load_input(c));
    const FrameBounds b = optimal_frame_bounds(f);
    as_json ? emit_json(c, io::to_json(b)) : emit(c, fmt_bounds(b));
    return b.is_frame ? kValid : kInvalid;
  }

  if (*dual) {
    const FrameSystem f = load_frame(load_input(c));
    const double cond = condition_number(f);
    const FrameSystem d = canonical_dual(f);
    json doc = io::to_json(d);
    doc["condition_number"] = cond;
    if (cond > kIllConditioned) doc["warning"] = "frame operator is ill-conditioned; reconstruction accuracy degraded";
    if (as_json) {
      emit_json(c, doc);
    } else {
      std::ostringstream s;
      s << "canonical dual of " << d.size() << " vectors in A^" << d.module_rank() << ", condition number " << cond
        << "\n" << doc.dump(2) << "\n";
      emit(c, s.str());
    }
    return kValid;
  }

  if (*check_frame) {
    const FrameSystem f = load_frame(load_input(c));
    const FrameBounds opt = optimal_frame_bounds(f);
    const BoundsFlavor fl = flavor == "norm" ? BoundsFlavor::norm : BoundsFlavor::loewner;
    bool ok = false;
    if (lower || upper) {
      const double lo = lower.value_or(opt.lower);
      const double hi = upper.value_or(opt.upper);
      ok = verify_frame(f, lo, hi, fl, tol("psd"), kDefaultSamples, c.seed);
      json doc{{"lower", lo}, {"upper", hi}, {"flavor", to_string(fl)}, {"tol", tol("psd")}, {"seed", c.seed},
               {"valid", ok}};
      as_json ? emit_json(c, doc) : emit(c, std::string(ok ? "valid" : "refuted") + "\n");
    } else {
      ok = opt.is_frame;
      as_json ? emit_json(c, io::to_json(opt)) : emit(c, fmt_bounds(opt));
    }
    return ok ? kValid : kInvalid;
  }

  if (*check_kframe) {
    const json doc = load_input(c);
    const FrameSystem f = load_frame(doc);
    const ModuleOperator k = load_operator(doc, "K");
    KFrameCertificate cert = (lower || upper)
                                 ? verify_kframe(f, k, lower.value_or(1.0), upper.value_or(optimal_frame_bounds(f).upper),
                                                 tol("psd"))
                                 : kframe_via_range(f, k, tol("douglas"));
    if (as_json) {
      emit_json(c, io::to_json(cert));
    } else {
      std::ostringstream s;
      s.precision(17);
      s << (cert.valid ? "valid K-frame" : "not a K-frame") << "\nlower " << cert.lower << "\nupper " << cert.upper
        << "\npsd margin " << cert.psd_margin << "\nrange included " << (cert.range_included ? "yes" : "no") << "\n";
      if (cert.warning) s << "warning: " << *cert.warning << "\n";
      emit(c, s.str());
    }
    return cert.valid ? kValid : kInvalid;
  }

  if (*check_atomic) {
    const json doc = load_input(c);
    const AtomicCertificate cert = verify_atomic_system(load_frame(doc), load_operator(doc, "K"), tol("atomic"));
    if (as_json) {
      emit_json(c, io::to_json(cert));
    } else {
      std::ostringstream s;
      s.precision(17);
      s << (cert.valid ? "atomic system for K" : "not an atomic system for K") << "\nresidual " << cert.residual
        << "\ncoefficient bound " << cert.coeff_bound << "\nBessel bound " << cert.bessel_bound << "\n";
      emit(c, s.str());
    }
    return cert.valid ? kValid : kInvalid;
  }

  if (*douglas) {
    const json doc = load_input(c);
    const DouglasReport rep = douglas_report(load_operator(doc, "S"), load_operator(doc, "T"), tol("douglas"),
                                             kDefaultRankTol, c.seed);
    if (as_json) {
      emit_json(c, io::to_json(rep));
    } else {
      std::ostringstream s;
      s.precision(17);
      s << "(1) SS* <= lambda TT*: " << (rep.cond1_lambda ? "lambda = " + std::to_string(*rep.cond1_lambda) : "no")
        << "\n(2) ||S*z|| <= mu ||T*z||: "
        << (rep.cond2_mu ? "mu = " + std::to_string(*rep.cond2_mu) : "no") << " (" << rep.cond2_violations << "/"
        << rep.cond2_spot_checks << " spot-check violations)"
        << "\n(3) TX = S solvable: " << (rep.cond3_solution ? "yes" : "no") << " (residual " << rep.residual << ")"
        << "\n(4) R(S) in R(T): " << (rep.cond4_range_included ? "yes" : "no") << "\n";
      emit(c, s.str());
    }
    return rep.holds() ? kValid : kInvalid;
  }

  if (*props) {
    harness::SuiteConfig cfg;
    cfg.seed = c.seed;
    cfg.trials = c.trials;
    if (!c.spec.empty()) cfg.spec = parse_spec(c.spec);
    cfg.m = c.rank;
    cfg.n = c.count;
    cfg.tolerances = tols;
    cfg.suites = suites;
    if (replay) {
      if (suites.size() != 1) throw UsageError("--replay needs exactly one --suite");
      const harness::TrialOutcome t = harness::run_trial(suites.front(), *replay, cfg);
      json doc{{"suite", suites.front()},
               {"seed", *replay},
               {"pass", t.pass},
               {"margin", harness::margin_json(t.margin)},
               {"error", t.error ? json(*t.error) : json(nullptr)}};
      if (as_json) {
        emit_json(c, doc);
      } else {
        std::ostringstream s;
        s.precision(17);
        s << (t.pass ? "PASS " : "FAIL ") << suites.front() << " seed " << *replay << " margin " << t.margin << "\n";
        if (t.error) s << "error: " << *t.error << "\n";
        emit(c, s.str());
      }
      if (t.consistency) return kConsistency;
      return t.pass ? kValid : kInvalid;
    }
    const harness::SuiteReport rep = harness::run_property_suite(cfg);
    as_json ? emit_json(c, harness::to_json(rep)) : emit(c, harness::to_text(rep));
    if (rep.consistency_error()) return kConsistency;
    return rep.pass() ? kValid : kInvalid;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kConsistency;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}
