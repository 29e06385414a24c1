#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "lingrad/core.hpp"
#include "lingrad/discrete_gradient.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/io.hpp"
#include "lingrad/linear_form.hpp"
#include "lingrad/multilinear.hpp"
#include "lingrad/reference.hpp"
#include "lingrad/sampling.hpp"
#include "lingrad/solver.hpp"
#include "lingrad/stepper.hpp"
#include "lingrad/system_file.hpp"
#include "lingrad/systems.hpp"

namespace lingrad {
namespace cli_detail {

// exit codes: 0 ok, 2 bad flags or content, 3 solver divergence (partial
// output retained), 4 file I/O failure
constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kDivergence = 3;
constexpr int kIo = 4;

inline double strict_number(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw InvalidArgumentError(what + ": '" + text + "' is not a number");
  }
  return v;
}

inline std::vector<double> split_numbers(const std::string& csv,
                                         const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string item =
        csv.substr(pos, comma == std::string::npos ? csv.size() - pos
                                                   : comma - pos);
    out.push_back(strict_number(item, what));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline StateVector parse_x0(const std::string& csv, int dimension) {
  const std::vector<double> values = split_numbers(csv, "--x0");
  if (static_cast<int>(values.size()) != dimension) {
    throw InvalidArgumentError("--x0: expected " + std::to_string(dimension) +
                               " components, got " +
                               std::to_string(values.size()));
  }
  StateVector x(dimension);
  for (int i = 0; i < dimension; ++i) x[i] = values[static_cast<std::size_t>(i)];
  return x;
}

inline Params parse_param_flags(const std::vector<std::string>& flags) {
  Params out;
  for (const auto& flag : flags) {
    const std::size_t eq = flag.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidArgumentError("--param: expected name=value, got '" + flag +
                                 "'");
    }
    const std::string key = flag.substr(0, eq);
    if (out.count(key)) {
      throw InvalidArgumentError("--param: duplicate parameter '" + key + "'");
    }
    out[key] = strict_number(flag.substr(eq + 1), "--param " + key);
  }
  return out;
}

inline DiscreteGradientScheme parse_scheme(const std::string& s) {
  if (s == "midpoint") return DiscreteGradientScheme::midpoint();
  if (s == "itoh-abe") return DiscreteGradientScheme::coordinate_increment();
  if (s == "avf") return DiscreteGradientScheme::mean_value(2);
  if (s.rfind("avf:", 0) == 0) {
    const double q = strict_number(s.substr(4), "--scheme avf");
    if (q != static_cast<int>(q)) {
      throw InvalidArgumentError("--scheme avf: q must be an integer");
    }
    return DiscreteGradientScheme::mean_value(static_cast<int>(q));
  }
  throw InvalidArgumentError(
      "unknown scheme '" + s + "' (midpoint, itoh-abe, or avf:q)");
}

inline LTildePolicy parse_policy(const std::string& s) {
  if (s == "frozen") return LTildePolicy::FrozenAtX;
  if (s == "midpoint") return LTildePolicy::Midpoint;
  throw InvalidArgumentError("unknown policy '" + s +
                             "' (frozen or midpoint)");
}

struct SystemFlags {
  std::string system;
  std::string file;
  std::vector<std::string> params;
  std::string potential;
};

inline AnySystem load_any(const SystemFlags& flags) {
  const bool by_name = !flags.system.empty();
  const bool by_file = !flags.file.empty();
  if (by_name == by_file) {
    throw InvalidArgumentError("need exactly one of --system or --file");
  }
  if (by_name) {
    return builtin(flags.system, parse_param_flags(flags.params),
                   flags.potential);
  }
  if (!flags.params.empty() || !flags.potential.empty()) {
    throw InvalidArgumentError(
        "--param/--potential apply to --system entries; put parameters in "
        "the file");
  }
  return load_system_file(flags.file);
}

inline LinearGradientSystem load_matrix_form(const SystemFlags& flags,
                                             const std::string& command) {
  AnySystem any = load_any(flags);
  if (auto* lin = std::get_if<LinearGradientSystem>(&any)) {
    return std::move(*lin);
  }
  throw InvalidArgumentError(command +
                             " supports matrix-form systems only");
}

inline std::string system_label(const AnySystem& any) {
  return std::visit([](const auto& s) { return s.name; }, any);
}

inline Params system_params(const AnySystem& any) {
  return std::visit([](const auto& s) { return s.parameters; }, any);
}

inline std::string join_g17(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_g17(values[i]);
  }
  return out;
}

inline void print_summary(std::ostream& os, const Trajectory& traj) {
  std::vector<double> finals, drifts;
  for (const auto& row : traj.v_values) {
    finals.push_back(row.back());
    double d = 0.0;
    for (double v : row) d = std::max(d, std::abs(v - row.front()));
    drifts.push_back(d);
  }
  double iters = 0.0;
  for (std::size_t k = 1; k < traj.diagnostics.size(); ++k) {
    iters += traj.diagnostics[k].iterations;
  }
  const std::size_t steps = traj.diagnostics.size() - 1;
  os << "summary: final-V=" << join_g17(finals)
     << " max-drift=" << join_g17(drifts) << " mean-iterations="
     << format_g17(steps ? iters / static_cast<double>(steps) : 0.0) << "\n";
}

struct IntegrateArgs {
  SystemFlags sys;
  std::string x0;
  double tau = 0.0;
  int steps = 0;
  std::string scheme = "midpoint";
  std::string policy = "midpoint";
  bool policy_given = false;
  double tol = -1.0;
  std::string out_path;
  std::string format = "csv";
};

inline int cmd_integrate(const IntegrateArgs& args, std::ostream& out,
                         std::ostream& err) {
  const AnySystem any = load_any(args.sys);
  const int n = std::visit([](const auto& s) { return s.dimension; }, any);
  const StateVector x0 = parse_x0(args.x0, n);
  if (!(args.tau > 0.0)) throw InvalidArgumentError("--tau must be > 0");
  if (args.steps < 1) throw InvalidArgumentError("--steps must be >= 1");
  const DiscreteGradientScheme scheme = parse_scheme(args.scheme);
  const LTildePolicy policy = parse_policy(args.policy);
  const OutputFormat fmt = parse_output_format(args.format);

  SolverConfig solver;
  solver.tol = args.tol >= 0.0 ? args.tol : 1e-12 * (1.0 + x0.norm());

  RunMetadata meta;
  meta.system = system_label(any);
  meta.params = system_params(any);
  meta.scheme = args.scheme;
  meta.policy = args.policy;
  meta.tau = args.tau;
  meta.steps = args.steps;
  meta.tol = solver.tol;

  const bool multilinear = std::holds_alternative<MultiLinearGradientSystem>(any);
  if (multilinear && args.policy_given && args.policy != "midpoint") {
    throw InvalidArgumentError(
        "--policy applies to matrix-form systems; the multilinear map "
        "evaluates L at the midpoint");
  }

  auto emit = [&](const Trajectory& traj) {
    if (!args.out_path.empty()) {
      write_trajectory_file(args.out_path, fmt, traj, meta);
      print_summary(out, traj);
    } else {
      if (fmt == OutputFormat::Csv) {
        write_trajectory_csv(out, traj);
      } else {
        write_trajectory_json(out, traj, meta);
      }
      print_summary(err, traj);
    }
  };

  try {
    Trajectory traj;
    if (multilinear) {
      traj = multi_integrate(std::get<MultiLinearGradientSystem>(any), x0,
                             args.tau, args.steps, scheme, solver);
    } else {
      traj = integrate(std::get<LinearGradientSystem>(any), x0, args.tau,
                       args.steps, scheme, policy, solver);
    }
    emit(traj);
    return kOk;
  } catch (const IntegrateDivergenceError& e) {
    err << "integrate: diverged at step " << e.step_index() << ": "
        << e.what() << "\n";
    meta.steps = static_cast<int>(e.partial().states.size()) - 1;
    if (!args.out_path.empty() && !e.partial().states.empty()) {
      write_trajectory_file(args.out_path, fmt, e.partial(), meta);
      err << "integrate: partial trajectory written to " << args.out_path
          << "\n";
    }
    return kDivergence;
  }
}

struct CheckArgs {
  SystemFlags sys;
  int points = 100;
  std::string box = "-2,2";
};

inline int cmd_check(const CheckArgs& args, std::ostream& out,
                     std::ostream& /*err*/) {
  const LinearGradientSystem sys = load_matrix_form(args.sys, "check");
  if (args.points < 2) throw InvalidArgumentError("--points must be >= 2");
  const std::vector<double> box = split_numbers(args.box, "--box");
  if (box.size() != 2 || !(box[0] < box[1])) {
    throw InvalidArgumentError("--box must be lo,hi with lo < hi");
  }

  std::vector<StateVector> usable;
  for (const auto& x : halton_box(sys.dimension, args.points, box[0], box[1])) {
    try {
      (void)sys.L(x);
      (void)sys.V.grad(x);
      if (sys.raw_f) (void)(*sys.raw_f)(x);
      usable.push_back(x);
    } catch (const Error&) {
      continue;  // outside the system's domain
    }
  }
  out << "system: " << sys.name << "\n";
  out << "dimension: " << sys.dimension << "\n";
  if (usable.empty()) {
    out << "class: unclassified\n";
    out << "note: no usable sample points in the box\n";
    return kOk;
  }

  const StructureClass detected = classify_field(sys.L, usable);
  out << "class: " << to_string(detected) << "\n";

  if (sys.raw_f) {
    double recon = 0.0;
    for (const auto& x : usable) {
      const StateVector f = (*sys.raw_f)(x);
      recon = std::max(recon, (sys.L(x) * sys.V.grad(x) - f).norm() /
                                  (1.0 + f.norm()));
    }
    out << "reconstruction residual: " << format_g17(recon) << "\n";
  }

  if (detected == StructureClass::Antisymmetric && sys.dimension >= 3) {
    double jac = 0.0;
    const std::size_t count = std::min<std::size_t>(usable.size(), 20);
    for (std::size_t i = 0; i < count; ++i) {
      jac = std::max(jac, verify_jacobi(sys.L, usable[i]));
    }
    out << "jacobi residual: " << format_g17(jac) << "\n";
  }

  std::vector<std::pair<StateVector, StateVector>> pairs;
  for (std::size_t i = 0; i + 1 < usable.size(); i += 2) {
    pairs.emplace_back(usable[i], usable[i + 1]);
  }
  const std::vector<std::pair<std::string, DiscreteGradientScheme>> schemes = {
      {"midpoint", DiscreteGradientScheme::midpoint()},
      {"itoh-abe", DiscreteGradientScheme::coordinate_increment()},
      {"avf:2", DiscreteGradientScheme::mean_value(2)}};
  for (const auto& [label, scheme] : schemes) {
    const auto [a1, a2] = check_axioms(scheme, sys.V, pairs);
    out << "axioms " << label << ": a1=" << format_g17(a1)
        << " a2=" << format_g17(a2) << "\n";
  }
  return kOk;
}

struct CompareArgs {
  SystemFlags sys;
  std::string x0;
  double tau = 0.0;
  int steps = 0;
  std::string scheme = "midpoint";
  std::string policy = "midpoint";
  double tol = -1.0;
  std::string baseline = "explicit-euler";
};

inline int cmd_compare(const CompareArgs& args, std::ostream& out,
                       std::ostream& /*err*/) {
  const LinearGradientSystem sys = load_matrix_form(args.sys, "compare");
  const StateVector x0 = parse_x0(args.x0, sys.dimension);
  if (!(args.tau > 0.0)) throw InvalidArgumentError("--tau must be > 0");
  if (args.steps < 0) throw InvalidArgumentError("--steps must be >= 0");
  if (args.baseline != "explicit-euler" && args.baseline != "rk-reference") {
    throw InvalidArgumentError("--baseline is explicit-euler or rk-reference");
  }

  out << "t,dg-drift,baseline-drift\n";
  if (args.steps == 0) return kOk;

  SolverConfig solver;
  solver.tol = args.tol >= 0.0 ? args.tol : 1e-12 * (1.0 + x0.norm());
  const Trajectory dg =
      integrate(sys, x0, args.tau, args.steps, parse_scheme(args.scheme),
                parse_policy(args.policy), solver);

  // baseline V series at the same times; explicit Euler may leave the
  // domain, in which case the series is truncated and flagged
  const VectorField rhs = sys.rhs_field();
  std::vector<double> base_v;
  base_v.reserve(static_cast<std::size_t>(args.steps) + 1);
  bool baseline_diverged = false;
  if (args.baseline == "explicit-euler") {
    StateVector y = x0;
    base_v.push_back(sys.V(y));
    for (int k = 1; k <= args.steps; ++k) {
      try {
        y = (y + args.tau * rhs(y)).eval();
        base_v.push_back(sys.V(y));
      } catch (const Error&) {
        baseline_diverged = true;
        break;
      }
    }
  } else {
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(args.steps) + 1);
    for (int k = 0; k <= args.steps; ++k) times.push_back(k * args.tau);
    try {
      const Trajectory ref = reference_integrate(
          rhs, x0, args.steps * args.tau, 1e-10, times);
      for (const auto& x : ref.states) base_v.push_back(sys.V(x));
    } catch (const StepSizeUnderflowError&) {
      baseline_diverged = true;
      base_v.push_back(sys.V(x0));
    }
  }

  const double v0 = dg.v_values[0][0];
  const std::size_t rows = dg.states.size();
  const std::size_t stride = (rows + 24) / 25;
  double dg_max = 0.0, base_max = 0.0;
  int dg_up = 0, base_up = 0;
  const double rise_tol = 1e-10 * (1.0 + std::abs(v0));
  for (std::size_t k = 0; k < rows; ++k) {
    const double dg_drift = std::abs(dg.v_values[0][k] - v0);
    dg_max = std::max(dg_max, dg_drift);
    if (k > 0 && dg.v_values[0][k] > dg.v_values[0][k - 1] + rise_tol) {
      ++dg_up;
    }
    const bool have_base = k < base_v.size();
    if (have_base) {
      base_max = std::max(base_max, std::abs(base_v[k] - v0));
      if (k > 0 && base_v[k] > base_v[k - 1] + rise_tol) ++base_up;
    }
    if (k % stride == 0 || k + 1 == rows) {
      out << format_g17(dg.times[k]) << "," << format_g17(dg_drift) << ",";
      out << (have_base ? format_g17(std::abs(base_v[k] - v0)) : "diverged");
      out << "\n";
    }
  }
  out << "summary: dg-max-drift=" << format_g17(dg_max)
      << " baseline-max-drift=" << format_g17(base_max)
      << " dg-increases=" << dg_up << " baseline-increases=" << base_up;
  if (baseline_diverged) out << " baseline-diverged=true";
  out << "\n";
  return kOk;
}

struct OrderArgs {
  SystemFlags sys;
  std::string x0;
  std::string tau_list;
  double t_end = 1.0;
  std::string scheme = "midpoint";
  std::string policy = "midpoint";
};

inline int cmd_order(const OrderArgs& args, std::ostream& out,
                     std::ostream& /*err*/) {
  const LinearGradientSystem sys = load_matrix_form(args.sys, "order");
  const StateVector x0 = parse_x0(args.x0, sys.dimension);
  const std::vector<double> taus = split_numbers(args.tau_list, "--tau-list");
  const double slope = empirical_order(sys, parse_scheme(args.scheme),
                                       parse_policy(args.policy), x0,
                                       args.t_end, taus);
  out << "scheme=" << args.scheme << " policy=" << args.policy
      << " slope=" << format_g17(slope) << "\n";
  return kOk;
}

inline void add_system_flags(CLI::App* cmd, SystemFlags& flags) {
  cmd->add_option("--system", flags.system, "catalog system name");
  cmd->add_option("--file", flags.file, "system definition file");
  cmd->add_option("--param", flags.params,
                  "parameter binding name=value (repeatable)");
  cmd->add_option("--potential", flags.potential,
                  "potential expression for damped-particle");
}

}  // namespace cli_detail

/// Front end entry point; args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"linear-gradient structure-preserving integrator toolkit"};
  app.require_subcommand(1);

  IntegrateArgs ia;
  CLI::App* integ = app.add_subcommand(
      "integrate", "run the discrete-gradient map, write a trajectory");
  add_system_flags(integ, ia.sys);
  integ->add_option("--x0", ia.x0, "initial state, comma separated")
      ->required();
  integ->add_option("--tau", ia.tau, "step size")->required();
  integ->add_option("--steps", ia.steps, "number of steps")->required();
  integ->add_option("--scheme", ia.scheme,
                    "discrete gradient: midpoint|itoh-abe|avf:q");
  CLI::Option* pol =
      integ->add_option("--policy", ia.policy, "L evaluation: frozen|midpoint");
  integ->add_option("--tol", ia.tol, "solver tolerance (default scales x0)");
  integ->add_option("--out", ia.out_path, "output path (default stdout)");
  integ->add_option("--format", ia.format, "csv|json");

  CheckArgs ca;
  CLI::App* check = app.add_subcommand(
      "check", "report structure class and residuals for a system");
  add_system_flags(check, ca.sys);
  check->add_option("--points", ca.points, "sample count");
  check->add_option("--box", ca.box, "sample box lo,hi");

  CompareArgs cmp;
  CLI::App* compare = app.add_subcommand(
      "compare", "drift of the discrete-gradient map vs a baseline");
  add_system_flags(compare, cmp.sys);
  compare->add_option("--x0", cmp.x0, "initial state")->required();
  compare->add_option("--tau", cmp.tau, "step size")->required();
  compare->add_option("--steps", cmp.steps, "number of steps")->required();
  compare->add_option("--scheme", cmp.scheme, "discrete gradient scheme");
  compare->add_option("--policy", cmp.policy, "L evaluation policy");
  compare->add_option("--tol", cmp.tol, "solver tolerance");
  compare->add_option("--baseline", cmp.baseline,
                      "rk-reference|explicit-euler");

  OrderArgs oa;
  CLI::App* order = app.add_subcommand(
      "order", "empirical order of accuracy from a tau sweep");
  add_system_flags(order, oa.sys);
  order->add_option("--x0", oa.x0, "initial state")->required();
  order->add_option("--tau-list", oa.tau_list,
                    "comma separated taus, strictly decreasing, >= 4")
      ->required();
  order->add_option("--t-end", oa.t_end, "integration horizon");
  order->add_option("--scheme", oa.scheme, "discrete gradient scheme");
  order->add_option("--policy", oa.policy, "L evaluation policy");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  ia.policy_given = pol->count() > 0;
  try {
    if (integ->parsed()) return cmd_integrate(ia, out, err);
    if (check->parsed()) return cmd_check(ca, out, err);
    if (compare->parsed()) return cmd_compare(cmp, out, err);
    return cmd_order(oa, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const SolverDivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kDivergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace lingrad
