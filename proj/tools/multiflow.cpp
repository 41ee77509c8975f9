#include <iostream>

#include <CLI11.hpp>

#include "multiflow/cli.hpp"

namespace {

struct Flags {
  bool t0 = false, t = false, x0 = false, y = false, phi0 = false;
  bool kind = false, force_path = false, control = false, export_path = false;
};

void add_flags(CLI::App* sub, multiflow::cli::Options& o, const Flags& f) {
  if (f.t0) sub->add_option("--t0", o.t0, "initial multitime, comma separated");
  if (f.t) sub->add_option("--t", o.t, "final multitime, comma separated");
  if (f.x0) sub->add_option("--x0", o.x0, "initial state, comma separated");
  if (f.y) sub->add_option("--y", o.y, "target state, comma separated");
  if (f.phi0) sub->add_option("--phi0", o.phi0, "adjoint initial state");
  if (f.kind) {
    sub->add_option("--kind", o.kind, "C (controllability) or R (reachability)")
        ->check(CLI::IsMember({"C", "R"}));
  }
  if (f.force_path) {
    sub->add_option("--force-path", o.force_path,
                    "interior waypoints \"a,b;c,d\"; integrates along t0 -> ... -> t");
  }
  if (f.control) sub->add_option("--control", o.control, "control file (JSON)");
  if (f.export_path) {
    sub->add_option("--export", o.export_path, "write the control to a file");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multitime linear control systems: integrability, flows, "
               "gramians, controllability and control synthesis"};
  app.require_subcommand(1);
  std::string config;
  bool json = false;
  multiflow::cli::Options options;

  struct Spec {
    const char* name;
    const char* help;
    Flags flags;
  };
  const Spec specs[] = {
      {"check", "report every compatibility condition", {}},
      {"flow", "fundamental matrix and solutions",
       {.t0 = true, .t = true, .x0 = true, .phi0 = true}},
      {"gramian", "controllability or reachability gramian",
       {.t0 = true, .t = true, .kind = true, .force_path = true}},
      {"kalman", "controllability matrix G of a constant system", {}},
      {"analyze", "transfer feasibility and complete controllability",
       {.t0 = true, .t = true, .x0 = true, .y = true}},
      {"synthesize", "minimum-norm control for a phase transfer",
       {.t0 = true, .t = true, .x0 = true, .y = true, .export_path = true}},
      {"simulate", "solve the controlled system",
       {.t0 = true, .t = true, .x0 = true, .control = true}},
  };
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("config", config, "system config (JSON)")->required();
    sub->add_flag("--json", json, "print the report as JSON");
    add_flags(sub, options, s.flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const auto out = multiflow::cli::run_file(command, config, options);
  std::cout << (json ? multiflow::cli::render_json(out.report)
                     : multiflow::cli::render_text(out.report));
  return out.exit_code;
}
