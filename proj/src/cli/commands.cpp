#include <fstream>
#include <functional>
#include <map>

#include "multiflow/cli.hpp"
#include "multiflow/flow.hpp"
#include "multiflow/gramian.hpp"
#include "multiflow/kalman.hpp"
#include "multiflow/synth.hpp"

namespace multiflow::cli {

namespace {

class Command {
 public:
  Command(const SystemConfig& config, const Options& options, Json& report)
      : config_(config), sys_(config.system), cfg_(config.numeric),
        options_(options), report_(report) {}

  // The operation a gate refusal is attributed to.
  void stage(const std::string& name) { stage_ = name; }
  const std::string& current_stage() const { return stage_; }

  void warn(const std::string& w) { warnings_.push_back(w); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  MultiTime point(const std::optional<std::string>& flag, const char* name) const {
    if (!flag) throw ConfigError(std::string("missing ") + name);
    std::vector<double> c = parse_list(*flag, name);
    if (c.size() != sys_.m()) {
      throw ConfigError(std::string(name) + " needs m = " + std::to_string(sys_.m()) +
                        " coordinates, got " + std::to_string(c.size()));
    }
    return MultiTime(std::move(c));
  }

  std::optional<Vector> state(const std::optional<std::string>& flag,
                              const char* name) const {
    if (!flag) return std::nullopt;
    const std::vector<double> c = parse_list(*flag, name);
    if (c.size() != sys_.n()) {
      throw ConfigError(std::string(name) + " needs n = " + std::to_string(sys_.n()) +
                        " entries, got " + std::to_string(c.size()));
    }
    return Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
  }

  Vector required_state(const std::optional<std::string>& flag, const char* name) const {
    auto v = state(flag, name);
    if (!v) throw ConfigError(std::string("missing ") + name);
    return *v;
  }

  void check();
  void flow();
  void gramian();
  void kalman();
  void analyze();
  void synthesize();
  void simulate();

 private:
  void times(const MultiTime& t0, const MultiTime& t) {
    report_["t0"] = vector_json(t0.to_vector());
    report_["t"] = vector_json(t.to_vector());
    report_["ordering"] = std::string(ordering_name(classify_ordering(t0, t)));
  }

  Json space_json(const SubspaceBasis& b) const {
    return Json{{"rank", b.rank},
                {"singular_values", vector_json(b.singular_values)},
                {"basis", matrix_json(b.columns)}};
  }

  const SystemConfig& config_;
  const LinearSystem& sys_;
  const NumericConfig& cfg_;
  const Options& options_;
  Json& report_;
  std::string stage_;
  std::vector<std::string> warnings_;
};

void Command::check() {
  Json list = Json::array();
  list.push_back(condition_json(check_M_commutation(sys_, cfg_)));
  if (config_.F) {
    list.push_back(condition_json(check_F_compatibility(sys_, *config_.F, cfg_)));
  } else {
    list.push_back(Json{{"condition", std::string(condition_name(Condition::FCompatibility))},
                        {"applicable", false},
                        {"summary", "no forcing F in the config"}});
  }
  if (config_.u) {
    list.push_back(condition_json(
        check_control_compat(sys_, ControlFamily::from_family(*config_.u), cfg_)));
  } else {
    list.push_back(
        Json{{"condition", std::string(condition_name(Condition::ControlCompatibility))},
             {"applicable", false},
             {"summary", "no control u in the config"}});
  }
  list.push_back(condition_json(check_gramian_compat(sys_, cfg_)));
  report_["conditions"] = list;
}

void Command::flow() {
  const MultiTime t0 = point(options_.t0, "--t0"), t = point(options_.t, "--t");
  times(t0, t);
  stage("flow");
  const auto fm = fundamental_matrix(sys_, t, t0, cfg_);
  report_["chi"] = matrix_json(fm.value);
  report_["condition_number"] = rounded(fm.condition_number);
  if (fm.ill_conditioned) {
    warn("chi(t, t0) is ill-conditioned (condition number " +
         std::to_string(fm.condition_number) + ")");
  }
  const auto x0 = state(options_.x0, "--x0");
  const auto phi0 = state(options_.phi0, "--phi0");
  if (x0) {
    report_["x0"] = vector_json(*x0);
    report_["x"] = vector_json(fm.value * *x0);
  }
  if (phi0) {
    const Vector phi = solve_adjoint(sys_, t0, *phi0, t, cfg_);
    report_["phi0"] = vector_json(*phi0);
    report_["phi"] = vector_json(phi);
    if (x0) {
      report_["pairing"] = Json{{"at_t0", rounded(x0->dot(*phi0))},
                                {"at_t", rounded((fm.value * *x0).dot(phi))}};
    }
  }
  if (config_.F && x0) {
    stage("affine solution");
    const Vector xf = solve_affine(sys_, *config_.F, t0, *x0, t,
                                   PolylineCurve::segment(t0, t), cfg_);
    report_["x_forced"] = vector_json(xf);
  }
}

void Command::gramian() {
  const MultiTime t0 = point(options_.t0, "--t0"), t = point(options_.t, "--t");
  GramianKind kind;
  if (options_.kind == "C") {
    kind = GramianKind::Controllability;
  } else if (options_.kind == "R") {
    kind = GramianKind::Reachability;
  } else {
    throw ConfigError("--kind must be C or R");
  }
  times(t0, t);
  report_["kind"] = std::string(gramian_kind_name(kind));
  const ConditionReport compat = check_gramian_compat(sys_, cfg_);
  report_["gramian_condition"] = condition_json(compat);
  stage("gramian");
  const Gramian g = [&] {
    if (!options_.force_path) {
      return kind == GramianKind::Controllability
                 ? controllability_gramian(sys_, t0, t, cfg_)
                 : reachability_gramian(sys_, t0, t, cfg_);
    }
    std::vector<MultiTime> pts{t0};
    for (auto& p : parse_waypoints(*options_.force_path)) {
      if (p.dim() != sys_.m()) throw ConfigError("--force-path waypoints need m coordinates");
      pts.push_back(std::move(p));
    }
    pts.push_back(t);
    Json path = Json::array();
    for (const auto& p : pts) path.push_back(vector_json(p.to_vector()));
    report_["path"] = path;
    Gramian forced = gramian_along(sys_, PolylineCurve(pts), kind, cfg_);
    report_["label"] = forced.path_dependent ? "path-dependent" : "path-independent";
    if (forced.path_dependent) {
      warn("gramian compatibility fails; the value depends on the curve supplied");
    }
    return forced;
  }();
  report_["gramian"] = matrix_json(g.value);
  const SubspaceBasis b = image_basis(g.value, cfg_);
  report_["rank"] = b.rank;
  report_["singular_values"] = vector_json(b.singular_values);
}

void Command::kalman() {
  stage("controllability matrix");
  const ControllabilityMatrix G = controllability_matrix(sys_, cfg_);
  report_["G"] = matrix_json(G.value);
  Json blocks = Json::array();
  const std::size_t k = sys_.k();
  for (std::size_t i = 0; i < G.blocks.size(); ++i) {
    blocks.push_back(Json{{"columns", {i * k + 1, (i + 1) * k}},
                          {"alpha", G.blocks[i].alpha + 1},
                          {"exponents", G.blocks[i].exponents}});
  }
  report_["blocks"] = blocks;
  const std::size_t r = rank_G(G, cfg_);
  report_["rank_G"] = r;
  report_["complete"] = r == sys_.n();
}

void Command::analyze() {
  const MultiTime t0 = point(options_.t0, "--t0"), t = point(options_.t, "--t");
  const auto x0 = state(options_.x0, "--x0");
  const auto y = state(options_.y, "--y");
  if (x0.has_value() != y.has_value()) throw ConfigError("--x0 and --y go together");
  times(t0, t);
  if (sys_.is_constant()) {
    stage("autonomous analysis");
    const Vector zero = Vector::Zero(static_cast<Eigen::Index>(sys_.n()));
    const AutonomousReport r =
        autonomous_analysis(sys_, t0, x0.value_or(zero), t, y.value_or(zero), cfg_);
    report_["gramian_condition"] = condition_json(r.gramian_condition);
    report_["rank_G"] = r.rank_G;
    report_["complete_by_G"] = r.complete_by_G;
    if (r.gramian_complete) {
      report_["rank_C"] = r.gramian_complete->rank;
      report_["rank_C_le_rank_G"] = r.gramian_complete->rank <= r.rank_G;
      report_["completely_reachable"] = r.gramian_complete->completely_reachable;
      if (!r.gramian_complete->caveat.empty()) {
        report_["caveat"] = r.gramian_complete->caveat;
      }
    }
    if (r.probe) {
      report_["probe"] = Json{{"degree", r.probe->degree},
                              {"control_space_dimension", r.probe->dimension},
                              {"attained", space_json(r.probe->attained)}};
    }
    report_["completely_controllable"] = r.completely_controllable;
    if (x0) {
      Json tr{{"x0", vector_json(*x0)},
              {"y", vector_json(*y)},
              {"w", vector_json(r.w)},
              {"by_G", r.transfer_by_G},
              {"residual_G", rounded(r.residual_G)}};
      if (r.gramian_transfer) {
        tr["by_gramian"] = r.gramian_transfer->feasible;
        tr["residual_gramian"] = rounded(r.gramian_transfer->residual);
      }
      if (r.transfer_by_probe) tr["by_probe"] = *r.transfer_by_probe;
      tr["feasible"] = r.transfer_feasible;
      report_["transfer"] = tr;
    }
    report_["authority"] = r.authority;
    for (const auto& w : r.warnings) warn(w);
    return;
  }
  stage("gramian");
  const CompletenessDecision d = decide_complete(sys_, t0, t, cfg_);
  report_["rank_C"] = d.rank;
  report_["completely_controllable"] = d.completely_controllable;
  report_["completely_reachable"] = d.completely_reachable;
  if (!d.caveat.empty()) {
    report_["caveat"] = d.caveat;
    warn(d.caveat);
  }
  if (x0) {
    const TransferDecision td = decide_transfer(sys_, t0, *x0, t, *y, cfg_);
    report_["transfer"] = Json{{"x0", vector_json(*x0)},
                               {"y", vector_json(*y)},
                               {"w", vector_json(td.w)},
                               {"residual", rounded(td.residual)},
                               {"feasible", td.feasible}};
  }
  report_["authority"] = "gramian";
}

void Command::synthesize() {
  const MultiTime t0 = point(options_.t0, "--t0"), t = point(options_.t, "--t");
  const Vector x0 = required_state(options_.x0, "--x0");
  const Vector y = required_state(options_.y, "--y");
  times(t0, t);
  stage("synthesis");
  const TransferSynthesis ts = synthesize_transfer(sys_, t0, x0, t, y, cfg_);
  report_["feasible"] = ts.feasible;
  report_["residual"] = rounded(ts.residual);
  report_["rank_C"] = numerical_rank(ts.gramian.value, cfg_);
  report_["control"] = Json{{"form", "u_alpha(s) = N_alpha(s)^T chi(t0, s)^T v"},
                            {"t0", vector_json(t0.to_vector())},
                            {"v", vector_json(ts.control.v)},
                            {"zero", ts.control.v.isZero(0.0)},
                            {"valid", ts.control.valid}};
  if (!ts.feasible) {
    warn("target not reachable; the control reaches the least-squares nearest endpoint");
  }
  stage("verification");
  const TransferCheck tc = verify_transfer(sys_, ts.control, t0, x0, t, cfg_);
  report_["verification"] = Json{{"endpoint", vector_json(tc.endpoint)},
                                 {"error", rounded(tc.error.value_or(0.0))}};
  if (options_.export_path) {
    Json out{{"kind", "synthesized"},
             {"form", "u_alpha(s) = N_alpha(s)^T chi(t0, s)^T v"}};
    std::vector<double> a(t0.coords().begin(), t0.coords().end());
    std::vector<double> v(ts.control.v.data(), ts.control.v.data() + ts.control.v.size());
    out["t0"] = a;
    out["v"] = v;
    // chi(t0, s) sampled along the segment, for consumers without a solver.
    const Flow flow(sys_, cfg_);
    Json samples = Json::array();
    const PolylineCurve seg = PolylineCurve::segment(t0, t);
    for (int i = 0; i <= 4; ++i) {
      const MultiTime s = seg.eval(i / 4.0);
      samples.push_back(
          Json{{"s", vector_json(s.to_vector())}, {"chi", matrix_json(flow.chi(t0, s))}});
    }
    out["chi_samples"] = samples;
    std::ofstream f(*options_.export_path);
    if (!f) throw ConfigError("cannot write " + *options_.export_path);
    f << out.dump(2) << '\n';
    report_["exported"] = *options_.export_path;
  }
}

void Command::simulate() {
  const MultiTime t0 = point(options_.t0, "--t0"), t = point(options_.t, "--t");
  const Vector x0 = required_state(options_.x0, "--x0");
  times(t0, t);
  std::optional<ControlSpec> spec;
  if (options_.control) {
    spec = load_control(*options_.control, config_);
  } else if (config_.u) {
    spec = ControlSpec{ControlFamily::from_family(*config_.u),
                       Json{{"kind", "expressions"}, {"source", "config"}}};
  } else {
    throw ConfigError("simulate needs --control or a \"u\" entry in the config");
  }
  report_["control"] = spec->description;
  report_["control_condition"] =
      condition_json(check_control_compat(sys_, spec->family, cfg_));
  stage("simulation");
  report_["x0"] = vector_json(x0);
  report_["x"] = vector_json(solve_controlled(sys_, spec->family, t0, x0, t, cfg_));
}

}  // namespace

Outcome run(const std::string& command, const SystemConfig& config,
            const Options& options) {
  static const std::map<std::string, void (Command::*)()> commands{
      {"check", &Command::check},         {"flow", &Command::flow},
      {"gramian", &Command::gramian},     {"kalman", &Command::kalman},
      {"analyze", &Command::analyze},     {"synthesize", &Command::synthesize},
      {"simulate", &Command::simulate}};
  Outcome out;
  out.report = Json{{"command", command},
                    {"system", Json{{"m", config.system.m()},
                                    {"n", config.system.n()},
                                    {"k", config.system.k()},
                                    {"constant", config.system.is_constant()}}}};
  const auto it = commands.find(command);
  if (it == commands.end()) {
    out.report["error"] = "unknown command " + command;
    out.exit_code = 1;
    return out;
  }
  Command c(config, options, out.report);
  try {
    (c.*(it->second))();
  } catch (const GateError& e) {
    out.report["refusal"] =
        Json{{"operation", c.current_stage()},
             {"message", c.current_stage() + " refused: " + e.report().summary()},
             {"condition", condition_json(e.report())}};
    out.exit_code = 2;
  } catch (const Error& e) {
    out.report["error"] = e.what();
    out.exit_code = 1;
  }
  out.report["warnings"] = c.warnings();
  return out;
}

Outcome run_file(const std::string& command, const std::string& config_path,
                 const Options& options) {
  try {
    return run(command, load_config(config_path), options);
  } catch (const Error& e) {
    return Outcome{Json{{"command", command}, {"error", e.what()}}, 1};
  }
}

}  // namespace multiflow::cli
