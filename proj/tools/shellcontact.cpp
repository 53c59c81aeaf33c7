// Command-line driver: single runs, friction sweeps and the point-load
// stiffness oracle. Exit codes: 0 ok, 1 config error, 2 solver failure,
// 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shellcontact.hpp"

namespace sc = shellcontact;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 1, kSolver = 2, kIo = 3 };

struct Common {
  std::string config_path;
  std::string out;
  std::vector<double> mu;
  std::size_t jobs = 1;
  std::vector<std::size_t> snapshot_steps;
  bool snapshot_given = false;
};

sc::RunConfig load_config(const Common& o) {
  std::string text;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path, std::ios::binary);
    if (!in) throw sc::IoError("cannot read config " + o.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  sc::RunConfig c = sc::parse_config(text);
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.snapshot_given) c.snapshot_steps = o.snapshot_steps;
  c.validate();
  return c;
}

sc::RunOptions run_options(const sc::RunConfig& c) {
  sc::RunOptions opt;
  opt.snapshot_steps.insert(c.snapshot_steps.begin(), c.snapshot_steps.end());
  return opt;
}

std::string mu_label(double mu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mu_%g", mu);
  return buf;
}

void report(const std::string& label, const sc::Trajectory& t) {
  auto ev = [&](const std::optional<std::size_t>& k) {
    return k ? std::to_string(*k) : std::string("none");
  };
  std::fprintf(stderr, "%s: steps=%zu hertz_deviation=%s buckling=%s unbuckling=%s", label.c_str(),
               t.records.size() - 1, ev(t.events.hertz_deviation).c_str(),
               ev(t.events.buckling).c_str(), ev(t.events.unbuckling).c_str());
  if (t.W) std::fprintf(stderr, " W=%.4e J", *t.W);
  std::fprintf(stderr, " D=%.4e J audit=%.2e\n", t.final_dissipation(), t.audit_ratio);
  if (t.failure) std::fprintf(stderr, "%s: step failure: %s\n", label.c_str(), t.failure->c_str());
}

int cmd_run(const Common& o) {
  sc::RunConfig c = load_config(o);
  if (o.mu.size() > 1) throw sc::InputError("run takes a single --mu value; use sweep for lists");
  if (o.mu.size() == 1) {
    c.contact.mu = o.mu.front();
    c.validate();
  }
  const sc::ReferenceMesh mesh = sc::build_mesh(c.model);
  const sc::Trajectory t =
      sc::run_schedule(c.model, mesh, c.contact, c.schedule, c.solver, run_options(c));
  sc::write_run(c.output_dir, c, mesh, t);
  report("run", t);
  return t.failure ? kSolver : kOk;
}

int cmd_sweep(const Common& o) {
  sc::RunConfig c = load_config(o);
  if (o.mu.empty()) throw sc::InputError("sweep needs a non-empty --mu list");
  const sc::ReferenceMesh mesh = sc::build_mesh(c.model);
  const std::vector<sc::SweepRow> rows = sc::sweep_mu(
      c.model, mesh, c.contact, c.schedule, c.solver, o.mu, o.jobs, run_options(c));
  const fs::path root = c.output_dir;
  sc::ensure_directory(root);
  std::vector<int> status;
  bool any_ok = false;
  for (const auto& row : rows) {
    sc::RunConfig rc = c;
    rc.contact.mu = row.mu;
    rc.output_dir = (root / mu_label(row.mu)).string();
    sc::write_run(rc.output_dir, rc, mesh, row.trajectory);
    report(mu_label(row.mu), row.trajectory);
    status.push_back(row.failure ? kSolver : kOk);
    any_ok |= !row.failure;
  }
  sc::write_file(root / "sweep.csv", [&](std::ostream& os) { sc::write_sweep_csv(os, rows, status); });
  sc::write_file(root / "sweep_fit.json",
                 [&](std::ostream& os) { os << sc::sweep_fit_json(rows).dump(2) << '\n'; });
  return any_ok ? kOk : kSolver;
}

/// Point load at the apex over d <= h/10; the stiffness is the least-squares
/// slope of F(d) through the origin.
int cmd_oracle_point(const Common& o) {
  sc::RunConfig c = load_config(o);
  c.schedule.mode = sc::LoadingMode::point;
  c.schedule.unload = false;
  c.schedule.d_max = 0.1 * c.model.h;
  c.schedule.n_steps_load = 10;
  c.snapshot_steps.clear();
  c.validate();
  const sc::ReferenceMesh mesh = sc::build_mesh(c.model);
  const sc::Trajectory t = sc::run_schedule(c.model, mesh, c.contact, c.schedule, c.solver);
  double fd = 0.0, dd = 0.0;
  for (const auto& r : t.records) {
    fd += r.F * r.d;
    dd += r.d * r.d;
  }
  const double k = dd > 0.0 ? fd / dd : 0.0;
  const double k_ref = sc::reissner_stiffness(c.model);
  const double rel = std::abs(k - k_ref) / k_ref;
  const fs::path dir = c.output_dir;
  sc::ensure_directory(dir);
  sc::write_file(dir / "trajectory.csv",
                 [&](std::ostream& os) { sc::write_trajectory_csv(os, c.model, t.records); });
  nlohmann::json j = {{"stiffness_N_per_m", k},
                      {"reference_N_per_m", k_ref},
                      {"relative_error", rel},
                      {"d_max_m", c.schedule.d_max},
                      {"failure", t.failure ? nlohmann::json(*t.failure) : nlohmann::json(nullptr)}};
  sc::write_file(dir / "oracle_point.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  sc::write_file(dir / "meta.json", [&](std::ostream& os) { os << sc::meta_json(c).dump(2) << '\n'; });
  std::fprintf(stderr, "oracle-point: k=%.2f N/m reference=%.2f N/m relative error=%.3f\n", k, k_ref,
               rel);
  return t.failure ? kSolver : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin spherical shell pressed against a rigid frictional plate"};
  app.require_subcommand(1);
  Common o;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* cfg = sub->add_option("--config", o.config_path, "configuration file");
    if (config_required) cfg->required();
    sub->add_option("--out", o.out, "output directory (overrides output.dir)");
  };
  auto add_snapshots = [&](CLI::App* sub) {
    sub->add_option("--snapshot-steps", o.snapshot_steps, "steps whose profiles are written")
        ->delimiter(',')
        ->each([&](const std::string&) { o.snapshot_given = true; });
  };
  CLI::App* run = app.add_subcommand("run", "single load/unload run");
  add_common(run, true);
  run->add_option("--mu", o.mu, "friction coefficient (overrides friction.mu)")->delimiter(',');
  add_snapshots(run);
  CLI::App* sweep = app.add_subcommand("sweep", "one run per friction coefficient");
  add_common(sweep, true);
  sweep->add_option("--mu", o.mu, "comma-separated friction coefficients")->delimiter(',')->required();
  sweep->add_option("--jobs", o.jobs, "concurrent runs")->check(CLI::PositiveNumber);
  add_snapshots(sweep);
  CLI::App* oracle = app.add_subcommand("oracle-point", "apex point-load stiffness check");
  add_common(oracle, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (sweep->parsed()) return cmd_sweep(o);
    return cmd_oracle_point(o);
  } catch (const sc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const sc::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfig;
  } catch (const sc::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const sc::StepFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  }
}
