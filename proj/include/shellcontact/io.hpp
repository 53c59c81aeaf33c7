#pragma once

// Serialization of runs and sweeps: fixed-column CSV with %.9e numbers and
// JSON side files. Writers take streams; the file helpers wrap them and
// raise IoError on any failure.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "shellcontact/config.hpp"
#include "shellcontact/observables.hpp"
#include "shellcontact/solver.hpp"

namespace shellcontact {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTrajectoryHeader =
    "step,phase,d_mm,dbar,F_N,Fbar,A_mm2,Abar,pmax_Pa,pbar,pmean_Pa,r_in_mm,r_out_mm,size_mm,"
    "location_mm,regime,D_J,substeps,stabilized";
inline constexpr const char* kProfileHeader = "node,s0_mm,r_mm,z_mm,gap_mm,p_Pa,t_Pa,status";
inline constexpr const char* kSweepHeader = "mu,W_J,d_c_mm,buckled,exit_status";

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const ShellModel& m,
                                 const std::vector<StepRecord>& records) {
  using detail::sci;
  constexpr double mm = 1e3;
  os << kTrajectoryHeader << '\n';
  for (const auto& r : records) {
    os << r.step << ',' << to_string(r.phase) << ',' << sci(r.d * mm) << ',' << sci(r.dbar(m))
       << ',' << sci(r.F) << ',' << sci(r.Fbar(m)) << ',' << sci(r.A * mm * mm) << ','
       << sci(r.Abar(m)) << ',' << sci(r.p_max) << ',' << sci(r.pbar(m)) << ','
       << sci(r.p_mean) << ',' << sci(r.r_in * mm) << ',' << sci(r.r_out * mm) << ','
       << sci(r.size * mm) << ',' << sci(r.location * mm) << ',' << to_string(r.regime) << ','
       << sci(r.D) << ',' << r.substeps << ',' << (r.stabilized ? 1 : 0) << '\n';
  }
}

inline void write_profile_csv(std::ostream& os, const ShellModel& m, const ReferenceMesh& mesh,
                              const Configuration& c, const ContactField& field) {
  using detail::sci;
  constexpr double mm = 1e3;
  os << kProfileHeader << '\n';
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    os << i << ',' << sci(m.R * mesh.theta[i] * mm) << ',' << sci(c.r[i] * mm) << ','
       << sci(c.z[i] * mm) << ',' << sci(field.gap[i] * mm) << ',' << sci(field.pressure[i])
       << ',' << sci(field.traction[i]) << ',' << to_string(field.status[i]) << '\n';
  }
}

inline nlohmann::json events_json(const ShellModel& m, const Trajectory& t) {
  auto event = [&](const std::optional<std::size_t>& k) -> nlohmann::json {
    if (!k) return nullptr;
    return {{"step", *k}, {"dbar", t.records[*k].dbar(m)}};
  };
  nlohmann::json j;
  j["hertz_deviation"] = event(t.events.hertz_deviation);
  j["buckling"] = event(t.events.buckling);
  j["unbuckling"] = event(t.events.unbuckling);
  j["W_J"] = t.W ? nlohmann::json(*t.W) : nlohmann::json(nullptr);
  j["D_J"] = t.final_dissipation();
  j["audit_ratio"] = t.audit_ratio;
  j["failure"] = t.failure ? nlohmann::json(*t.failure) : nlohmann::json(nullptr);
  return j;
}

/// Every resolved key exactly once, in echo order, typed where the text is a
/// number or flag.
inline nlohmann::ordered_json meta_json(const RunConfig& c) {
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : echo_config(c)) {
    const char* first = value.data();
    const char* last = value.data() + value.size();
    std::uint64_t n = 0;
    double x = 0.0;
    if (key == "output.snapshot_steps") {
      cfg[key] = c.snapshot_steps;
    } else if (value == "true" || value == "false") {
      cfg[key] = value == "true";
    } else if (auto [p, ec] = std::from_chars(first, last, n); ec == std::errc() && p == last) {
      cfg[key] = n;
    } else if (auto [q, ed] = std::from_chars(first, last, x); ed == std::errc() && q == last) {
      cfg[key] = x;
    } else {
      cfg[key] = value;
    }
  }
  nlohmann::ordered_json j;
  j["config"] = cfg;
  j["F0_N"] = c.model.F0();
  return j;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                            const std::vector<int>& exit_status) {
  using detail::sci;
  os << kSweepHeader << '\n';
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    os << sci(r.mu) << ',' << (r.W ? sci(*r.W) : "") << ',' << (r.d_c ? sci(*r.d_c * 1e3) : "")
       << ',' << (r.buckled ? 1 : 0) << ',' << exit_status[k] << '\n';
  }
}

/// Parabola W(mu) over the rows that produced W; null below three points.
inline nlohmann::json sweep_fit_json(const std::vector<SweepRow>& rows) {
  std::vector<double> x, y;
  for (const auto& r : rows)
    if (r.W) {
      x.push_back(r.mu);
      y.push_back(*r.W);
    }
  nlohmann::json j;
  j["points"] = x.size();
  j["mu"] = x;
  j["W_J"] = y;
  try {
    const ParabolaFit f = fit_parabola(x, y);
    j["fit"] = {{"c0", f.c0}, {"c1", f.c1}, {"c2", f.c2}, {"r_squared", f.r_squared}};
  } catch (const InputError&) {
    j["fit"] = nullptr;
  }
  return j;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

inline void close_output(std::ofstream& os, const std::filesystem::path& path) {
  os.close();
  if (!os) throw IoError("failed writing " + path.string());
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& w) {
  std::ofstream os = open_output(path);
  w(os);
  close_output(os, path);
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create directory " + dir.string());
}

/// trajectory.csv, profile_<step>.csv for each snapshot, events.json and
/// meta.json under `dir`.
inline void write_run(const std::filesystem::path& dir, const RunConfig& c,
                      const ReferenceMesh& mesh, const Trajectory& t) {
  ensure_directory(dir);
  write_file(dir / "trajectory.csv",
             [&](std::ostream& os) { write_trajectory_csv(os, c.model, t.records); });
  for (std::size_t k = 0; k < t.snapshot_steps.size(); ++k)
    write_file(dir / ("profile_" + std::to_string(t.snapshot_steps[k]) + ".csv"),
               [&](std::ostream& os) {
                 write_profile_csv(os, c.model, mesh, t.snapshots[k], t.snapshot_fields[k]);
               });
  write_file(dir / "events.json",
             [&](std::ostream& os) { os << events_json(c.model, t).dump(2) << '\n'; });
  write_file(dir / "meta.json", [&](std::ostream& os) { os << meta_json(c).dump(2) << '\n'; });
}

}  // namespace shellcontact
