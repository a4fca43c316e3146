#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "l96/attractor.hpp"
#include "l96/errors.hpp"
#include "l96/integrator.hpp"
#include "l96/poincare.hpp"
#include "l96/spectral.hpp"
#include "l96/waves.hpp"
#include "output.hpp"
#include "version.hpp"

namespace l96::cli {

namespace {

struct Common {
  int n = 4;
  double F = 0.0;
  double G = 0.0;
  double dt = 1.0 / 64.0;
  double t_end = 1000.0;
  double transient = 500.0;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;

  SystemConfig system() const { return {n, F, G}; }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--n", c.n, "dimension")->capture_default_str();
  sub->add_option("--F", c.F, "forcing")->capture_default_str();
  sub->add_option("--G", c.G, "diffusion")->capture_default_str();
  sub->add_option("--dt", c.dt, "RK4 step")->capture_default_str();
  sub->add_option("--t-end", c.t_end, "end time of the run")->capture_default_str();
  sub->add_option("--transient", c.transient, "time discarded before sampling")->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for random initial states")->capture_default_str();
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--threads", c.threads, "worker threads")->capture_default_str();
}

Json common_json(const Common& c) {
  return Json{{"n", c.n},       {"F", c.F},   {"G", c.G},
              {"dt", c.dt},     {"t_end", c.t_end}, {"transient", c.transient},
              {"seed", c.seed}, {"threads", c.threads}};
}

struct InitOptions {
  std::string kind = "cold";
  int wave = 0;
  double amplitude = -1.0;
};

void add_init(CLI::App* sub, InitOptions& o) {
  sub->add_option("--init", o.kind, "initial state: cold, random or wave")
      ->check(CLI::IsMember({"cold", "random", "wave"}))
      ->capture_default_str();
  sub->add_option("--init-wave", o.wave, "wave number for --init wave (implies it)");
  sub->add_option("--init-amplitude", o.amplitude, "amplitude of the initial offset from x_F");
}

StateVec initial_state(const SystemConfig& cfg, const InitOptions& o, std::uint64_t seed) {
  if (o.kind == "wave" || o.wave > 0) {
    return wave_start(cfg, o.wave, o.amplitude > 0 ? o.amplitude : 0.1);
  }
  if (o.kind == "random") return random_start(cfg, seed, o.amplitude > 0 ? o.amplitude : 1e-3);
  StateVec x = cold_start(cfg);
  if (o.amplitude > 0) x[0] = cfg.F + o.amplitude;
  return x;
}

Json init_json(const InitOptions& o) {
  Json j{{"init", o.wave > 0 ? std::string("wave") : o.kind}};
  if (o.wave > 0) j["init_wave"] = o.wave;
  if (o.amplitude > 0) j["init_amplitude"] = o.amplitude;
  return j;
}

IntegrationSpec integration(const Common& c, int sample_every) {
  IntegrationSpec s;
  s.dt = c.dt;
  s.t_end = c.t_end;
  s.transient = c.transient;
  s.sample_every = sample_every;
  s.validate();
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// ---- hopf-table ---------------------------------------------------------

std::pair<int, int> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const int n = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return {n, n};
    }
    const std::string a = s.substr(0, dots);
    const std::string b = s.substr(dots + 2);
    const int lo = std::stoi(a, &used);
    if (used != a.size()) throw std::invalid_argument(s);
    const int hi = std::stoi(b, &used);
    if (used != b.size()) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw InvalidArgument("--n expects an integer or a range lo..hi, got '" + s + "'");
  }
}

std::string hopf_table_csv(int lo, int hi) {
  CsvWriter csv({"n", "l", "F_H", "omega0", "ell1", "criticality", "first"});
  for (int n = lo; n <= hi; ++n) {
    const FirstBifurcation first = first_bifurcation_index(n);
    for (const BifurcationRecord& rec : enumerate_bifurcations(n)) {
      csv.cell(n);
      if (const auto* h = std::get_if<HopfPoint>(&rec)) {
        csv.cell(h->l).cell(h->F_H).cell(h->omega0).cell(h->ell1);
        csv.cell(std::string(to_string(h->criticality)));
        csv.cell(first.indices == std::vector<int>{h->l} ? 1 : 0);
      } else {
        const auto& hh = std::get<HopfHopfPoint>(rec);
        csv.cell(std::to_string(hh.l1) + ";" + std::to_string(hh.l2)).cell(hh.F_HH);
        csv.cell(format_real(omega0(hh.l1, n)) + ";" + format_real(omega0(hh.l2, n)));
        csv.empty().cell(std::string("hopf_hopf"));
        csv.cell(first.indices == std::vector<int>{hh.l1, hh.l2} ? 1 : 0);
      }
      csv.end_row();
    }
  }
  return csv.str();
}

// ---- simulate / hovmoller ---------------------------------------------

Json diagnostics_json(const SystemConfig& cfg, const WaveDiagnostics& d) {
  Json j{{"n", cfg.n}, {"F", cfg.F}, {"G", cfg.G}, {"wave_number", d.l},
         {"period", optional_number(d.period)}, {"amplitude", d.amplitude},
         {"drift", std::string(to_string(d.drift))}};
  if (d.l > 0) {
    j["onset_period"] = onset_period(d.l, cfg.n);
    if (is_crossing_index(d.l, cfg.n)) j["hopf_value"] = hopf_value(d.l, cfg.n, cfg.G);
  }
  return j;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::vector<std::string> header{"t"};
  for (int j = 1; j <= traj.dimension(); ++j) header.push_back("x" + std::to_string(j));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    csv.cell(traj.times[i]);
    for (double v : traj.states[i]) csv.cell(v);
    csv.end_row();
  }
  return csv.str();
}

// ---- scan --------------------------------------------------------------

struct ScanArgs {
  double F_min = 0.0, F_max = 10.0;
  int F_steps = 101;
  double G_min = 0.0, G_max = 0.0;
  int G_steps = 1;
  std::string direction = "both";
  bool cold = false;
  int exponents = 3;
  double horizon = 1000.0;
  double warm_transient = 100.0;
  double renorm = 0.5;
  double tol_zero = kDefaultZeroTol;
};

std::string scan_csv(const ScanResult& r, int k) {
  std::vector<std::string> header{"F", "G", "class"};
  for (int i = 1; i <= k; ++i) header.push_back("lambda" + std::to_string(i));
  header.insert(header.end(), {"converged", "wave"});
  CsvWriter csv(header);
  for (const ScanPoint& p : r.points) {
    csv.cell(p.F).cell(p.G).cell(p.cls.code());
    const auto& ex = p.cls.evidence.exponents;
    for (int i = 0; i < k; ++i) {
      if (i < static_cast<int>(ex.size())) {
        csv.cell(ex[i]);
      } else {
        csv.empty();
      }
    }
    csv.cell(p.error.empty() && p.cls.evidence.converged ? 1 : 0).cell(p.wave);
    csv.end_row();
  }
  return csv.str();
}

// ---- periodic-orbit ----------------------------------------------------

std::string branch_csv(const Branch& b, int n) {
  std::vector<std::string> header{"F", "T", "stable", "returns"};
  for (int i = 1; i < n; ++i) {
    header.push_back("mu" + std::to_string(i) + "_re");
    header.push_back("mu" + std::to_string(i) + "_im");
  }
  CsvWriter csv(header);
  for (const BranchPoint& p : b.points) {
    csv.cell(p.F).cell(p.period).cell(p.stable ? 1 : 0).cell(p.returns);
    for (int i = 0; i < n - 1; ++i) {
      if (i < static_cast<int>(p.multipliers.size())) {
        csv.cell(p.multipliers[i].real()).cell(p.multipliers[i].imag());
      } else {
        csv.empty().empty();
      }
    }
    csv.end_row();
  }
  return csv.str();
}

Json events_json(const Branch& b) {
  Json ev = Json::array();
  for (const CycleBifurcation& e : b.events) {
    ev.push_back({{"kind", std::string(to_string(e.kind))},
                  {"F", e.F},
                  {"multiplier", {e.multiplier.real(), e.multiplier.imag()}}});
  }
  return ev;
}

// Shared by the subcommands that write into --out.
struct Runner {
  std::ostream& out;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Manifest open(const std::string& command, const Common& c, const std::string& fallback) const {
    return Manifest(command, std::filesystem::path(c.out.empty() ? fallback : c.out));
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lorenz-96 bifurcation analysis"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  app.require_subcommand(1);

  Common c;
  InitOptions init;
  std::string n_spec;
  int sample_every = 1;
  int subdivisions = 1;
  ScanArgs scan;
  LyapunovOptions lyap;
  int lyap_k = 0;
  TrackOptions track;
  double po_F_min = 0.0, po_F_max = 0.0;
  int section_coordinate = 0;
  std::optional<double> section_level;
  std::string section_direction = "up";
  bool no_follow_pd = false;

  auto* hopf = app.add_subcommand("hopf-table", "bifurcations of x_F for one n or a range lo..hi");
  hopf->add_option("--n", n_spec, "dimension or range lo..hi")->required();
  hopf->add_option("--out", c.out, "output directory (stdout when omitted)");

  auto* sim = app.add_subcommand("simulate", "integrate and write trajectory and wave diagnostics");
  add_common(sim, c);
  add_init(sim, init);
  sim->add_option("--sample-every", sample_every, "keep every k-th step")->capture_default_str();

  auto* hov = app.add_subcommand("hovmoller", "long-format space-time table t,j,x");
  add_common(hov, c);
  add_init(hov, init);
  hov->add_option("--sample-every", sample_every, "keep every k-th step")->capture_default_str();
  hov->add_option("--subdivisions", subdivisions, "interpolated points per sector")
      ->capture_default_str();

  auto* sc = app.add_subcommand("scan", "attractor classification along F or over an F x G raster");
  add_common(sc, c);
  sc->add_option("--F-min", scan.F_min)->capture_default_str();
  sc->add_option("--F-max", scan.F_max)->capture_default_str();
  sc->add_option("--F-steps", scan.F_steps)->capture_default_str();
  sc->add_option("--G-min", scan.G_min)->capture_default_str();
  sc->add_option("--G-max", scan.G_max)->capture_default_str();
  sc->add_option("--G-steps", scan.G_steps, "> 1 selects an F x G raster")->capture_default_str();
  sc->add_option("--direction", scan.direction, "G sweep direction of rasters")
      ->check(CLI::IsMember({"up", "down", "both"}))
      ->capture_default_str();
  sc->add_flag("--cold", scan.cold, "cold start every F instead of continuing the attractor");
  sc->add_option("--exponents", scan.exponents)->capture_default_str();
  sc->add_option("--horizon", scan.horizon, "averaging time per point")->capture_default_str();
  sc->add_option("--warm-transient", scan.warm_transient, "transient of warm-started points")
      ->capture_default_str();
  sc->add_option("--renorm", scan.renorm)->capture_default_str();
  sc->add_option("--tol-zero", scan.tol_zero)->capture_default_str();

  auto* po = app.add_subcommand("periodic-orbit", "continue a cycle in F and report its bifurcations");
  add_common(po, c);
  po->add_option("--F-min", po_F_min)->required();
  po->add_option("--F-max", po_F_max)->required();
  po->add_option("--step", track.step)->capture_default_str();
  po->add_option("--settle", track.settle_time, "settling time before the first Newton solve")
      ->capture_default_str();
  po->add_option("--section-coordinate", section_coordinate, "1-based; default x_1 at its mean");
  po->add_option("--section-level", section_level);
  po->add_option("--section-direction", section_direction)
      ->check(CLI::IsMember({"up", "down", "both"}))
      ->capture_default_str();
  po->add_flag("--no-follow-pd", no_follow_pd, "stay on the period-one cycle after period doubling");

  auto* ly = app.add_subcommand("lyapunov", "leading Lyapunov exponents and attractor class");
  add_common(ly, c);
  ly->add_option("--exponents", lyap_k, "number of exponents (default n)");
  ly->add_option("--horizon", lyap.horizon)->capture_default_str();
  ly->add_option("--renorm", lyap.renorm_interval)->capture_default_str();
  add_init(ly, init);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  }

  Runner runner{out};
  try {
    if (hopf->parsed()) {
      const auto [lo, hi] = parse_range(n_spec);
      if (lo < 4 || hi < lo) throw InvalidArgument("hopf-table needs 4 <= n (and lo <= hi)");
      const std::string csv = hopf_table_csv(lo, hi);
      if (c.out.empty()) {
        out << csv;
        return kOk;
      }
      Manifest m("hopf-table", c.out);
      m.parameters() = {{"n", n_spec}};
      m.write_file("hopf_table.csv", csv);
      m.finish(seconds_since(runner.t0));
      return kOk;
    }

    if (sim->parsed() || hov->parsed()) {
      const SystemConfig cfg = c.system();
      cfg.validate();
      if (sample_every < 1) throw InvalidArgument("--sample-every must be >= 1");
      const StateVec x0 = initial_state(cfg, init, c.seed);
      const Trajectory traj = integrate(cfg, x0, integration(c, sample_every));
      const std::string name = sim->parsed() ? "simulate" : "hovmoller";
      Manifest m = runner.open(name, c, name);
      m.parameters() = common_json(c);
      m.parameters().update(init_json(init));
      m.parameters()["sample_every"] = sample_every;
      if (sim->parsed()) {
        const WaveDiagnostics d = diagnose(traj);
        m.write_file("trajectory.csv", trajectory_csv(traj));
        m.write_file("diagnostics.json", diagnostics_json(cfg, d).dump(2) + "\n");
        out << "wave " << d.l << " period "
            << (d.period ? format_real(*d.period) : std::string("none")) << " drift "
            << to_string(d.drift) << '\n';
      } else {
        m.parameters()["subdivisions"] = subdivisions;
        const HovmollerTable table = hovmoller(traj, subdivisions);
        CsvWriter csv({"t", "j", "x"});
        for (const HovmollerRow& r : table.rows) {
          csv.cell(r.t).cell(r.j).cell(r.x);
          csv.end_row();
        }
        m.write_file("hovmoller.csv", csv.str());
        m.results()["drift"] = std::string(to_string(table.drift));
      }
      m.finish(seconds_since(runner.t0));
      return kOk;
    }

    if (sc->parsed()) {
      const SystemConfig cfg = c.system();
      cfg.validate();
      ScanOptions so;
      so.exponents = std::min(scan.exponents, cfg.n);
      so.tol_zero = scan.tol_zero;
      so.first.dt = c.dt;
      so.first.transient = c.transient;
      so.first.horizon = scan.horizon;
      so.first.renorm_interval = scan.renorm;
      so.warm = so.first;
      so.warm.transient = scan.warm_transient;
      so.threads = c.threads;

      Manifest m = runner.open("scan", c, "scan");
      m.parameters() = common_json(c);
      m.parameters().update(Json{{"F_min", scan.F_min}, {"F_max", scan.F_max}, {"F_steps", scan.F_steps},
                                 {"G_min", scan.G_min}, {"G_max", scan.G_max}, {"G_steps", scan.G_steps},
                                 {"direction", scan.direction}, {"cold", scan.cold},
                                 {"exponents", so.exponents}, {"horizon", scan.horizon},
                                 {"warm_transient", scan.warm_transient}, {"renorm", scan.renorm},
                                 {"tol_zero", scan.tol_zero}});
      Json report{{"n", cfg.n}};
      if (scan.G_steps <= 1) {
        const ScanResult r = scan_F(cfg, scan.F_min, scan.F_max, scan.F_steps, !scan.cold, so);
        m.write_file("scan.csv", scan_csv(r, so.exponents));
        report["chaos_onset"] = optional_number(r.chaos_onset);
        out << "chaos onset "
            << (r.chaos_onset ? format_real(*r.chaos_onset) : std::string("none")) << '\n';
      } else {
        std::vector<ScanResult> results;
        for (const SweepDirection d : {SweepDirection::Up, SweepDirection::Down}) {
          if (scan.direction != "both" && scan.direction != to_string(d)) continue;
          results.push_back(scan_FG(cfg, scan.F_min, scan.F_max, scan.G_min, scan.G_max,
                                    scan.F_steps, scan.G_steps, d, so));
          m.write_file("scan_" + std::string(to_string(d)) + ".csv",
                       scan_csv(results.back(), so.exponents));
        }
        if (results.size() == 2) {
          std::size_t cls = 0, wave = 0;
          for (std::size_t i = 0; i < results[0].points.size(); ++i) {
            const ScanPoint& a = results[0].points[i];
            const ScanPoint& b = results[1].points[i];
            if (a.cls.code() != b.cls.code()) ++cls;
            if (a.cls.kind == AttractorKind::Periodic && b.cls.kind == AttractorKind::Periodic &&
                a.wave != b.wave) {
              ++wave;
            }
          }
          const double cells = static_cast<double>(results[0].points.size());
          report["cells"] = results[0].points.size();
          report["class_disagreement"] = cls / cells;
          report["wave_disagreement"] = wave / cells;
          out << "sweeps disagree on " << format_real(100.0 * cls / cells) << "% of cells ("
              << format_real(100.0 * wave / cells) << "% periodic with different wave)\n";
        }
      }
      m.write_file("onset.json", report.dump(2) + "\n");
      m.finish(seconds_since(runner.t0));
      return kOk;
    }

    if (po->parsed()) {
      SystemConfig cfg = c.system();
      cfg.F = po_F_min;
      cfg.validate();
      track.cycle.dt = c.dt;
      track.follow_period_doubling = !no_follow_pd;
      if (section_coordinate != 0 || section_level) {
        Section s;
        s.coordinate = (section_coordinate == 0 ? 1 : section_coordinate) - 1;
        s.level = section_level.value_or(0.9 * po_F_min);
        s.direction = section_direction == "up"     ? CrossingDirection::Up
                      : section_direction == "down" ? CrossingDirection::Down
                                                    : CrossingDirection::Both;
        s.validate(cfg.n);
        track.section = s;
      }
      const Branch b = track_cycle_bifurcations(cfg, po_F_min, po_F_max, track);
      Manifest m = runner.open("periodic-orbit", c, "periodic-orbit");
      m.parameters() = common_json(c);
      m.parameters().update(Json{{"F_min", po_F_min}, {"F_max", po_F_max}, {"step", track.step},
                                 {"settle", track.settle_time},
                                 {"follow_period_doubling", track.follow_period_doubling}});
      m.parameters()["section"] = {{"coordinate", b.section.coordinate + 1},
                                   {"level", b.section.level}};
      m.write_file("branch.csv", branch_csv(b, cfg.n));
      m.write_file("events.json", events_json(b).dump(2) + "\n");
      m.results()["terminated"] = b.terminated;
      for (const CycleBifurcation& e : b.events) {
        out << to_string(e.kind) << ' ' << format_real(e.F) << '\n';
      }
      m.finish(seconds_since(runner.t0));
      return kOk;
    }

    if (ly->parsed()) {
      const SystemConfig cfg = c.system();
      cfg.validate();
      lyap.dt = c.dt;
      lyap.transient = c.transient;
      const int k = lyap_k == 0 ? cfg.n : lyap_k;
      const LyapunovSpectrum s = lyapunov_spectrum(cfg, initial_state(cfg, init, c.seed), k, lyap);
      const AttractorClass cls = classify(s);
      Manifest m = runner.open("lyapunov", c, "lyapunov");
      m.parameters() = common_json(c);
      m.parameters().update(init_json(init));
      m.parameters().update(Json{{"exponents", k}, {"horizon", lyap.horizon}, {"renorm", lyap.renorm_interval}});
      CsvWriter csv({"i", "lambda", "settled"});
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        csv.cell(i + 1).cell(s.exponents[i]).cell(s.settled[i] ? 1 : 0);
        csv.end_row();
        sum += s.exponents[i];
      }
      m.write_file("lyapunov.csv", csv.str());
      m.write_file("lyapunov.json", Json{{"exponents", s.exponents},
                                         {"sum", sum},
                                         {"converged", s.converged},
                                         {"class", cls.code()}}
                                            .dump(2) + "\n");
      out << "class " << cls.code() << " lambda1 " << format_real(s.exponents.front()) << '\n';
      m.finish(seconds_since(runner.t0));
      return kOk;
    }
  } catch (const Divergence& e) {
    err << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const NoCycle& e) {
    err << "error: " << e.what() << '\n';
    return kNoCycle;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kBadArgs;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kBadArgs;
}

}  // namespace l96::cli
