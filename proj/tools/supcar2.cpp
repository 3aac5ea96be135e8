// supcar2 — build, check, analyze and simulate supCAR(2) models.
//
// Subcommands: check | acf | simulate | compare | figure3.
// Global flags: --model <file>  --out <dir>  --seed <u64>.
// Exit codes: 0 success, 1 input error, 2 mathematical condition failure,
// 3 regression (comparison miss or figure sign-pattern violation).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "supcar/analytics.hpp"
#include "supcar/csv.hpp"
#include "supcar/model_json.hpp"
#include "supcar/simulate.hpp"
#include "supcar/svg.hpp"

namespace {

using namespace supcar;

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

ProcessSpec load_model(const std::string& file) {
  if (file.empty())
    throw std::invalid_argument("--model <file> is required for this command");
  return model_from_json_file(file);
}

// Re-runs the existence gates; MathError from here maps to exit 2.
ProcessSpec gated(const ProcessSpec& spec) {
  return ProcessSpec::make(spec.levy, spec.mixing);
}

int cmd_check(const ProcessSpec& spec) {
  const auto lm = log_moment_check(spec.levy.jump);
  std::printf("%-52s %-14.8g %s\n", "levy: Int_{|x|>1} log|x| mu(dx)",
              lm.value, lm.finite ? "pass" : "FAIL");
  const auto rep = check_mixing(spec.mixing);
  for (const auto& e : rep.entries)
    std::printf("%-52s %-14.8g %s\n", e.name.c_str(), e.value,
                e.pass ? "pass" : "FAIL");
  if (!rep.diagnostics.empty())
    std::printf("note: %s\n", rep.diagnostics.c_str());
  const bool ok = lm.finite && rep.pass;
  std::printf("conditions: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 2;
}

int cmd_acf(const ProcessSpec& raw, const std::string& out, double tau_max,
            int n, bool closed_form) {
  if (!(tau_max >= 0.0) || !std::isfinite(tau_max))
    throw std::invalid_argument("--tau-max must be finite and nonnegative");
  if (n < 1) throw std::invalid_argument("--n must be positive");
  ProcessSpec spec = gated(raw);
  std::vector<double> taus;
  if (tau_max == 0.0 || n == 1) {
    taus = {0.0};
  } else {
    for (int i = 0; i < n; ++i) taus.push_back(tau_max * i / (n - 1));
  }
  const AcfTable table = acf(spec, taus);
  const std::string file = out_path(out, "acf.csv");
  write_file(file, csv_of_acf(table));
  std::printf("wrote %s (%zu rows)\n", file.c_str(), table.rows.size());

  if (closed_form) {
    // The worked families with a closed r(tau): type I Gamma(alpha+3, 1),
    // and type II Gamma(alpha+3, 1) x Beta(b0, b1) as a single integral.
    std::string closed;
    if (!spec.mixing.joint) {
      if (const auto* g = std::get_if<GammaM>(&spec.mixing.law1);
          g && g->rate == 1.0 && g->shape > 3.0) {
        const double alpha = g->shape - 3.0;
        if (spec.tag == TypeTag::I) {
          closed = "tau,r_closed\n";
          char buf[64];
          for (double tau : taus) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", tau,
                          acf_closed_gamma_I(alpha, tau));
            closed += buf;
          }
        } else if (spec.tag == TypeTag::II) {
          if (const auto* b = std::get_if<BetaM>(&spec.mixing.law2);
              b && b->b0 > 1.0) {
            closed = "tau,r_closed\n";
            char buf[64];
            for (double tau : taus) {
              std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", tau,
                            acf_type2_gamma_beta(alpha, b->b0, b->b1, tau));
              closed += buf;
            }
          }
        }
      }
    }
    if (closed.empty()) {
      std::printf("no closed form for this family\n");
    } else {
      const std::string cfile = out_path(out, "acf_closed.csv");
      write_file(cfile, closed);
      std::printf("wrote %s\n", cfile.c_str());
    }
  }
  return 0;
}

int cmd_simulate(const ProcessSpec& spec, const std::string& out,
                 const SimConfig& cfg) {
  const PathSet paths = simulate_paths(spec, cfg);
  const std::string file = out_path(out, "paths.csv");
  write_file(file, csv_of_paths(paths));

  char fp[24];
  std::snprintf(fp, sizeof fp, "%016llx",
                static_cast<unsigned long long>(paths.spec_fingerprint));
  nlohmann::json meta = {{"seed", paths.seed},
                         {"fingerprint", fp},
                         {"dt", cfg.dt},
                         {"horizon", cfg.horizon},
                         {"burn_in", cfg.burn_in},
                         {"n_atoms", cfg.n_atoms},
                         {"n_paths", cfg.n_paths},
                         {"warning", paths.warning}};
  const std::string mfile = out_path(out, "metadata.json");
  write_file(mfile, meta.dump(2) + "\n");
  std::printf("wrote %s (%zu paths x %zu samples) and %s\n", file.c_str(),
              paths.values.size(), paths.times.size(), mfile.c_str());
  if (!paths.warning.empty()) std::printf("warning: %s\n", paths.warning.c_str());
  return 0;
}

int cmd_compare(const ProcessSpec& spec, const std::string& out,
                const SimConfig& cfg, const std::vector<double>& taus) {
  if (taus.empty()) throw std::invalid_argument("--taus must be nonempty");
  const ComparisonReport rep = compare(spec, cfg, taus);
  const std::string file = out_path(out, "compare.csv");
  write_file(file, csv_of_comparison(rep));

  int within = 0;
  double worst_atom = 0.0;
  for (std::size_t i = 0; i < rep.table.rows.size(); ++i) {
    const auto& r = rep.table.rows[i];
    if (std::fabs(r.r_analytic - r.r_empirical.value_or(0.0)) <=
        r.ci_half_width.value_or(0.0))
      ++within;
    worst_atom = std::max(worst_atom,
                          std::fabs(rep.r_atomized[i] - r.r_analytic));
  }
  std::printf("wrote %s\n", file.c_str());
  std::printf("lags within 3 MC standard errors: %d/%zu (%.2f)\n", within,
              rep.table.rows.size(), rep.frac_within);
  std::printf("max atomization bias: %.3g\n", worst_atom);
  std::printf("fingerprint: %016llx\n",
              static_cast<unsigned long long>(rep.fingerprint));
  if (!rep.warning.empty()) std::printf("warning: %s\n", rep.warning.c_str());
  std::printf("result: %s\n", rep.pass ? "PASS" : "FAIL");
  return rep.pass ? 0 : 3;
}

int cmd_figure3(const std::string& out) {
  const double shapes[] = {3.5, 3.9, 15.0, 50.0};
  const auto levy = LevyTriplet::make(0.0, 1.0, NoJumps{});
  std::vector<AcfTable> tables;
  for (double shape : shapes) {
    auto spec = ProcessSpec::make(
        levy, MixingSpec::type3(GammaM{shape, 1.0}, Sin2M{}));
    std::vector<double> taus;
    for (int i = 0; i <= 2000; ++i) taus.push_back(0.02 * i);
    tables.push_back(acf(spec, taus));
  }

  // Sign-pattern gate before any file is written: small shapes decay without
  // crossing zero, large shapes oscillate.
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& rows = tables[k].rows;
    if (std::fabs(rows[0].r_analytic - 1.0) > 1e-8) {
      std::fprintf(stderr, "figure regression: r(0) != 1 for shape %g\n",
                   shapes[k]);
      return 3;
    }
    int changes = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].r_analytic * rows[i - 1].r_analytic < 0.0) ++changes;
    const bool want_oscillation = shapes[k] >= 15.0;
    if (want_oscillation != (changes > 0)) {
      std::fprintf(stderr,
                   "figure regression: shape %g has %d sign changes, "
                   "expected %s\n",
                   shapes[k], changes, want_oscillation ? ">= 1" : "0");
      return 3;
    }
  }

  for (std::size_t k = 0; k < 4; ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "figure3_shape%g", shapes[k]);
    write_file(out_path(out, std::string(name) + ".csv"),
               csv_of_acf(tables[k]));
    PlotSeries s;
    char label[64];
    std::snprintf(label, sizeof label, "gamma shape %g, sin2 angle law",
                  shapes[k]);
    s.label = label;
    for (const auto& r : tables[k].rows) {
      s.x.push_back(r.tau);
      s.y.push_back(r.r_analytic);
    }
    write_file(out_path(out, std::string(name) + ".svg"),
               svg_line_plot("supCAR(2)-III correlation", "tau", "r(tau)",
                             {s}));
    std::printf("wrote %s/%s.{csv,svg}\n", out.c_str(), name);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"supCAR(2) process toolkit: existence checks, correlation "
               "analytics, simulation"};
  app.require_subcommand(1);

  std::string model_file, out_dir = ".";
  app.add_option("--model", model_file, "model JSON file");
  app.add_option("--out", out_dir, "output directory (default .)");
  SimConfig cfg;
  app.add_option("--seed", cfg.seed, "RNG seed");

  auto* c_check = app.add_subcommand("check", "evaluate existence conditions");
  c_check->fallthrough();

  double tau_max = 20.0;
  int n_points = 201;
  bool closed_form = false;
  auto* c_acf = app.add_subcommand("acf", "correlation table on a lag grid");
  c_acf->fallthrough();
  c_acf->add_option("--tau-max", tau_max, "largest lag (default 20)");
  c_acf->add_option("--n", n_points, "grid points (default 201)");
  c_acf->add_flag("--closed-form", closed_form,
                  "also emit the closed form when the family has one");

  auto* c_sim = app.add_subcommand("simulate", "finite-superposition paths");
  c_sim->fallthrough();
  c_sim->add_option("--dt", cfg.dt, "step (default 0.01)");
  c_sim->add_option("--horizon", cfg.horizon, "recorded length (default 100)");
  c_sim->add_option("--burn-in", cfg.burn_in, "discarded prefix (default 0)");
  c_sim->add_option("--atoms", cfg.n_atoms,
                    "atoms per continuous mixing factor (default 16)");
  c_sim->add_option("--paths", cfg.n_paths, "number of paths (default 1)");
  c_sim->add_option("--threads", cfg.n_threads,
                    "worker threads; never changes the output bytes");

  std::vector<double> taus;
  auto* c_cmp = app.add_subcommand("compare",
                                   "simulate and test against analytics");
  c_cmp->fallthrough();
  c_cmp->add_option("--dt", cfg.dt, "step (default 0.01)");
  c_cmp->add_option("--horizon", cfg.horizon, "recorded length (default 100)");
  c_cmp->add_option("--burn-in", cfg.burn_in, "discarded prefix (default 0)");
  c_cmp->add_option("--atoms", cfg.n_atoms, "atoms per factor (default 16)");
  c_cmp->add_option("--paths", cfg.n_paths, "number of paths (default 1)");
  c_cmp->add_option("--threads", cfg.n_threads, "worker threads");
  c_cmp->add_option("--taus", taus, "comparison lags (multiples of dt)")
      ->delimiter(',');

  auto* c_fig = app.add_subcommand("figure3",
                                   "the four type III correlation curves");
  c_fig->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (c_check->parsed()) return cmd_check(load_model(model_file));
    if (c_acf->parsed())
      return cmd_acf(load_model(model_file), out_dir, tau_max, n_points,
                     closed_form);
    if (c_sim->parsed())
      return cmd_simulate(load_model(model_file), out_dir, cfg);
    if (c_cmp->parsed())
      return cmd_compare(load_model(model_file), out_dir, cfg, taus);
    if (c_fig->parsed()) return cmd_figure3(out_dir);
  } catch (const MathError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
