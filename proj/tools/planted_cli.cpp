// Command-line driver: threshold tables, phase diagrams, detection sweeps,
// second moments, MMSE curves and instance dumps.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "planted/planted.h"

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kInfeasible = 3, kIo = 4 };

struct CliError {
  int code;
  std::string message;
};

int exit_code_for(pl_status status) {
  switch (status) {
    case PL_OK: return kOk;
    case PL_ERR_INVALID_ARGUMENT:
    case PL_ERR_DOMAIN: return kUsage;
    case PL_ERR_INFEASIBLE: return kInfeasible;
    case PL_ERR_IO: return kIo;
    default: return kFailure;
  }
}

void check(pl_status status) {
  if (status != PL_OK) throw CliError{exit_code_for(status), pl_last_error()};
}

std::string real(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Common {
  std::uint64_t seed = 1;
  std::string out = "-";
  std::string threads = "1";
  bool round = false;

  int thread_count() const {
    if (threads == "auto") return 0;
    try {
      const int t = std::stoi(threads);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
    throw CliError{kUsage, "--threads must be a positive integer or 'auto'"};
  }
};

struct ParamFlags {
  std::string problem = "sparse-pca";
  double snr = 1.0;
  double gamma = 0.5;
  double alpha = 1.0;
  int k = 2;
  std::int64_t n = 8;

  pl_params to_c() const {
    pl_params p{};
    check(pl_problem_parse(problem.c_str(), &p.problem));
    p.snr = snr;
    p.gamma = gamma;
    p.alpha = alpha;
    p.k = k;
    p.n = n;
    return p;
  }
};

void add_problem_flags(CLI::App* sub, ParamFlags& f, bool with_n, bool with_snr) {
  sub->add_option("--problem", f.problem, "sparse-pca, submatrix or clustering")
      ->check(CLI::IsMember({"sparse-pca", "submatrix", "clustering"}));
  sub->add_option("--gamma", f.gamma, "sparsity (sparse PCA)");
  sub->add_option("--k", f.k, "number of blocks or clusters");
  sub->add_option("--alpha", f.alpha, "samples per dimension (clustering)");
  if (with_snr) sub->add_option("--snr,--lambda,--mu,--rho", f.snr, "signal-to-noise ratio");
  if (with_n) sub->add_option("--n", f.n, "dimension");
}

// Applies --round and returns the note describing any change.
pl_params resolve(pl_params p, bool round, std::string* note) {
  if (round) {
    char buf[512];
    check(pl_params_round(&p, &p, buf, sizeof buf));
    if (note) *note = buf;
  }
  check(pl_params_validate(&p));
  return p;
}

// Resolved configuration echoed into output headers. Output location and
// thread count are excluded so that they do not change the bytes written.
std::vector<std::string> resolved_config(const CLI::App& app, const CLI::App& sub) {
  static const std::set<std::string> skip = {"help", "out", "threads", "config"};
  std::vector<std::string> lines;
  auto emit = [&](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      std::string name = opt->get_single_name();
      if (skip.count(name)) continue;
      std::string value;
      if (opt->get_expected_max() == 0) {
        value = opt->count() > 0 ? "true" : "false";
      } else if (opt->count() > 0) {
        const auto& res = opt->results();
        for (std::size_t i = 0; i < res.size(); ++i) value += (i ? " " : "") + res[i];
      } else {
        value = opt->get_default_str();
        // Vector defaults render as "[a,b]" or "{}".
        if (value.size() >= 2 && (value.front() == '[' || value.front() == '{')) {
          value = value.substr(1, value.size() - 2);
          std::replace(value.begin(), value.end(), ',', ' ');
        }
      }
      lines.push_back(name + "=" + value);
    }
  };
  emit(app);
  emit(sub);
  return lines;
}

std::string csv_header(const std::string& command, const std::vector<std::string>& config,
                       const std::vector<std::string>& notes) {
  std::string h = "# schema=1\n# command=" + command + "\n";
  for (const auto& line : config) h += "# " + line + "\n";
  for (const auto& note : notes) h += "# " + note + "\n";
  return h;
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError{kIo, "cannot open '" + path + "' for writing"};
  out << text;
  if (!out) throw CliError{kIo, "write to '" + path + "' failed"};
}

int cmd_thresholds(const ParamFlags& f, const Common& c) {
  pl_params p = f.to_c();
  size_t needed = 0;
  check(pl_bounds_json(&p, nullptr, 0, &needed));
  std::string buf(needed, '\0');
  check(pl_bounds_json(&p, buf.data(), buf.size(), &needed));
  buf.resize(needed - 1);
  write_output(c.out, buf + "\n");
  return kOk;
}

struct PhaseFlags {
  std::vector<double> gammas;
  int points = 200;
  double gamma_min = 1e-3;
  double gamma_max = 0.99;
  std::string svg;
};

struct PhaseRow {
  double gamma;
  pl_bounds b;
};

std::string phase_svg(const std::vector<PhaseRow>& rows) {
  const double width = 640, height = 420, left = 60, right = 150, top = 20, bottom = 50;
  double xmin = std::log10(rows.front().gamma), xmax = xmin, ymax = 1.0;
  for (const auto& r : rows) {
    xmin = std::min(xmin, std::log10(r.gamma));
    xmax = std::max(xmax, std::log10(r.gamma));
    ymax = std::max(ymax, r.b.upper);
  }
  if (xmax == xmin) xmax = xmin + 1;
  ymax *= 1.05;
  auto px = [&](double g) {
    return left + (std::log10(g) - xmin) / (xmax - xmin) * (width - left - right);
  };
  auto py = [&](double y) { return height - bottom - y / ymax * (height - top - bottom); };
  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << width - right << "\" y2=\""
    << py(0) << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left << "\" y2=\"" << top
    << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax)); ++e) {
    const double x = px(std::pow(10.0, e));
    s << "<line x1=\"" << x << "\" y1=\"" << py(0) << "\" x2=\"" << x << "\" y2=\"" << py(0) + 5
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << x << "\" y=\"" << py(0) + 18 << "\" text-anchor=\"middle\">1e" << e
      << "</text>\n";
  }
  const int yticks = 5;
  for (int t = 0; t <= yticks; ++t) {
    const double y = ymax * t / yticks;
    s << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << y
      << "</text>\n";
  }
  s << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
    << "\" text-anchor=\"middle\">gamma</text>\n";
  s << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (top + height - bottom) / 2
    << ")\">lambda</text>\n";

  struct Curve {
    const char* label;
    const char* style;
    double (*value)(const PhaseRow&);
  };
  const Curve curves[] = {
      {"upper", "stroke=\"#c0392b\" stroke-dasharray=\"6 4\"",
       [](const PhaseRow& r) { return r.b.upper; }},
      {"lower (psi)", "stroke=\"#2c3e50\"",
       [](const PhaseRow& r) { return r.b.has_lower_psi ? r.b.lower_psi : NAN; }},
      {"lower (Lambert)", "stroke=\"#27ae60\" stroke-dasharray=\"2 3\"",
       [](const PhaseRow& r) { return r.b.has_lower_lambert ? r.b.lower_lambert : NAN; }},
      {"spectral", "stroke=\"#7f8c8d\" stroke-width=\"1\"",
       [](const PhaseRow& r) { return r.b.spectral; }},
  };
  int slot = 0;
  for (const Curve& c : curves) {
    s << "<polyline fill=\"none\" stroke-width=\"2\" " << c.style << " points=\"";
    bool first = true;
    for (const auto& r : rows) {
      const double v = c.value(r);
      if (std::isnan(v)) continue;
      s << (first ? "" : " ") << px(r.gamma) << "," << py(v);
      first = false;
    }
    s << "\"/>\n";
    const double ly = top + 20 + 20 * slot++;
    const double lx = width - right + 10;
    s << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 30 << "\" y2=\"" << ly
      << "\" stroke-width=\"2\" " << c.style << "/>\n";
    s << "<text x=\"" << lx + 36 << "\" y=\"" << ly + 4 << "\">" << c.label << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

int cmd_phase_diagram(const PhaseFlags& f, const Common& c, const std::vector<std::string>& config) {
  std::vector<double> grid = f.gammas;
  if (grid.empty()) {
    if (f.points < 2 || !(f.gamma_min > 0 && f.gamma_min < f.gamma_max && f.gamma_max < 1)) {
      throw CliError{kUsage, "need --points >= 2 and 0 < --gamma-min < --gamma-max < 1"};
    }
    const double a = std::log(f.gamma_min), b = std::log(f.gamma_max);
    for (int i = 0; i < f.points; ++i) grid.push_back(std::exp(a + (b - a) * i / (f.points - 1)));
  }
  std::vector<PhaseRow> rows;
  for (double g : grid) {
    if (!(g > 0 && g < 1)) throw CliError{kUsage, "gamma values must lie in (0, 1)"};
    pl_params p{};
    p.problem = PL_SPARSE_PCA;
    p.gamma = g;
    PhaseRow row{g, {}};
    check(pl_bounds_compute(&p, &row.b));
    rows.push_back(row);
  }
  std::string text = csv_header("phase-diagram", config, {});
  text += "gamma,lambda_upper,lambda_lower_theorem,lambda_lower_psi,lambda_lower_lambert,spectral\n";
  for (const auto& r : rows) {
    text += real(r.gamma) + "," + real(r.b.upper) + "," + real(r.b.lower_theorem) + "," +
            (r.b.has_lower_psi ? real(r.b.lower_psi) : "") + "," +
            (r.b.has_lower_lambert ? real(r.b.lower_lambert) : "") + "," + real(r.b.spectral) +
            "\n";
  }
  write_output(c.out, text);
  if (!f.svg.empty()) write_output(f.svg, phase_svg(rows));
  return kOk;
}

struct SimulateFlags {
  ParamFlags params;
  std::string sweep = "snr";
  std::vector<double> grid;
  std::vector<std::int64_t> ns;
  std::int64_t trials = 100;
  std::vector<std::string> detectors = {"spectral"};
  std::string hypotheses = "both";
};

int cmd_simulate(const SimulateFlags& f, const Common& c, const std::vector<std::string>& config) {
  const bool with_planted = f.hypotheses != "null";
  const bool with_null = f.hypotheses != "planted";
  std::vector<double> grid = f.grid;
  if (grid.empty()) {
    const ParamFlags& p = f.params;
    grid.push_back(f.sweep == "snr"     ? p.snr
                   : f.sweep == "gamma" ? p.gamma
                   : f.sweep == "alpha" ? p.alpha
                                        : static_cast<double>(p.k));
  }
  std::vector<std::int64_t> ns = f.ns.empty() ? std::vector<std::int64_t>{f.params.n} : f.ns;
  const int threads = c.thread_count();

  std::vector<std::string> notes;
  std::string body;
  std::string columns = "problem,snr,n,k_or_gamma,alpha,detector,trials,";
  if (with_planted) columns += "detect_rate_planted,";
  if (with_null) columns += "false_positive_rate_null,";
  if (with_planted) columns += "mean_l2_overlap_or_theta2,mean_signal_correlation,";
  columns += "seed,reason\n";

  std::uint64_t cell = 0;
  std::size_t ran = 0, skipped = 0;
  for (double value : grid) {
    for (std::int64_t n : ns) {
      ParamFlags pf = f.params;
      pf.n = n;
      if (f.sweep == "snr") pf.snr = value;
      if (f.sweep == "gamma") pf.gamma = value;
      if (f.sweep == "alpha") pf.alpha = value;
      if (f.sweep == "k") pf.k = static_cast<int>(value);
      const std::uint64_t cell_seed = pl_substream_seed(c.seed, cell++);

      pl_params p = pf.to_c();
      std::string reason;
      if (c.round) {
        char buf[512];
        if (pl_params_round(&p, &p, buf, sizeof buf) == PL_OK && buf[0] != '\0') {
          notes.push_back("cell " + std::to_string(cell - 1) + ": " + buf);
        }
      }
      if (pl_params_validate(&p) != PL_OK) reason = pl_last_error();
      const double shape = p.problem == PL_SPARSE_PCA ? p.gamma : static_cast<double>(p.k);
      const std::string prefix = std::string(pl_problem_name(p.problem)) + "," + real(p.snr) +
                                 "," + std::to_string(p.n) + "," + real(shape) + "," +
                                 (p.problem == PL_CLUSTERING ? real(p.alpha) : "") + ",";
      for (const std::string& det : f.detectors) {
        const int d = det == "glr" ? PL_GLR : PL_SPECTRAL;
        pl_cell_result r{};
        std::string why = reason;
        if (why.empty()) {
          const pl_status st =
              pl_simulate_cell(&p, d, f.trials, cell_seed, threads, with_planted, with_null, &r);
          if (st == PL_ERR_INFEASIBLE || st == PL_ERR_DOMAIN || st == PL_ERR_INVALID_ARGUMENT) {
            why = pl_last_error();
          } else {
            check(st);
          }
        }
        body += prefix + det + "," + std::to_string(f.trials) + ",";
        const bool ok = why.empty();
        if (with_planted) body += (ok ? real(r.detect_rate_planted) : "") + ",";
        if (with_null) body += (ok ? real(r.false_positive_rate_null) : "") + ",";
        if (with_planted) {
          body += (ok ? real(r.mean_overlap) : "") + "," +
                  (ok ? real(r.mean_signal_correlation) : "") + ",";
        }
        for (char& ch : why) {
          if (ch == ',' || ch == '\n') ch = ';';
        }
        body += std::to_string(cell_seed) + "," + why + "\n";
        ok ? ++ran : ++skipped;
      }
    }
  }
  write_output(c.out, csv_header("simulate", config, notes) + columns + body);
  if (ran == 0 && skipped > 0) {
    std::cerr << "error: every cell was skipped as infeasible\n";
    return kInfeasible;
  }
  return kOk;
}

struct MomentFlags {
  ParamFlags params;
  std::string method = "exact";
  std::int64_t trials = 100000;
};

int cmd_moments(const MomentFlags& f, const Common& c) {
  std::string note;
  const pl_params p = resolve(f.params.to_c(), c.round, &note);
  pl_moment m{};
  if (f.method == "exact") {
    check(pl_second_moment_exact(&p, &m));
  } else {
    check(pl_second_moment_mc(&p, f.trials, c.seed, c.thread_count(), &m));
  }
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["problem"] = pl_problem_name(p.problem);
  j["snr"] = p.snr;
  if (p.problem == PL_SPARSE_PCA) j["gamma"] = p.gamma;
  if (p.problem != PL_SPARSE_PCA) j["k"] = p.k;
  if (p.problem == PL_CLUSTERING) j["alpha"] = p.alpha;
  j["n"] = p.n;
  j["method"] = f.method;
  j["value"] = m.value;
  j["log_value"] = m.log_value;
  j["standard_error"] = m.has_standard_error ? nlohmann::ordered_json(m.standard_error) : nullptr;
  j["trials"] = m.has_standard_error ? nlohmann::ordered_json(m.trials) : nullptr;
  if (f.method == "mc") j["seed"] = c.seed;
  if (!note.empty()) j["rounded"] = note;
  write_output(c.out, j.dump() + "\n");
  return kOk;
}

struct MmseFlags {
  ParamFlags params;
  std::vector<double> betas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::int64_t trials = 200;
};

int cmd_mmse(const MmseFlags& f, const Common& c, const std::vector<std::string>& config) {
  std::string note;
  const pl_params p = resolve(f.params.to_c(), c.round, &note);
  std::vector<pl_mmse_row> rows(f.betas.size());
  check(pl_mmse_curve(&p, f.betas.data(), f.betas.size(), f.trials, c.seed, c.thread_count(),
                      rows.data()));
  std::vector<std::string> notes;
  if (!note.empty()) notes.push_back("rounded: " + note);
  std::string text = csv_header("mmse", config, notes);
  text += "beta,mmse,se_mmse,posterior_norm,se_pn,mutual_info_per_n,se_mi\n";
  for (const auto& r : rows) {
    text += real(r.beta) + "," + real(r.mmse) + "," + real(r.se_mmse) + "," +
            real(r.posterior_norm) + "," + real(r.se_posterior_norm) + "," +
            real(r.mutual_info) + "," + real(r.se_mutual_info) + "\n";
  }
  write_output(c.out, text);
  return kOk;
}

struct GenerateFlags {
  ParamFlags params;
  std::string hypothesis = "planted";
  std::string format = "binary";
};

int cmd_generate(const GenerateFlags& f, const Common& c) {
  if (c.out == "-" && f.format == "binary") {
    throw CliError{kUsage, "binary output needs --out <path>"};
  }
  const pl_params p = resolve(f.params.to_c(), c.round, nullptr);
  pl_instance* inst = nullptr;
  check(pl_instance_generate(&p, f.hypothesis == "null" ? PL_NULL : PL_PLANTED, c.seed, &inst));
  const pl_status st = f.format == "binary"
                           ? pl_instance_save(inst, c.out.c_str())
                           : pl_instance_write_text(inst, c.out == "-" ? "/dev/stdout" : c.out.c_str());
  pl_instance_free(inst);
  check(st);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection and reconstruction experiments for planted low-rank signals"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key=value configuration file; flags take precedence");

  Common common;
  app.add_option("--seed", common.seed, "master seed");
  app.add_option("--out", common.out, "output path, - for standard output");
  app.add_option("--threads", common.threads, "worker threads (integer or auto)");
  app.add_flag("--round", common.round, "snap parameters to valid integers and report it");

  ParamFlags thr;
  auto* thresholds = app.add_subcommand("thresholds", "bounds for one parameter point as JSON");
  add_problem_flags(thresholds, thr, false, false);

  PhaseFlags ph;
  auto* phase = app.add_subcommand("phase-diagram", "sparse PCA bounds across gamma as CSV");
  phase->add_option("--gammas", ph.gammas, "explicit gamma grid")->delimiter(',');
  phase->add_option("--points", ph.points, "number of log-spaced gamma points");
  phase->add_option("--gamma-min", ph.gamma_min);
  phase->add_option("--gamma-max", ph.gamma_max);
  phase->add_option("--svg", ph.svg, "also write a line chart to this path");

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "detection and reconstruction sweep as CSV");
  add_problem_flags(simulate, sim.params, true, true);
  simulate->add_option("--sweep", sim.sweep, "parameter swept by --grid")
      ->check(CLI::IsMember({"snr", "gamma", "alpha", "k"}));
  simulate->add_option("--grid", sim.grid, "values of the swept parameter")->delimiter(',');
  simulate->add_option("--ns", sim.ns, "list of dimensions (overrides --n)")->delimiter(',');
  simulate->add_option("--trials", sim.trials)->check(CLI::PositiveNumber);
  simulate->add_option("--detectors", sim.detectors)->delimiter(',')
      ->check(CLI::IsMember({"spectral", "glr"}));
  simulate->add_option("--hypotheses", sim.hypotheses)
      ->check(CLI::IsMember({"both", "planted", "null"}));

  MomentFlags mom;
  auto* moments = app.add_subcommand("moments", "second moment of the likelihood ratio as JSON");
  add_problem_flags(moments, mom.params, true, true);
  moments->add_option("--method", mom.method)->check(CLI::IsMember({"exact", "mc"}));
  moments->add_option("--trials", mom.trials)->check(CLI::PositiveNumber);

  MmseFlags mm;
  auto* mmse = app.add_subcommand("mmse", "MMSE and mutual information curve as CSV");
  add_problem_flags(mmse, mm.params, true, true);
  mmse->add_option("--betas", mm.betas)->delimiter(',');
  mmse->add_option("--trials", mm.trials)->check(CLI::PositiveNumber);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "write one instance to a file");
  add_problem_flags(generate, gen.params, true, true);
  generate->add_option("--hypothesis", gen.hypothesis)
      ->check(CLI::IsMember({"planted", "null"}));
  generate->add_option("--format", gen.format)->check(CLI::IsMember({"binary", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*thresholds) return cmd_thresholds(thr, common);
    if (*phase) return cmd_phase_diagram(ph, common, resolved_config(app, *phase));
    if (*simulate) return cmd_simulate(sim, common, resolved_config(app, *simulate));
    if (*moments) return cmd_moments(mom, common);
    if (*mmse) return cmd_mmse(mm, common, resolved_config(app, *mmse));
    if (*generate) return cmd_generate(gen, common);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  }
  return kUsage;
}
