// evl: command-line front end for the environmental-visual-load model.
//
// Subcommands: eval (single observation), cohort (batch report files),
// check-table (reference-table consistency report), sweep (one-variable
// parameter scan as plot-ready CSV), lux (image -> illuminance estimate).
//
// Exit codes: 0 success, 2 usage/validation error, 3 model domain error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evl/evl.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file '" + path.string() + "'");
  out << content;
}

// Human-facing precision; CSV output uses evl::format_double (round-trip exact).
std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Flags shared by every subcommand (registered on the parent app; subcommands
// use fallthrough so they may appear anywhere on the command line).
struct GlobalOpts {
  std::string config_path;
  std::string format = "text";
  std::string mode;
  double theta = 0.0;
  bool theta_set = false;
  bool mode_set = false;
};

evl::ModelConfig resolve_config(const GlobalOpts& g) {
  evl::ModelConfig cfg;
  if (!g.config_path.empty()) cfg = evl::parse_model_config(read_file(g.config_path));
  if (g.mode_set) {
    if (g.mode == "literal")
      cfg.elongation_mode = evl::ElongationMode::Literal;
    else if (g.mode == "unit")
      cfg.elongation_mode = evl::ElongationMode::UnitCoefficient;
    else
      throw evl::Error(evl::errc::bad_config,
                       "--mode must be 'literal' or 'unit', got '" + g.mode + "'");
  }
  if (g.theta_set) cfg.theta = g.theta;
  evl::validate(cfg);
  return cfg;
}

double lux_from_image(const std::string& path, const evl::ModelConfig& cfg) {
  return evl::estimate_lux(evl::decode_pnm(read_file(path)), cfg);
}

// --- eval -------------------------------------------------------------------

struct EvalOpts {
  double age = 0.0;
  std::string near_work = "reading";
  double t = 0.0;
  double lux = 0.0;
  bool lux_set = false;
  std::string image;
  double pupil = 0.0;
  double distance = 0.0;
  double aberrations = 0.0;
};

void print_evaluation_text(const evl::OcularEvaluation& e, std::ostream& out) {
  out << "M: " << fmt4(e.refraction) << "\n"
      << "A: " << fmt4(e.rest_accommodation) << "\n"
      << "V: " << fmt4(e.rest_convergence) << "\n"
      << "AL: " << fmt4(e.axial_length) << "\n"
      << "AR: " << fmt4(e.accommodative_response) << "\n"
      << "VR: " << fmt4(e.convergence_response) << "\n"
      << "O: " << fmt4(e.ratio) << "\n"
      << "class: " << evl::to_string(e.balance) << "\n";
}

std::string evaluation_csv_row(const evl::OcularEvaluation& e) {
  std::string row;
  row += evl::format_double(e.refraction);
  row += ',';
  row += evl::format_double(e.rest_accommodation);
  row += ',';
  row += evl::format_double(e.rest_convergence);
  row += ',';
  row += evl::format_double(e.axial_length);
  row += ',';
  row += evl::format_double(e.accommodative_response);
  row += ',';
  row += evl::format_double(e.convergence_response);
  row += ',';
  row += evl::format_double(e.ratio);
  row += ',';
  row += evl::to_string(e.balance);
  return row;
}

int run_eval(const GlobalOpts& g, const EvalOpts& o) {
  const evl::ModelConfig cfg = resolve_config(g);
  if (o.lux_set == !o.image.empty())
    throw evl::Error(evl::errc::conflicting_lighting_source,
                     "exactly one of --lux and --image must be given");

  evl::NearWorkObservation obs;
  obs.near_work = evl::parse_near_work_token(o.near_work);
  obs.duration_min = o.t;
  obs.lux = o.lux_set ? o.lux : lux_from_image(o.image, cfg);
  obs.pupil_mm = o.pupil;
  obs.distance_m = o.distance;
  obs.aberrations = o.aberrations;

  const evl::AgeGroupBaseline baseline = evl::builtin_baselines().lookup(o.age);
  const evl::OcularEvaluation e = evl::evaluate_observation(baseline, obs, cfg);
  if (g.format == "csv")
    std::cout << "m,a,v,al,ar,vr,o,class\n" << evaluation_csv_row(e) << "\n";
  else
    print_evaluation_text(e, std::cout);
  return 0;
}

// --- cohort ------------------------------------------------------------------

struct CohortOpts {
  std::string observations;
  std::string baselines;
  bool builtin = false;
  std::string out_dir;
};

int run_cohort(const GlobalOpts& g, const CohortOpts& o) {
  const evl::ModelConfig cfg = resolve_config(g);
  if (o.baselines.empty() == !o.builtin)
    throw evl::Error(evl::errc::bad_config,
                     "exactly one of --baselines and --builtin must be given");
  const evl::BaselineTable table =
      o.builtin ? evl::builtin_baselines() : evl::parse_baselines(read_file(o.baselines));
  const std::vector<evl::ObservationFileRow> rows =
      evl::parse_observations(read_file(o.observations));
  const fs::path obs_dir = fs::path(o.observations).parent_path();

  std::string evaluations = "subject_id,m,a,v,al,ar,vr,o,class\n";
  std::string errors = "subject_id,error,message\n";
  std::vector<evl::TrendSample> samples;
  std::size_t n_ok = 0, n_failed = 0;
  for (const evl::ObservationFileRow& row : rows) {
    try {
      evl::ObservationFileRow resolved = row;
      if (row.image_path) {
        // Image paths are taken relative to the observation file itself.
        const fs::path img = fs::path(*row.image_path).is_absolute()
                                 ? fs::path(*row.image_path)
                                 : obs_dir / *row.image_path;
        resolved.lux = lux_from_image(img.string(), cfg);
        resolved.image_path.reset();
      }
      const evl::NearWorkObservation obs = evl::to_observation(resolved);
      const evl::AgeGroupBaseline& baseline = table.lookup(row.age);
      const evl::OcularEvaluation e = evl::evaluate_observation(baseline, obs, cfg);
      evaluations += row.subject_id + "," + evaluation_csv_row(e) + "\n";
      ++n_ok;
      if (row.ser)
        samples.push_back({e.ratio, *row.ser,
                           std::to_string(baseline.age_lo) + "-" + std::to_string(baseline.age_hi)});
    } catch (const evl::Error& e) {
      errors += row.subject_id + "," + evl::error_name(e.code()) + ",\"" +
                std::string(e.what()) + "\"\n";
      ++n_failed;
    }
  }

  std::string trend;
  try {
    const evl::TrendReport report = evl::trend_association(samples);
    trend += "pairs: " + std::to_string(report.n_pairs) + "\n";
    trend += "spearman_rho: " + evl::format_double(report.rho) + "\n";
    trend += std::string("direction: ") +
             (report.direction > 0 ? "positive" : report.direction < 0 ? "negative" : "flat") +
             "\n";
    for (const evl::GroupTrendSummary& grp : report.groups)
      trend += "group " + grp.group + ": n=" + std::to_string(grp.n) +
               " mean_o=" + fmt4(grp.mean_o) + " mean_ser=" + fmt4(grp.mean_ser) + "\n";
  } catch (const evl::Error& e) {
    trend += std::string(e.what()) + "\n";
  }

  fs::create_directories(o.out_dir);
  write_file(fs::path(o.out_dir) / "evaluations.csv", evaluations);
  write_file(fs::path(o.out_dir) / "errors.csv", errors);
  write_file(fs::path(o.out_dir) / "trend.txt", trend);
  std::cout << "evaluated " << n_ok << " of " << rows.size() << " rows; reports under "
            << o.out_dir << "\n";

  // Per-row failures only sink the run when nothing succeeded.
  if (!rows.empty() && n_ok == 0) return 3;
  return 0;
}

// --- check-table -------------------------------------------------------------

struct CheckTableOpts {
  std::string table;
  evl::ColumnTolerances tol;
};

int run_check_table(const GlobalOpts& g, const CheckTableOpts& o) {
  const evl::ModelConfig cfg = resolve_config(g);
  const std::vector<evl::ReferenceTableRow> rows = evl::parse_reference_table(read_file(o.table));
  const evl::ConsistencyReport report =
      evl::check_reference_table(rows, evl::builtin_baselines(), o.tol, cfg);

  if (g.format == "csv") {
    std::cout << "row,mode,column,recomputed,printed,deviation,flag\n";
    for (const evl::ConsistencyEntry& e : report.entries)
      std::cout << e.row << ',' << evl::to_string(e.mode) << ',' << evl::to_string(e.column)
                << ',' << evl::format_double(e.recomputed) << ',' << evl::format_double(e.printed)
                << ',' << evl::format_double(e.deviation) << ','
                << (e.match ? "Match" : "Deviation") << "\n";
  } else {
    std::cout << "| row | mode | column | recomputed | printed | deviation | flag |\n"
              << "|----:|------|--------|-----------:|--------:|----------:|------|\n";
    for (const evl::ConsistencyEntry& e : report.entries)
      std::cout << "| " << e.row << " | " << evl::to_string(e.mode) << " | "
                << evl::to_string(e.column) << " | " << fmt4(e.recomputed) << " | "
                << fmt4(e.printed) << " | " << fmt6(e.deviation) << " | "
                << (e.match ? "Match" : "Deviation") << " |\n";
  }
  // Deviations are findings, not failures: completing the report is success.
  return 0;
}

// --- sweep --------------------------------------------------------------------

struct SweepOpts {
  std::string var;
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  double age = 0.0;
  std::string near_work = "reading";
  double t = 0.0;
  double lux = 500.0;
  double pupil = 5.0;
  double distance = 0.1;
  double aberrations = 50.0;
  bool mark_crossing = false;
};

int run_sweep(const GlobalOpts& g, const SweepOpts& o) {
  const evl::ModelConfig cfg = resolve_config(g);
  evl::SweepSpec spec;
  spec.variable = evl::parse_sweep_variable(o.var);
  spec.start = o.from;
  spec.stop = o.to;
  spec.steps = o.steps;
  spec.age = o.age;
  spec.fixed.near_work = evl::parse_near_work_token(o.near_work);
  spec.fixed.duration_min = o.t;
  spec.fixed.lux = o.lux;
  spec.fixed.pupil_mm = o.pupil;
  spec.fixed.distance_m = o.distance;
  spec.fixed.aberrations = o.aberrations;

  const evl::SweepResult result =
      evl::run_sweep(evl::builtin_baselines(), spec, cfg, o.mark_crossing);
  if (o.mark_crossing) {
    std::cout << "# al_star="
              << (result.al_star ? evl::format_double(*result.al_star) : "none") << "\n";
    std::cout << "# t_star=" << (result.t_star ? evl::format_double(*result.t_star) : "none")
              << "\n";
  }
  std::cout << evl::to_string(result.variable) << ",m,al,ar,vr,o,class\n";
  for (const evl::SweepPoint& p : result.points)
    std::cout << evl::format_double(p.value) << ',' << evl::format_double(p.eval.refraction)
              << ',' << evl::format_double(p.eval.axial_length) << ','
              << evl::format_double(p.eval.accommodative_response) << ','
              << evl::format_double(p.eval.convergence_response) << ','
              << evl::format_double(p.eval.ratio) << ',' << evl::to_string(p.eval.balance)
              << "\n";
  return 0;
}

// --- lux ----------------------------------------------------------------------

int run_lux(const GlobalOpts& g, const std::string& image) {
  const evl::ModelConfig cfg = resolve_config(g);
  const double lux = lux_from_image(image, cfg);
  if (g.format == "csv")
    std::cout << "lux\n" << evl::format_double(lux) << "\n";
  else
    std::cout << "lux: " << fmt4(lux) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Environmental visual load model for myopia-trend analysis"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "Model configuration file (key=value lines)");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();
  app.add_option("--mode", g.mode, "Elongation coefficient mode: literal or unit")
      ->check(CLI::IsMember({"literal", "unit"}));
  app.add_option("--theta", g.theta, "Balance band half-width, in (0, 1)");

  EvalOpts eo;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a single observation");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--age", eo.age, "Subject age in years")->required();
  eval_cmd->add_option("-n,--near-work", eo.near_work,
                       "Near-work type (reading|writing|phone) or positive coefficient")
      ->capture_default_str();
  eval_cmd->add_option("--t", eo.t, "Near-work duration in minutes")->capture_default_str();
  CLI::Option* eval_lux = eval_cmd->add_option("--lux", eo.lux, "Ambient lighting in lux");
  CLI::Option* eval_img =
      eval_cmd->add_option("--image", eo.image, "Environment image (PGM/PPM) to estimate lux from");
  eval_lux->excludes(eval_img);
  eval_cmd->add_option("--pupil", eo.pupil, "Pupil size in mm")->required();
  eval_cmd->add_option("--distance", eo.distance, "Viewing distance in m")->required();
  eval_cmd->add_option("--aberrations", eo.aberrations, "Aberration count")->required();

  CohortOpts co;
  CLI::App* cohort_cmd = app.add_subcommand("cohort", "Evaluate an observation file");
  cohort_cmd->fallthrough();
  cohort_cmd->add_option("--observations", co.observations, "Observation CSV file")->required();
  CLI::Option* cohort_baselines =
      cohort_cmd->add_option("--baselines", co.baselines, "Baseline CSV file");
  cohort_cmd->add_flag("--builtin", co.builtin, "Use the built-in age-group baselines")
      ->excludes(cohort_baselines);
  cohort_cmd->add_option("--out", co.out_dir, "Directory for the report files")->required();

  CheckTableOpts cto;
  CLI::App* check_cmd =
      app.add_subcommand("check-table", "Recompute the reference table and flag deviations");
  check_cmd->fallthrough();
  check_cmd->add_option("--table", cto.table, "Reference table CSV file")->required();
  check_cmd->add_option("--tol-m", cto.tol.m, "Match tolerance for M")->capture_default_str();
  check_cmd->add_option("--tol-ar", cto.tol.ar, "Match tolerance for AR")->capture_default_str();
  check_cmd->add_option("--tol-vr", cto.tol.vr, "Match tolerance for VR")->capture_default_str();
  check_cmd->add_option("--tol-o", cto.tol.o, "Match tolerance for O")->capture_default_str();

  SweepOpts so;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Scan one input and emit plot-ready CSV");
  sweep_cmd->fallthrough();
  sweep_cmd->add_option("--var", so.var, "Swept variable: t, d, or L")->required();
  sweep_cmd->add_option("--from", so.from, "First swept value")->required();
  sweep_cmd->add_option("--to", so.to, "Last swept value")->required();
  sweep_cmd->add_option("--steps", so.steps, "Number of points (>= 2)")->required();
  sweep_cmd->add_option("--age", so.age, "Subject age in years")->required();
  sweep_cmd->add_option("-n,--near-work", so.near_work, "Fixed near-work type or coefficient")
      ->capture_default_str();
  sweep_cmd->add_option("--t", so.t, "Fixed duration in minutes")->capture_default_str();
  sweep_cmd->add_option("--lux", so.lux, "Fixed lighting in lux")->capture_default_str();
  sweep_cmd->add_option("--pupil", so.pupil, "Fixed pupil size in mm")->capture_default_str();
  sweep_cmd->add_option("--distance", so.distance, "Fixed viewing distance in m")
      ->capture_default_str();
  sweep_cmd->add_option("--aberrations", so.aberrations, "Fixed aberration count")
      ->capture_default_str();
  sweep_cmd->add_flag("--mark-crossing", so.mark_crossing,
                      "Emit balance-crossing markers (al_star, t_star) as comment lines");

  std::string lux_image;
  CLI::App* lux_cmd = app.add_subcommand("lux", "Estimate illuminance from an image");
  lux_cmd->fallthrough();
  lux_cmd->add_option("--image", lux_image, "Environment image (PGM/PPM)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  g.theta_set = app.count("--theta") > 0;
  g.mode_set = app.count("--mode") > 0;
  eo.lux_set = eval_lux->count() > 0;

  try {
    if (*eval_cmd) return run_eval(g, eo);
    if (*cohort_cmd) return run_cohort(g, co);
    if (*check_cmd) return run_check_table(g, cto);
    if (*sweep_cmd) return run_sweep(g, so);
    if (*lux_cmd) return run_lux(g, lux_image);
  } catch (const evl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return evl::is_domain_error(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
