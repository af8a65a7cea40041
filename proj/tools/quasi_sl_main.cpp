// quasi-sl: batch front end for the multi-interval Sturm-Liouville solver.
//
// Exit codes: 0 success, 2 invalid configuration or usage, 3 numerical
// failure. Logging level via QUASI_SL_LOG (error|warn|info|debug).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "quasisl/analysis.hpp"
#include "quasisl/config.hpp"
#include "quasisl/errors.hpp"
#include "quasisl/log.hpp"
#include "quasisl/parallel.hpp"

using namespace quasisl;
using nlohmann::json;

namespace {

struct GlobalFlags {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  double tol_rel = 0;
  double tol_abs = 0;
};

void apply_overrides(ConfigDocument& doc, const GlobalFlags& flags) {
  if (flags.threads > 0) set_thread_count(flags.threads);
  if (flags.tol_rel > 0) doc.tolerances.rel_tol = flags.tol_rel;
  if (flags.tol_abs > 0) doc.tolerances.abs_tol = flags.tol_abs;
}

// CSV (or any text) goes to --out when given, else stdout.
void emit(const GlobalFlags& flags, const std::string& text) {
  if (flags.out.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream f(flags.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + flags.out + "'");
  f << text;
}

// JSON metadata accompanying a CSV body always goes to stdout.
void emit_meta(const json& meta) {
  std::string line = meta.dump() + "\n";
  std::fputs(line.c_str(), stdout);
}

json classification_json(const ConfigDocument& doc) {
  const BoundaryMatrix& K = doc.boundary;
  const Classification& cls = K.classification();
  NodePermutation perm = NodePermutation::standard(doc.problem.intervals());
  LocalityReport loc = locality_check(K, perm);
  json out;
  out["norm"] = cls.norm;
  out["unitarity_defect"] = cls.unitarity_defect;
  out["class"] = to_string(cls.cls);
  out["variant"] = K.variant() == Variant::Dissipative ? "dissipative"
                                                       : "accumulative";
  out["local"] = loc.local;
  out["max_off_block"] = loc.max_off_block;
  if (loc.local) {
    json blocks = json::array();
    for (const MatrixXc& b : loc.blocks) {
      json block = json::array();
      for (long i = 0; i < b.rows(); ++i) {
        json row = json::array();
        for (long j = 0; j < b.cols(); ++j)
          row.push_back({b(i, j).real(), b(i, j).imag()});
        block.push_back(row);
      }
      blocks.push_back(block);
    }
    out["blocks"] = blocks;
  }
  return out;
}

SearchReport run_search(const ConfigDocument& doc) {
  if (!doc.search)
    throw ConfigError("search: missing (this command needs a search region)");
  SearchOptions opt;
  opt.ode = doc.tolerances;
  opt.max_count = doc.max_count;
  return find_eigenvalues(doc.problem, doc.boundary, *doc.search, opt);
}

std::string sampled_csv(const QuasiFunction& y, double a, double b,
                        int samples) {
  std::ostringstream csv;
  csv << "t,re_y,im_y,re_D1y,im_D1y\n";
  const double total = b - a;
  for (int k = 0; k < y.intervals(); ++k) {
    const auto& piece = y.piece(k);
    int n = std::max(2, static_cast<int>(std::lround(
                            samples * (piece.right - piece.left) / total)));
    for (int i = 0; i <= n; ++i) {
      double t = piece.left + (piece.right - piece.left) * i / n;
      Vector2c v = piece.vec(t);
      csv << format_double(t) << ',' << format_double(v(0).real()) << ','
          << format_double(v(0).imag()) << ',' << format_double(v(1).real())
          << ',' << format_double(v(1).imag()) << '\n';
    }
  }
  return csv.str();
}

int cmd_classify(const ConfigDocument& doc, const GlobalFlags& flags) {
  emit(flags, classification_json(doc).dump(2) + "\n");
  return 0;
}

int cmd_eigs(const ConfigDocument& doc, const GlobalFlags& flags) {
  SearchReport report = run_search(doc);
  std::ostringstream csv;
  csv << "re_lambda,im_lambda,alg_mult,geo_mult,residual\n";
  for (const Eigenpair& ep : report.eigenvalues)
    csv << format_double(ep.lambda.real()) << ','
        << format_double(ep.lambda.imag()) << ',' << ep.alg_mult << ','
        << ep.geo_mult << ',' << format_double(ep.residual) << '\n';
  emit(flags, csv.str());
  log_info("region winding ", report.region_winding, ", det evals ",
           report.det_evals, ", boxes ", report.boxes_processed);
  return 0;
}

int cmd_eigfun(const ConfigDocument& doc, const GlobalFlags& flags, int index,
               int samples) {
  SearchReport report = run_search(doc);
  std::vector<const QuasiFunction*> funcs;
  for (const Eigenpair& ep : report.eigenvalues)
    for (const QuasiFunction& y : ep.root_functions) funcs.push_back(&y);
  if (index < 0 || index >= static_cast<int>(funcs.size()))
    throw NumericalError("eigenfunction index " + std::to_string(index) +
                         " out of range; found " +
                         std::to_string(funcs.size()) + " root functions");
  emit(flags,
       sampled_csv(*funcs[index], doc.problem.a(), doc.problem.b(), samples));
  return 0;
}

int cmd_green(const ConfigDocument& doc, const GlobalFlags& flags,
              double lambda_re, double lambda_im, int grid) {
  Complex lambda(lambda_re, lambda_im);
  GreenKernel fine = green_kernel(doc.problem, doc.boundary, lambda, grid,
                                  doc.tolerances);
  GreenKernel coarse = green_kernel(doc.problem, doc.boundary, lambda,
                                    std::max(4, grid / 2), doc.tolerances);
  std::ostringstream csv;
  csv << "t,s,re_G,im_G\n";
  const std::size_t n = fine.t_nodes.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      csv << format_double(fine.t_nodes[i]) << ','
          << format_double(fine.t_nodes[j]) << ','
          << format_double(fine.values(i, j).real()) << ','
          << format_double(fine.values(i, j).imag()) << '\n';
  emit(flags, csv.str());
  json meta;
  meta["hs_norm"] = fine.hs;
  meta["grid"] = grid;
  meta["grid_refinement_delta"] = std::abs(fine.hs - coarse.hs);
  emit_meta(meta);
  return 0;
}

int cmd_resolve(const ConfigDocument& doc, const GlobalFlags& flags,
                double lambda_re, double lambda_im,
                const std::string& forcing_src, int samples) {
  Complex lambda(lambda_re, lambda_im);
  Expr h_expr;
  try {
    h_expr = Expr::parse(forcing_src, /*allow_imaginary=*/true);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("--forcing: ") + e.what());
  }
  Forcing h;
  h.fn = [h_expr](double t) { return h_expr.eval(t); };
  QuasiFunction y =
      apply_resolvent(doc.problem, doc.boundary, lambda, h, doc.tolerances);
  emit(flags, sampled_csv(y, doc.problem.a(), doc.problem.b(), samples));
  json meta;
  meta["ode_residual_l1"] = ode_residual_l1(y, doc.problem);
  meta["l2_norm"] = l2_norm(y);
  emit_meta(meta);
  return 0;
}

int cmd_verify(const ConfigDocument& doc, const GlobalFlags& flags,
               const std::vector<std::string>& suites) {
  json out;
  out["seed"] = flags.seed;
  bool all_pass = true;
  json jsuites;
  for (const std::string& suite : suites) {
    if (suite == "green_identity") {
      GreenIdentityReport rep =
          green_identity_suite(doc.problem, 200, flags.seed, doc.tolerances);
      jsuites[suite] = {{"pass", rep.pass},
                        {"samples", rep.samples},
                        {"max_residual", rep.max_residual}};
      all_pass = all_pass && rep.pass;
    } else if (suite == "dissipativity") {
      DissipativityReport rep = dissipativity_suite(
          doc.problem, doc.boundary, 50, flags.seed, doc.tolerances);
      jsuites[suite] = {{"pass", rep.pass},
                        {"samples", rep.samples},
                        {"min_signed_form", rep.min_signed_form},
                        {"violations", rep.violations}};
      all_pass = all_pass && rep.pass;
    } else if (suite == "completeness") {
      SearchReport search = run_search(doc);
      auto reports = completeness_suite(doc.problem, search.eigenvalues,
                                        standard_test_functions(doc.problem),
                                        {5, 10, 20, 50}, doc.tolerances);
      json jreps = json::array();
      bool pass = true;
      for (const CompletenessReport& rep : reports) {
        // evidence, not proof: residual decay must be monotone
        for (std::size_t i = 1; i < rep.rho.size(); ++i)
          if (rep.rho[i] > rep.rho[i - 1] + 1e-10) pass = false;
        jreps.push_back({{"test_function", rep.test_function},
                         {"N", rep.N},
                         {"rho", rep.rho},
                         {"gram_condition", rep.gram_condition},
                         {"regularized", rep.regularized}});
      }
      jsuites[suite] = {{"pass", pass}, {"reports", jreps}};
      all_pass = all_pass && pass;
    } else {
      throw ConfigError("unknown suite '" + suite +
                        "' (expected green_identity, dissipativity or "
                        "completeness)");
    }
  }
  out["suites"] = jsuites;
  out["pass"] = all_pass;
  emit(flags, out.dump(2) + "\n");
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-sl: spectra, resolvents and completeness diagnostics "
               "for multi-interval Sturm-Liouville problems with "
               "distributional coefficients"};
  app.require_subcommand(1);

  GlobalFlags flags;
  std::string config_path;
  int eig_index = 0, samples = 200, grid = 64;
  double lambda_re = 0, lambda_im = 0;
  std::string forcing_src = "0";
  std::string suites_csv = "green_identity,dissipativity,completeness";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "JSON configuration file")
        ->required();
    cmd->add_option("--seed", flags.seed, "seed for randomized suites");
    cmd->add_option("--threads", flags.threads, "worker pool size");
    cmd->add_option("--out", flags.out, "output path (default stdout)");
    cmd->add_option("--tol-rel", flags.tol_rel,
                    "propagator relative tolerance");
    cmd->add_option("--tol-abs", flags.tol_abs,
                    "propagator absolute tolerance");
  };

  CLI::App* c_classify = app.add_subcommand(
      "classify", "classify the boundary matrix and its locality");
  add_common(c_classify);

  CLI::App* c_eigs =
      app.add_subcommand("eigs", "eigenvalues in the search region (CSV)");
  add_common(c_eigs);

  CLI::App* c_eigfun =
      app.add_subcommand("eigfun", "sample one eigenfunction (CSV)");
  add_common(c_eigfun);
  c_eigfun->add_option("--index", eig_index, "root-function index (sorted)")
      ->required();
  c_eigfun->add_option("--samples", samples, "samples across [a, b]");

  CLI::App* c_green = app.add_subcommand(
      "green", "Green kernel samples and Hilbert-Schmidt norm");
  add_common(c_green);
  c_green->add_option("--lambda-re", lambda_re, "Re lambda")->required();
  c_green->add_option("--lambda-im", lambda_im, "Im lambda");
  c_green->add_option("--grid", grid, "Gauss nodes per interval");

  CLI::App* c_resolve =
      app.add_subcommand("resolve", "apply the resolvent to a forcing (CSV)");
  add_common(c_resolve);
  c_resolve->add_option("--lambda-re", lambda_re, "Re lambda")->required();
  c_resolve->add_option("--lambda-im", lambda_im, "Im lambda");
  c_resolve->add_option("--forcing", forcing_src, "forcing h as an expression")
      ->required();
  c_resolve->add_option("--samples", samples, "samples across [a, b]");

  CLI::App* c_verify =
      app.add_subcommand("verify", "run verification suites (JSON report)");
  add_common(c_verify);
  c_verify->add_option("--suites", suites_csv,
                       "comma-separated subset of "
                       "green_identity,dissipativity,completeness");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ConfigDocument doc = load_config_file(config_path);
    apply_overrides(doc, flags);
    if (c_classify->parsed()) return cmd_classify(doc, flags);
    if (c_eigs->parsed()) return cmd_eigs(doc, flags);
    if (c_eigfun->parsed()) return cmd_eigfun(doc, flags, eig_index, samples);
    if (c_green->parsed())
      return cmd_green(doc, flags, lambda_re, lambda_im, grid);
    if (c_resolve->parsed())
      return cmd_resolve(doc, flags, lambda_re, lambda_im, forcing_src,
                         samples);
    if (c_verify->parsed()) {
      std::vector<std::string> suites;
      std::stringstream ss(suites_csv);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) suites.push_back(item);
      return cmd_verify(doc, flags, suites);
    }
    return 2;
  } catch (const ParseError& e) {
    log_error(e.what());
    return 2;
  } catch (const ConfigError& e) {
    log_error(e.what());
    return 2;
  } catch (const Error& e) {
    log_error(e.what());
    return 3;
  } catch (const std::exception& e) {
    log_error("unexpected failure: ", e.what());
    return 3;
  }
}
