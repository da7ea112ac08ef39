#pragma once

// Command-line front end. run() parses argv, builds the effective config
// (file, then convenience flags, then --set overrides), runs one subcommand
// and maps library errors onto exit codes.

#include "besov/config.hpp"
#include "besov/parallel.hpp"
#include "besov/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace besov::cli {

namespace fs = std::filesystem;
using report::json;

/// Writes payload files under the output directory and records them in a
/// sidecar <command>.meta.json, the only place a timestamp appears.
class Emitter {
 public:
  Emitter(std::string command, const config::RunConfig& cfg, std::vector<std::string> argv)
      : command_(std::move(command)), cfg_(cfg), argv_(std::move(argv)), dir_(cfg.output_dir) {}

  const fs::path& dir() const { return dir_; }

  fs::path write(const std::string& name, const std::string& text) {
    if (dir_.empty()) return {};
    fs::create_directories(dir_);
    fs::path p = dir_ / name;
    write_file(p, text);
    files_.push_back(name);
    return p;
  }

  void write_to(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_file(p, text);
    files_.push_back(p.string());
  }

  void finish() {
    if (dir_.empty() || files_.empty()) return;
    json meta;
    meta["command"] = command_;
    meta["created_utc"] = utc_now();
    meta["threads"] = thread_cap();
    meta["argv"] = argv_;
    meta["files"] = files_;
    meta["config"] = json::parse(cfg_.document.dump());
    write_file(dir_ / (command_ + ".meta.json"), report::dump(meta));
  }

 private:
  static void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw InvalidArgument("cannot write " + p.string());
    os << text;
  }

  static std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
  }

  std::string command_;
  const config::RunConfig& cfg_;
  std::vector<std::string> argv_;
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// ---------------------------------------------------------------------------
// Commands. Each returns an exit code; errors propagate as exceptions.

inline int cmd_analyze_mollifier(const config::RunConfig& cfg, Emitter& em, Streams io) {
  MollifierSpec rho = cfg.kernel_spec();
  GridSpec quad = cfg.grid.explicit_ && cfg.grid.dim == rho.dim() ? cfg.grid.spec() : besov::detail::moment_grid(rho);
  MomentReport rep = analyze_moments(rho, quad, cfg.k_max, cfg.fractional_orders);
  AdmissibilityVerdict v = classify_admissibility(rho, rep);
  std::string text = report::dump(report::to_json(rho, rep, v));
  em.write("analyze_mollifier.json", text);
  io.out << text;
  return 0;
}

/// Smallest scale whose kernel still spans one grid cell.
inline void check_epsilon_resolution(const MollifierSpec& rho, const GridSpec& spec, const EpsilonGrid& eg) {
  double width = 0.0;
  for (const auto& [lo, hi] : rho.support()) width = std::max(width, hi - lo);
  const double eps = std::ldexp(1.0, -eg.j_max);
  if (eps * width < spec.spacing())
    throw ResolutionError("epsilon grid reaches 2^-" + std::to_string(eg.j_max) + ", where kernel '" + rho.id() +
                          "' (width " + report::csv_number(width) + ") is narrower than the grid spacing " +
                          report::csv_number(spec.spacing()) + "; lower epsilon_grid.j_max or refine the grid");
}

inline int cmd_besov_norm(const config::RunConfig& cfg, Emitter& em, Streams io) {
  MollifierSpec rho = cfg.kernel_spec();
  auto [fid, f] = cfg.function_on_grid(cfg.function);
  const BesovParams& par = cfg.besov;
  check_epsilon_resolution(rho, f.spec(), cfg.epsilon_grid);

  json warnings = json::array();
  MomentOrder k0 = smallest_nonzero_moment(rho, cfg.k_max);
  if (!k0.infinite && par.s >= static_cast<double>(k0.k)) {
    std::string w = "s=" + report::csv_number(par.s) + " >= k0=" + k0.str() + " for kernel '" + rho.id() +
                    "': the rate functional does not characterize B^s here";
    io.err << "warning: " << w << '\n';
    warnings.push_back(w);
  }

  FilterBank bank = build_filter_bank(f.spec(), cfg.delta_in, cfg.delta_out, cfg.levels);
  NormResult lp = besov_norm(f, bank, par);
  FunctionalResult mf = mollifier_functional(f, rho, par, cfg.epsilon_grid, cfg.route);
  if (!lp.seminorm.converged) warnings.push_back("Littlewood-Paley sum not converged at the top level");
  if (!mf.converged()) warnings.push_back("rate functional not converged at the smallest epsilon");

  json out;
  out["kernel_id"] = rho.id();
  out["function_id"] = fid;
  out["s"] = par.s;
  out["p"] = report::exponent(par.p);
  out["q"] = report::exponent(par.q);
  out["k0"] = report::moment_order(k0);
  out["lp_besov_norm"] = lp.value;
  out["mollifier_functional_norm"] = mf.norm;
  out["ratio"] = mf.norm > 0.0 ? json(lp.value / mf.norm) : json(nullptr);
  out["truncation_diagnostics"] = {{"lp_levels", bank.levels()},
                                   {"lp_last_term_share", lp.seminorm.last_term_share},
                                   {"lp_converged", lp.seminorm.converged},
                                   {"epsilon_j_max", cfg.epsilon_grid.j_max},
                                   {"epsilon_m", cfg.epsilon_grid.m},
                                   {"functional_tail_share", mf.tail_share},
                                   {"functional_converged", mf.converged()}};
  out["warnings"] = warnings;
  std::string text = report::dump(out);
  em.write("besov_norm.json", text);
  io.out << text;
  return 0;
}

inline int cmd_rate_profile(const config::RunConfig& cfg, const std::string& from_profile, Emitter& em, Streams io) {
  json out;
  RateProfile prof;
  if (!from_profile.empty()) {
    std::ifstream is(from_profile);
    if (!is) throw InvalidArgument("cannot open " + from_profile);
    prof = report::read_profile_csv(is);
    out["source"] = "profile";
  } else {
    MollifierSpec rho = cfg.kernel_spec();
    auto [fid, f] = cfg.function_on_grid(cfg.function);
    prof = rate_profile(f, rho, cfg.profile_p, cfg.epsilon_grid, fid, cfg.route);
    out["source"] = "computed";
    out["kernel_id"] = rho.id();
    out["function_id"] = fid;
    out["p"] = report::exponent(cfg.profile_p);
    out["predicted_k0"] = report::moment_order(smallest_nonzero_moment(rho, cfg.k_max));
  }
  PowerLawFit fit = decay_exponent(prof, cfg.fit);
  out["slope"] = fit.slope;
  out["fit"] = report::to_json(fit);
  out["fit_range"] = json::array({cfg.fit.lo, cfg.fit.hi});
  std::ostringstream csv;
  report::write_profile_csv(csv, prof);
  if (from_profile.empty() && !em.dir().empty()) out["profile_csv"] = "rate_profile.csv";
  std::string text = report::dump(out);
  if (from_profile.empty()) em.write("rate_profile.csv", csv.str());
  em.write(from_profile.empty() ? "rate_profile.json" : "rate_profile_refit.json", text);
  io.out << text;
  return 0;
}

inline int cmd_eta_test(const config::RunConfig& cfg, Emitter& em, Streams io) {
  MollifierSpec rho = cfg.kernel_spec();
  auto [fid, eta] = cfg.function_on_grid(cfg.function);
  EtaTestReport r = eta_test(rho, eta, cfg.besov.s, cfg.eta_levels, cfg.eta_samples, cfg.route);
  json out;
  out["kernel_id"] = rho.id();
  out["function_id"] = fid;
  out["levels"] = cfg.eta_levels;
  json body = report::to_json(r);
  for (const auto& [k, v] : body.items()) out[k] = v;
  std::string text = report::dump(out);
  em.write("eta_test.json", text);
  io.out << text;
  return 0;
}

inline int cmd_keylem(const config::RunConfig& cfg, Emitter& em, Streams io) {
  MollifierSpec rho = cfg.kernel_spec();
  auto [pid, psi] = cfg.function_on_grid(cfg.psi);
  KeylemDiagnostic d = keylem_diagnostic(rho, psi, cfg.epsilon_grid);
  json out;
  out["kernel_id"] = rho.id();
  out["psi_id"] = pid;
  json body = report::to_json(d);
  for (const auto& [k, v] : body.items()) out[k] = v;
  const double first = d.entries.front().second, last = d.entries.back().second;
  out["final_over_initial"] = first > 0.0 ? json(last / first) : json(nullptr);
  std::ostringstream csv;
  csv << "epsilon,l1_norm\n";
  for (const auto& [e, v] : d.entries) csv << report::csv_number(e) << ',' << report::csv_number(v) << '\n';
  em.write("keylem.csv", csv.str());
  std::string text = report::dump(out);
  em.write("keylem.json", text);
  io.out << text;
  return 0;
}

inline int cmd_verify(const config::RunConfig& cfg, Emitter& em, Streams io) {
  verify::SuiteResult r = verify::run_suite(cfg.verify);
  for (const auto& c : r.checks)
    io.out << (c.passed ? "PASS " : "FAIL ") << c.group << '.' << c.name << "  " << c.detail << '\n';
  io.out << r.checks.size() - r.failures() << '/' << r.checks.size() << " checks passed\n";

  std::ostringstream summary;
  report::write_summary_csv(summary, r.summary);
  em.write("verify_summary.csv", summary.str());
  json reports;
  reports["taylor"] = json::array();
  for (const auto& t : r.taylor) reports["taylor"].push_back(report::to_json(t));
  reports["one_sided"] = json::array();
  for (const auto& o : r.one_sided) reports["one_sided"].push_back(report::to_json(o));
  reports["equivalence"] = json::array();
  for (const auto& e : r.equivalence) reports["equivalence"].push_back(report::to_json(e));
  em.write("verify_reports.json", report::dump(reports));
  std::ostringstream xml;
  report::write_junit(xml, r);
  if (!cfg.junit.empty())
    em.write_to(cfg.junit, xml.str());
  else
    em.write("verify_junit.xml", xml.str());

  if (r.checks.empty()) {
    io.err << "error: filter '" << cfg.verify.filter << "' selected no checks\n";
    return static_cast<int>(ExitCode::config_error);
  }
  for (const auto& c : r.checks)
    if (!c.passed) io.err << "failed: " << c.group << '.' << c.name << ": " << c.detail << '\n';
  return r.passed() ? 0 : static_cast<int>(ExitCode::verification_failure);
}

// ---------------------------------------------------------------------------

namespace detail {

/// A descriptor flag: inline JSON or a path (made absolute against the cwd).
inline config::json descriptor_arg(const std::string& v, bool function) {
  auto first = v.find_first_not_of(" \t");
  if (first != std::string::npos && v[first] == '{') return config::parse_json_text(v, "command-line descriptor");
  std::string abs = fs::absolute(v).string();
  if (function) return {{"kind", "file"}, {"path", abs}};
  return abs;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Besov norms by Littlewood-Paley and mollifier rate functionals", "besov"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, kernel_arg, function_arg, junit;
  std::vector<std::string> sets;
  std::optional<double> extent;
  bool out_given = false;
  app.add_option("-c,--config", config_path, "JSON run configuration");
  app.add_option("--set", sets, "override a leaf, e.g. besov.s=1.5 (repeatable)")->allow_extra_args(false);
  app.add_option("-o,--out", out_dir, "output directory (default besov_out; empty disables files)");
  app.add_option("--kernel", kernel_arg, "kernel descriptor (inline JSON or file)");
  app.add_option("--function", function_arg, "function descriptor (inline JSON, BGF1 or CSV file)");
  app.add_option("--extent", extent, "half-width L for CSV function input");

  auto* analyze = app.add_subcommand("analyze-mollifier", "moments, k0 and admissibility of a kernel");
  auto* norm = app.add_subcommand("besov-norm", "Littlewood-Paley and rate-functional norms of a function");
  auto* profile = app.add_subcommand("rate-profile", "deviation profile and fitted decay slope");
  std::string from_profile;
  profile->add_option("--from-profile", from_profile, "refit a saved epsilon,deviation CSV");
  auto* eta = app.add_subcommand("eta-test", "single test function admissibility criterion");
  auto* keylem = app.add_subcommand("keylem", "decay of ||rho * psi_eps||_1 for mean-zero psi");
  auto* ver = app.add_subcommand("verify", "run the built-in property suite");
  std::string filter;
  bool inject = false;
  ver->add_option("--filter", filter, "run only checks whose group or name contains this");
  ver->add_flag("--inject-broken-kernel", inject, "add a kernel of mass 0.9 to the battery");
  ver->add_option("--junit", junit, "JUnit XML path (default <out>/verify_junit.xml)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::config_error);
  }
  out_given = app.count("--out") > 0;

  std::vector<std::string> args(argv, argv + argc);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    config::json doc = config::json::object();
    fs::path base;
    if (!config_path.empty()) {
      doc = config::read_json_file(config_path);
      base = fs::absolute(config_path).parent_path();
    }
    if (!kernel_arg.empty()) doc["kernel"] = detail::descriptor_arg(kernel_arg, false);
    if (!function_arg.empty()) doc["function"] = detail::descriptor_arg(function_arg, true);
    if (extent) {
      if (!doc.contains("function") || !doc["function"].is_object())
        throw InvalidArgument("--extent applies to a function file");
      doc["function"]["extent"] = *extent;
    }
    if (out_given) doc["output"]["dir"] = out_dir;
    if (!filter.empty()) doc["verify"]["filter"] = filter;
    if (inject) doc["verify"]["inject_broken_kernel"] = true;
    if (!junit.empty()) doc["verify"]["junit"] = fs::absolute(junit).string();
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + s + "'");
      config::set_path(doc, s.substr(0, eq), s.substr(eq + 1));
    }
    config::RunConfig cfg = config::parse_run_config(doc, base);

    Emitter em(command, cfg, args);
    Streams io{out, err};
    int code = 0;
    if (*analyze) code = cmd_analyze_mollifier(cfg, em, io);
    else if (*norm) code = cmd_besov_norm(cfg, em, io);
    else if (*profile) code = cmd_rate_profile(cfg, from_profile, em, io);
    else if (*eta) code = cmd_eta_test(cfg, em, io);
    else if (*keylem) code = cmd_keylem(cfg, em, io);
    else if (*ver) code = cmd_verify(cfg, em, io);
    em.finish();
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const config::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::config_error);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::config_error);
  }
}

}  // namespace besov::cli
