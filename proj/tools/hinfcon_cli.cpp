// Command-line front end. Talks to the library exclusively through the C API
// in hinfcon.h; every subcommand maps onto one API call and writes the
// returned JSON/CSV artifacts to files or stdout.
//
// Exit codes: 0 ok, 1 config invalid, 2 assumption violated,
// 3 infeasible / iteration limit, 4 artifact mismatch, 64 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "hinfcon.h"

namespace {

constexpr int kUsageError = 64;

struct CString {
  char* ptr = nullptr;
  ~CString() { hinfcon_string_free(ptr); }
  char** slot() { return &ptr; }
  bool has() const { return ptr != nullptr; }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct Problem {
  hinfcon_problem* handle = nullptr;
  ~Problem() { hinfcon_problem_free(handle); }
};

struct Gains {
  hinfcon_gains* handle = nullptr;
  ~Gains() { hinfcon_gains_free(handle); }
};

int load_problem(const std::string& path, Problem& problem) {
  CString error;
  int rc = hinfcon_problem_load_file(path.c_str(), &problem.handle, error.slot());
  if (rc != HINFCON_OK) {
    std::cerr << "error: " << hinfcon_status_message(rc);
    if (error.has()) std::cerr << ": " << error.str();
    std::cerr << "\n";
  }
  return rc;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  out << content;
  return true;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed H-infinity consensus observer toolkit"};
  app.require_subcommand(1);

  std::string config_path, gains_path, out_prefix = "hinfcon_out";
  std::string mode = "local";
  double lo = 0.1, hi = 2.0;
  int steps = 8;

  auto* validate = app.add_subcommand(
      "validate", "Parse a config and report structural violations");
  validate->add_option("config", config_path, "problem config (JSON)")->required();

  auto* detect = app.add_subcommand(
      "detect", "Run the graph-detectability necessary-condition tests");
  detect->add_option("config", config_path)->required();

  auto* synth = app.add_subcommand(
      "synthesize", "Solve the synthesis LMIs and write the observer gains");
  synth->add_option("config", config_path)->required();
  synth->add_option("--mode", mode, "'local' or 'global'")
      ->check(CLI::IsMember({"local", "global"}));
  std::string gains_out = "gains.json";
  synth->add_option("--out", gains_out, "gains output path");
  std::string log_out;
  synth->add_option("--log", log_out, "solver residual-history CSV path");

  auto* sim = app.add_subcommand(
      "simulate", "Run the closed loop and write trajectory/metric artifacts");
  sim->add_option("config", config_path)->required();
  sim->add_option("gains", gains_path, "gains JSON from synthesize")->required();
  sim->add_option("--out", out_prefix, "output prefix for _traj.csv/_metrics.json");

  auto* gamma = app.add_subcommand(
      "gamma-search", "Locate the gamma^2 feasibility frontier");
  gamma->add_option("config", config_path)->required();
  gamma->add_option("--lo", lo, "lower end of the gamma^2 range");
  gamma->add_option("--hi", hi, "upper end of the gamma^2 range");
  gamma->add_option("--steps", steps, "grid points before refinement");
  gamma->add_option("--mode", mode, "'local' or 'global'")
      ->check(CLI::IsMember({"local", "global"}));
  std::string gamma_out;
  gamma->add_option("--out", gamma_out, "frontier CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  Problem problem;

  if (validate->parsed()) {
    CString report;
    int load_rc = hinfcon_problem_load_file(config_path.c_str(),
                                            &problem.handle, report.slot());
    if (load_rc != HINFCON_OK) {
      std::cerr << "error: " << hinfcon_status_message(load_rc);
      if (report.has()) std::cerr << ": " << report.str();
      std::cerr << "\n";
      return load_rc;
    }
    CString report2;
    int rc = hinfcon_validate(problem.handle, report2.slot());
    std::cout << report2.str() << "\n";
    return rc;
  }

  if (detect->parsed()) {
    if (int rc = load_problem(config_path, problem); rc != HINFCON_OK) return rc;
    CString report;
    int rc = hinfcon_detect(problem.handle, report.slot());
    std::cout << report.str() << "\n";
    return rc;
  }

  if (synth->parsed()) {
    if (int rc = load_problem(config_path, problem); rc != HINFCON_OK) return rc;
    CString gains_json, summary, log_csv;
    int rc = hinfcon_synthesize(problem.handle, mode.c_str(), gains_json.slot(),
                                summary.slot(), log_csv.slot());
    if (!log_out.empty() && log_csv.has()) write_file(log_out, log_csv.str());
    std::cout << summary.str() << "\n";
    if (rc != HINFCON_OK) {
      std::cerr << "error: " << hinfcon_status_message(rc) << "\n";
      return rc;
    }
    if (!write_file(gains_out, gains_json.str())) return HINFCON_E_INTERNAL;
    std::cerr << "gains written to " << gains_out << "\n";
    return 0;
  }

  if (sim->parsed()) {
    if (int rc = load_problem(config_path, problem); rc != HINFCON_OK) return rc;
    std::string gains_text = read_file(gains_path);
    if (gains_text.empty()) {
      std::cerr << "error: cannot read gains file " << gains_path << "\n";
      return HINFCON_E_MISMATCH;
    }
    Gains gains;
    CString error;
    int rc = hinfcon_gains_load_string(gains_text.c_str(), &gains.handle,
                                       error.slot());
    if (rc != HINFCON_OK) {
      std::cerr << "error: " << hinfcon_status_message(rc);
      if (error.has()) std::cerr << ": " << error.str();
      std::cerr << "\n";
      return rc;
    }
    CString metrics, traj;
    rc = hinfcon_simulate(problem.handle, gains.handle, metrics.slot(),
                          traj.slot());
    if (rc != HINFCON_OK) {
      std::cerr << "error: " << hinfcon_status_message(rc);
      if (metrics.has()) std::cerr << ": " << metrics.str();
      std::cerr << "\n";
      return rc;
    }
    if (!write_file(out_prefix + "_traj.csv", traj.str()))
      return HINFCON_E_INTERNAL;
    if (!write_file(out_prefix + "_metrics.json", metrics.str()))
      return HINFCON_E_INTERNAL;
    std::cout << metrics.str() << "\n";
    return 0;
  }

  if (gamma->parsed()) {
    if (!(lo < hi)) {
      std::cerr << "usage error: need --lo < --hi\n";
      return kUsageError;
    }
    if (int rc = load_problem(config_path, problem); rc != HINFCON_OK) return rc;
    CString csv;
    int rc = hinfcon_gamma_search(problem.handle, lo, hi, steps, mode.c_str(),
                                  csv.slot());
    if (rc != HINFCON_OK) {
      std::cerr << "error: " << hinfcon_status_message(rc);
      if (csv.has()) std::cerr << ": " << csv.str();
      std::cerr << "\n";
      return rc;
    }
    if (gamma_out.empty()) {
      std::cout << csv.str();
    } else if (!write_file(gamma_out, csv.str())) {
      return HINFCON_E_INTERNAL;
    }
    return 0;
  }

  return kUsageError;
}
