#include "hinfcon.h"

#include <cstring>
#include <exception>
#include <string>

#include "hinfcon/pipeline.hpp"

using namespace hinfcon;

struct hinfcon_problem {
  ProblemConfig cfg;
};

struct hinfcon_gains {
  GainSet gains;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out(char** slot, const std::string& s) {
  if (slot) *slot = dup_string(s);
}

int classify_exception(char** error) {
  try {
    throw;
  } catch (const ConfigError& e) {
    set_out(error, e.what());
    return HINFCON_E_CONFIG;
  } catch (const AssumptionError& e) {
    set_out(error, e.what());
    return HINFCON_E_ASSUMPTION;
  } catch (const MismatchError& e) {
    set_out(error, e.what());
    return HINFCON_E_MISMATCH;
  } catch (const std::invalid_argument& e) {
    set_out(error, e.what());
    return HINFCON_E_ARGUMENT;
  } catch (const std::exception& e) {
    set_out(error, e.what());
    return HINFCON_E_INTERNAL;
  } catch (...) {
    set_out(error, "unknown error");
    return HINFCON_E_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* hinfcon_version(void) { return "1.0.0"; }

const char* hinfcon_status_message(int status) {
  switch (status) {
    case HINFCON_OK: return "ok";
    case HINFCON_E_CONFIG: return "configuration invalid";
    case HINFCON_E_ASSUMPTION: return "structural assumption violated";
    case HINFCON_E_INFEASIBLE: return "no verified feasible point";
    case HINFCON_E_MISMATCH: return "artifact does not match the configuration";
    case HINFCON_E_ARGUMENT: return "invalid argument";
    case HINFCON_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void hinfcon_string_free(char* s) { std::free(s); }

int hinfcon_problem_load_file(const char* path, hinfcon_problem** out,
                              char** error) {
  if (!path || !out) {
    set_out(error, "path and out must be non-null");
    return HINFCON_E_ARGUMENT;
  }
  *out = nullptr;
  try {
    auto* p = new hinfcon_problem{ProblemConfig::from_file(path)};
    *out = p;
    return HINFCON_OK;
  } catch (...) {
    return classify_exception(error);
  }
}

int hinfcon_problem_load_string(const char* json_text, hinfcon_problem** out,
                                char** error) {
  if (!json_text || !out) {
    set_out(error, "json_text and out must be non-null");
    return HINFCON_E_ARGUMENT;
  }
  *out = nullptr;
  try {
    auto* p = new hinfcon_problem{ProblemConfig::from_json_text(json_text)};
    *out = p;
    return HINFCON_OK;
  } catch (...) {
    return classify_exception(error);
  }
}

void hinfcon_problem_free(hinfcon_problem* p) { delete p; }

int hinfcon_validate(const hinfcon_problem* p, char** report_json) {
  if (!p) return HINFCON_E_ARGUMENT;
  try {
    auto violations = p->cfg.validate();
    set_out(report_json, violations_to_json(violations));
    return violations.empty() ? HINFCON_OK : HINFCON_E_CONFIG;
  } catch (...) {
    return classify_exception(report_json);
  }
}

int hinfcon_detect(const hinfcon_problem* p, char** report_json) {
  if (!p) return HINFCON_E_ARGUMENT;
  try {
    DetectOutcome out = run_detect(p->cfg);
    set_out(report_json, out.to_json());
    return out.theorem3.holds_all() ? HINFCON_OK : HINFCON_E_INFEASIBLE;
  } catch (...) {
    return classify_exception(report_json);
  }
}

int hinfcon_synthesize(const hinfcon_problem* p, const char* mode,
                       char** gains_json, char** summary_json,
                       char** solver_log_csv) {
  if (!p || !mode) return HINFCON_E_ARGUMENT;
  SynthesisMode m;
  if (std::strcmp(mode, "local") == 0) {
    m = SynthesisMode::LocalTheorem2;
  } else if (std::strcmp(mode, "global") == 0) {
    m = SynthesisMode::GlobalCorollary1;
  } else {
    set_out(summary_json, "mode must be 'local' or 'global'");
    return HINFCON_E_ARGUMENT;
  }
  try {
    SynthesisOutcome out = run_synthesis(p->cfg, m);
    set_out(solver_log_csv, out.report.residual_csv());
    set_out(summary_json, out.summary_json());
    if (!out.report.feasible()) return HINFCON_E_INFEASIBLE;
    set_out(gains_json, out.gains_json());
    return HINFCON_OK;
  } catch (...) {
    return classify_exception(summary_json);
  }
}

int hinfcon_gains_load_string(const char* json_text, hinfcon_gains** out,
                              char** error) {
  if (!json_text || !out) return HINFCON_E_ARGUMENT;
  *out = nullptr;
  try {
    auto* g = new hinfcon_gains{gains_from_json(json_text)};
    *out = g;
    return HINFCON_OK;
  } catch (...) {
    int code = classify_exception(error);
    return code == HINFCON_E_INTERNAL ? HINFCON_E_MISMATCH : code;
  }
}

void hinfcon_gains_free(hinfcon_gains* g) { delete g; }

int hinfcon_simulate(const hinfcon_problem* p, const hinfcon_gains* g,
                     char** metrics_json, char** trajectory_csv) {
  if (!p || !g) return HINFCON_E_ARGUMENT;
  try {
    SimulateOutcome out = run_simulation(p->cfg, g->gains);
    set_out(metrics_json, out.metrics_json);
    set_out(trajectory_csv, out.trajectory_csv);
    return HINFCON_OK;
  } catch (...) {
    return classify_exception(metrics_json);
  }
}

int hinfcon_gamma_search(const hinfcon_problem* p, double lo, double hi,
                         int steps, const char* mode, char** csv) {
  if (!p || !mode) return HINFCON_E_ARGUMENT;
  SynthesisMode m;
  if (std::strcmp(mode, "local") == 0) {
    m = SynthesisMode::LocalTheorem2;
  } else if (std::strcmp(mode, "global") == 0) {
    m = SynthesisMode::GlobalCorollary1;
  } else {
    set_out(csv, "mode must be 'local' or 'global'");
    return HINFCON_E_ARGUMENT;
  }
  try {
    set_out(csv, run_gamma_search(p->cfg, lo, hi, steps, m));
    return HINFCON_OK;
  } catch (...) {
    return classify_exception(csv);
  }
}

}  // extern "C"
