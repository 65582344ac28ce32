// sparselab command-line driver.
//
// Exit codes: 0 success, 1 parse/IO error, 2 invalid input or failed check,
// 3 simulator protocol violation.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sparselab/analysis.hpp"
#include "sparselab/formats.hpp"
#include "sparselab/io.hpp"
#include "sparselab/pipeline_sim.hpp"
#include "sparselab/spmm.hpp"

using namespace sparselab;
using nlohmann::json;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitProtocol = 3;

constexpr index_t kBcsrBCol = 64;
constexpr index_t kWcsrBCol = 8;
constexpr double kSpmmTolerance = 1e-10;
constexpr index_t kDenseOracleLimit = index_t{1} << 26;

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  index_t b_row = 64;
  std::optional<index_t> b_col;
  index_t n = 64;
  index_t task_size = kDefaultTaskSize;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(c.out, text);
  }
}

void emit_json(const Common& c, const json& j) { emit(c, j.dump(2) + "\n"); }

std::string key_value_csv(const json& j, const std::string& prefix = "") {
  std::string out;
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      out += key_value_csv(v, key);
    } else if (!v.is_array()) {
      out += key + "," + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    }
  }
  return out;
}

void add_common(CLI::App* cmd, Common& c, bool matrix_opts) {
  if (matrix_opts) {
    cmd->add_option("--b-row", c.b_row, "Block / window height")->check(CLI::PositiveNumber);
    cmd->add_option("--b-col", c.b_col, "Block width (BCSR, default 64) or padding multiple (WCSR, default 8)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--task-size", c.task_size, "WCSR packed columns per task")->check(CLI::PositiveNumber);
  }
  cmd->add_option("--n", c.n, "Dense operand width N")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", c.out, "Output file (default: standard output)");
}

// -- commands -------------------------------------------------------------------

void run_convert(const Common& c, const std::string& input, const std::string& to) {
  const CsrMatrix a = read_matrix_market(input);
  json j = report_envelope("convert", c.seed);
  j["input"] = input;
  if (to == "bcsr") {
    const BcsrMatrix b = bcsr_from_csr(a, c.b_row, c.b_col.value_or(kBcsrBCol));
    j["bcsr"] = {{"m", b.m()},
                 {"k", b.k()},
                 {"b_row", b.b_row()},
                 {"b_col", b.b_col()},
                 {"nnz_original", b.nnz_original()},
                 {"block_row_ptr", std::vector<index_t>(b.block_row_ptr().begin(), b.block_row_ptr().end())},
                 {"block_col_idx", std::vector<index_t>(b.block_col_idx().begin(), b.block_col_idx().end())},
                 {"blocks", std::vector<double>(b.blocks().begin(), b.blocks().end())}};
    j["fill_ratio"] = b.nnz_blocks() > 0 ? json(fill_ratio(b)) : json(nullptr);
  } else {
    const WcsrMatrix w = wcsr_from_csr(a, c.b_row, c.b_col.value_or(kWcsrBCol));
    j["wcsr"] = {{"m", w.m()},
                 {"k", w.k()},
                 {"b_row", w.b_row()},
                 {"b_col", w.b_col()},
                 {"nnz_original", w.nnz_original()},
                 {"window_row_ptr", std::vector<index_t>(w.window_row_ptr().begin(), w.window_row_ptr().end())},
                 {"window_col_idx", std::vector<index_t>(w.window_col_idx().begin(), w.window_col_idx().end())},
                 {"values", std::vector<double>(w.values().begin(), w.values().end())}};
    j["padding_ratio"] = w.padded_nnz_cols() > 0 ? json(wcsr_padding_ratio(w)) : json(nullptr);
  }
  if (c.format == "csv") {
    emit(c, key_value_csv(j));
  } else {
    emit_json(c, j);
  }
}

void run_stats(const Common& c, const std::string& input) {
  const CsrMatrix a = read_matrix_market(input);
  json j = report_envelope("stats", c.seed);
  j["input"] = input;
  j["stats"] = matrix_stats_json(a, c.b_row, c.b_col.value_or(kBcsrBCol), c.b_col.value_or(kWcsrBCol));
  if (c.format == "csv") {
    emit(c, key_value_csv(j));
  } else {
    emit_json(c, j);
  }
}

void run_reorder(const Common& c, const std::string& input, const std::string& matrix_out) {
  const CsrMatrix a = read_matrix_market(input);
  const Permutation p = rcm_permutation(a);
  const CsrMatrix r = apply_permutation(a, p, PermuteAxes::both);
  if (!matrix_out.empty()) write_text_file(matrix_out, write_matrix_market(r));
  json j = report_envelope("reorder", c.seed);
  j["input"] = input;
  j["bandwidth_before"] = bandwidth(a);
  j["bandwidth_after"] = bandwidth(r);
  j["permutation"] = std::vector<index_t>(p.order().begin(), p.order().end());
  if (c.format == "csv") {
    std::string out = "old_index,new_index\n";
    for (index_t i = 0; i < p.size(); ++i) out += std::to_string(i) + "," + std::to_string(p(i)) + "\n";
    emit(c, out);
  } else {
    emit_json(c, j);
  }
}

void run_spmm_check(const Common& c, const std::string& input) {
  const CsrMatrix a = read_matrix_market(input);
  const DenseMatrix b = random_dense(a.n_cols(), c.n, c.seed);
  const bool dense_ok = a.n_rows() * a.n_cols() <= kDenseOracleLimit;
  const DenseMatrix ref = dense_ok ? dense_oracle_spmm(a.to_dense(), b) : csr_spmm(a, b, Exec::serial);

  const BcsrMatrix bc = bcsr_from_csr(a, c.b_row, c.b_col.value_or(kBcsrBCol));
  const WcsrMatrix wc = wcsr_from_csr(a, c.b_row, c.b_col.value_or(kWcsrBCol));
  const index_t bn = std::min<index_t>(c.n, 128);

  json rows = json::array();
  double worst = 0.0;
  auto check = [&](const std::string& name, const DenseMatrix& got) {
    const double rel = relative_frobenius_error(got, ref);
    worst = std::max(worst, rel);
    rows.push_back({{"executor", name}, {"relative_error", rel}, {"max_abs_error", max_abs_error(got, ref)}});
  };
  for (const Exec e : {Exec::serial, Exec::parallel}) {
    const std::string tag = e == Exec::serial ? "serial" : "parallel";
    check("csr/" + tag, csr_spmm(a, b, e));
    check("bcsr/" + tag, bcsr_spmm(bc, b, bn, e));
    check("wcsr/" + tag, wcsr_spmm(wc, b, c.task_size, e));
  }

  json j = report_envelope("spmm-check", c.seed);
  j["input"] = input;
  j["n"] = c.n;
  j["reference"] = dense_ok ? "dense" : "csr";
  j["tolerance"] = kSpmmTolerance;
  j["max_relative_error"] = worst;
  j["results"] = rows;
  j["pass"] = worst <= kSpmmTolerance;
  if (c.format == "csv") {
    std::string out = "executor,relative_error,max_abs_error\n";
    for (const auto& r : rows) {
      out += r["executor"].get<std::string>() + "," + r["relative_error"].dump() + "," + r["max_abs_error"].dump() + "\n";
    }
    emit(c, out);
  } else {
    emit_json(c, j);
  }
  if (worst > kSpmmTolerance) throw CheckFailed("executor error above tolerance");
}

WorkloadModel load_workload(const Common& c, const std::string& matrix, const std::string& workload,
                            index_t consumers) {
  if (!matrix.empty() == !workload.empty()) {
    throw std::invalid_argument("give exactly one of --matrix or --workload");
  }
  if (!workload.empty()) {
    json j;
    try {
      j = json::parse(read_text_file(workload));
    } catch (const json::parse_error& e) {
      throw ParseError(0, std::string("workload JSON: ") + e.what());
    }
    return workload_from_json(j);
  }
  const CsrMatrix a = read_matrix_market(matrix);
  const BcsrMatrix b = bcsr_from_csr(a, c.b_row, c.b_col.value_or(kBcsrBCol));
  return workload_from_bcsr(b, c.n, {select_wgmma_n(c.n, consumers), consumers});
}

struct SimOptions {
  std::string matrix;
  std::string workload;
  std::string config;
  std::string trace;
  std::string mode;
  std::string scheduler;
  std::optional<index_t> stages, consumers, cluster_n, group_m, n_sm;
  std::optional<cycles_t> load, compute, store;
};

PipelineConfig resolve_config(const SimOptions& o) {
  PipelineConfig cfg;
  if (!o.config.empty()) {
    try {
      cfg = pipeline_config_from_json(json::parse(read_text_file(o.config)));
    } catch (const json::parse_error& e) {
      throw ParseError(0, std::string("config JSON: ") + e.what());
    }
  }
  if (!o.mode.empty()) cfg.mode = *parse_pipeline_mode(o.mode);
  if (!o.scheduler.empty()) cfg.scheduler = *parse_scheduler(o.scheduler);
  if (o.stages) cfg.num_stages = *o.stages;
  if (o.consumers) cfg.num_consumers = *o.consumers;
  if (o.cluster_n) cfg.cluster_n = *o.cluster_n;
  if (o.group_m) cfg.group_m = *o.group_m;
  if (o.n_sm) cfg.n_sm = *o.n_sm;
  if (o.load) cfg.load_latency = *o.load;
  if (o.compute) cfg.compute_latency = *o.compute;
  if (o.store) cfg.store_latency = *o.store;
  cfg.validate();
  return cfg;
}

void run_simulate(const Common& c, const SimOptions& o) {
  PipelineConfig cfg = resolve_config(o);
  cfg.record_trace = true;
  const WorkloadModel w = load_workload(c, o.matrix, o.workload, cfg.num_consumers);
  SimResult r;
  try {
    r = simulate(w, cfg);
  } catch (const ProtocolDeadlock& e) {
    throw ProtocolViolation(e.what());
  }
  const auto violation = validate_trace(r, cfg);
  if (!o.trace.empty()) write_text_file(o.trace, trace_csv(r.trace));

  json j = report_envelope("simulate", c.seed);
  j["config"] = pipeline_config_json(cfg);
  j["tiles"] = w.tiles.size();
  j["result"] = sim_result_json(r);
  j["protocol"] = violation ? json{{"ok", false}, {"rule", std::string(1, violation->rule)},
                                   {"event_index", violation->event_index}, {"detail", violation->detail}}
                            : json{{"ok", true}};
  if (c.format == "csv") {
    emit(c, sim_result_csv(r));
  } else {
    emit_json(c, j);
  }
  if (violation) throw ProtocolViolation(violation->detail);
}

void run_sweep(const Common& c, index_t consumers) {
  const auto rows = sweep_wgmma_n(c.n, consumers);
  if (c.format == "csv") {
    emit(c, padding_csv(rows));
    return;
  }
  json j = report_envelope("sweep", c.seed);
  j["n"] = c.n;
  j["num_consumers"] = consumers;
  j["selected_wgmma_n"] = select_wgmma_n(c.n, consumers);
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(padding_json(r));
  j["rows"] = arr;
  emit_json(c, j);
}

void run_ablate(const Common& c, const std::string& matrix, const std::string& workload, std::optional<index_t> n_sm) {
  AblationOptions opt;
  opt.base.record_trace = false;
  if (n_sm) opt.base.n_sm = *n_sm;
  const WorkloadModel w = load_workload(c, matrix, workload, opt.base.num_consumers);
  AblationReport r;
  try {
    r = ablation_suite(w, opt);
  } catch (const ProtocolDeadlock& e) {
    throw ProtocolViolation(e.what());
  }
  if (c.format == "csv") {
    emit(c, ablation_csv(r));
    return;
  }
  json j = report_envelope("ablate", c.seed);
  j["tiles"] = w.tiles.size();
  j.update(ablation_json(r));
  emit_json(c, j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse format, SpMM reference and pipeline simulation toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string input;
  std::string to = "bcsr";
  std::string reorder_out;
  index_t consumers = 2;
  SimOptions sim;
  std::string ab_matrix, ab_workload;
  std::optional<index_t> ab_sms;

  auto* convert = app.add_subcommand("convert", "Convert a Matrix Market file to BCSR or WCSR");
  convert->add_option("input", input, "Matrix Market file")->required();
  convert->add_option("--to", to, "Target format")->check(CLI::IsMember({"bcsr", "wcsr"}));
  add_common(convert, common, true);

  auto* stats = app.add_subcommand("stats", "Fill ratio, padding ratio, bandwidth, window histogram");
  stats->add_option("input", input, "Matrix Market file")->required();
  add_common(stats, common, true);

  Common reorder_common;
  auto* reorder = app.add_subcommand("reorder", "Reverse Cuthill-McKee reordering");
  reorder->add_option("input", input, "Matrix Market file")->required();
  reorder->add_option("--matrix-out", reorder_out, "Write the reordered matrix here");
  add_common(reorder, reorder_common, false);

  auto* check = app.add_subcommand("spmm-check", "Run every executor against the dense oracle");
  check->add_option("input", input, "Matrix Market file")->required();
  add_common(check, common, true);

  auto* simcmd = app.add_subcommand("simulate", "Simulate the load/compute pipeline");
  simcmd->add_option("--matrix", sim.matrix, "Matrix Market file (tiles from its BCSR form)");
  simcmd->add_option("--workload", sim.workload, "Workload JSON {\"tiles\": [[m, n, blocks], ...]}");
  simcmd->add_option("--config", sim.config, "Pipeline config JSON");
  simcmd->add_option("--trace", sim.trace, "Write the event trace CSV here");
  simcmd->add_option("--mode", sim.mode)->check(CLI::IsMember({"synchronous", "pipelined", "warp_specialized"}));
  simcmd->add_option("--scheduler", sim.scheduler)
      ->check(CLI::IsMember({"static_nonpersistent", "persistent_static", "dynamic_counter"}));
  simcmd->add_option("--stages", sim.stages);
  simcmd->add_option("--consumers", sim.consumers);
  simcmd->add_option("--cluster", sim.cluster_n);
  simcmd->add_option("--group-m", sim.group_m);
  simcmd->add_option("--sms", sim.n_sm);
  simcmd->add_option("--load", sim.load);
  simcmd->add_option("--compute", sim.compute);
  simcmd->add_option("--store", sim.store);
  add_common(simcmd, common, true);

  auto* sweep = app.add_subcommand("sweep", "Padding waste for WGMMA_N = 8..256");
  sweep->add_option("--consumers", consumers)->check(CLI::PositiveNumber);
  add_common(sweep, common, false);

  auto* ablate = app.add_subcommand("ablate", "opt0..opt7 ablation on a workload");
  ablate->add_option("--matrix", ab_matrix, "Matrix Market file");
  ablate->add_option("--workload", ab_workload, "Workload JSON");
  ablate->add_option("--sms", ab_sms);
  add_common(ablate, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*convert) run_convert(common, input, to);
    if (*stats) run_stats(common, input);
    if (*reorder) run_reorder(reorder_common, input, reorder_out);
    if (*check) run_spmm_check(common, input);
    if (*simcmd) run_simulate(common, sim);
    if (*sweep) run_sweep(common, consumers);
    if (*ablate) run_ablate(common, ab_matrix, ab_workload, ab_sms);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ProtocolViolation& e) {
    std::cerr << "protocol violation: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const CheckFailed& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}
