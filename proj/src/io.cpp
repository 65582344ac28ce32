#include "sparselab/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace sparselab {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t b = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const std::size_t nl = text_.find('\n', pos_);
    const std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++number_;
    return true;
  }
  std::size_t number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

MatrixMarketHeader parse_matrix_market_header(std::string_view banner) {
  const auto tok = split_ws(banner);
  if (tok.empty() || lower(tok[0]) != "%%matrixmarket") throw ParseError(1, "missing %%MatrixMarket banner");
  if (tok.size() != 5) throw ParseError(1, "banner needs object, format, field and symmetry");
  MatrixMarketHeader h{lower(tok[1]), lower(tok[2]), lower(tok[3]), lower(tok[4])};
  if (h.object != "matrix") throw ParseError(1, "unknown object '" + h.object + "'");
  if (h.format == "array") throw UnsupportedFormatError(1, "array format is not supported, use coordinate");
  if (h.format != "coordinate") throw ParseError(1, "unknown format '" + h.format + "'");
  if (h.field == "complex") throw UnsupportedFormatError(1, "complex field is not supported");
  if (h.field != "real" && h.field != "integer" && h.field != "pattern") {
    throw ParseError(1, "unknown field '" + h.field + "'");
  }
  if (h.symmetry == "skew-symmetric" || h.symmetry == "hermitian") {
    throw UnsupportedFormatError(1, h.symmetry + " symmetry is not supported");
  }
  if (h.symmetry != "general" && h.symmetry != "symmetric") {
    throw ParseError(1, "unknown symmetry '" + h.symmetry + "'");
  }
  return h;
}

CsrMatrix parse_matrix_market(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) throw ParseError(1, "empty input");
  const MatrixMarketHeader h = parse_matrix_market_header(line);

  index_t rows = -1;
  index_t cols = -1;
  index_t declared = -1;
  while (reader.next(line)) {
    if (blank(line) || line.front() == '%') continue;
    const auto tok = split_ws(line);
    if (tok.size() != 3 || !parse_number(tok[0], rows) || !parse_number(tok[1], cols) ||
        !parse_number(tok[2], declared) || rows < 0 || cols < 0 || declared < 0) {
      throw ParseError(reader.number(), "expected size line 'rows cols nnz'");
    }
    break;
  }
  if (rows < 0) throw ParseError(reader.number() + 1, "missing size line");
  const bool symmetric = h.symmetry == "symmetric";
  if (symmetric && rows != cols) throw ParseError(reader.number(), "symmetric matrix must be square");

  const std::size_t want_tokens = h.field == "pattern" ? 2 : 3;
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(symmetric ? 2 * declared : declared));
  index_t seen = 0;
  while (reader.next(line)) {
    if (blank(line) || line.front() == '%') continue;
    const auto tok = split_ws(line);
    if (seen == declared) throw ParseError(reader.number(), "more entries than declared");
    if (tok.size() != want_tokens) {
      throw ParseError(reader.number(), "expected " + std::to_string(want_tokens) + " fields per entry");
    }
    index_t i = 0;
    index_t j = 0;
    if (!parse_number(tok[0], i) || !parse_number(tok[1], j)) throw ParseError(reader.number(), "non-integer index");
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError(reader.number(), "index out of bounds");
    double v = 1.0;
    if (h.field == "real") {
      if (!parse_number(tok[2], v)) throw ParseError(reader.number(), "non-numeric value '" + std::string(tok[2]) + "'");
    } else if (h.field == "integer") {
      long long iv = 0;
      if (!parse_number(tok[2], iv)) throw ParseError(reader.number(), "non-integer value '" + std::string(tok[2]) + "'");
      v = static_cast<double>(iv);
    }
    entries.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) entries.push_back({j - 1, i - 1, v});
    ++seen;
  }
  if (seen != declared) {
    throw ParseError(reader.number(), "declared " + std::to_string(declared) + " entries, found " + std::to_string(seen));
  }
  return CsrMatrix::from_triplets(rows, cols, std::move(entries));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) { return parse_matrix_market(read_text_file(path)); }

std::string write_matrix_market(const CsrMatrix& a) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(a.n_rows()) + " " + std::to_string(a.n_cols()) + " " + std::to_string(a.nnz()) + "\n";
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (index_t i = 0; i < a.n_rows(); ++i) {
    for (index_t p = rp[i]; p < rp[i + 1]; ++p) {
      out += std::to_string(i + 1) + " " + std::to_string(ci[p] + 1) + " " + format_double(v[p]) + "\n";
    }
  }
  return out;
}

// -- reports ------------------------------------------------------------------

json report_envelope(std::string_view command, std::uint64_t seed) {
  return json{{"schema", kReportSchema}, {"command", std::string(command)}, {"seed", seed}};
}

json matrix_stats_json(const CsrMatrix& a, index_t b_row, index_t bcsr_b_col, index_t wcsr_b_col) {
  json j{{"n_rows", a.n_rows()}, {"n_cols", a.n_cols()}, {"nnz", a.nnz()}};
  j["bandwidth"] = a.n_rows() == a.n_cols() ? json(bandwidth(a)) : json(nullptr);

  const BcsrMatrix b = bcsr_from_csr(a, b_row, bcsr_b_col);
  json bj{{"b_row", b_row}, {"b_col", bcsr_b_col}, {"nnz_blocks", b.nnz_blocks()}};
  bj["fill_ratio"] = b.nnz_blocks() > 0 ? json(fill_ratio(b)) : json(nullptr);
  j["bcsr"] = bj;

  const WcsrMatrix w = wcsr_from_csr(a, b_row, wcsr_b_col);
  json wj{{"b_row", b_row}, {"b_col", wcsr_b_col}, {"windows", w.windows()}, {"padded_cols", w.padded_nnz_cols()}};
  wj["padding_ratio"] = w.padded_nnz_cols() > 0 ? json(wcsr_padding_ratio(w)) : json(nullptr);
  std::map<index_t, index_t> hist;
  for (const index_t c : window_column_counts(w)) ++hist[c];
  json hj = json::array();
  for (const auto& [cols, count] : hist) hj.push_back({{"columns", cols}, {"windows", count}});
  wj["window_histogram"] = hj;
  j["wcsr"] = wj;
  return j;
}

json padding_json(const PaddingReport& r) {
  return json{{"n", r.n},
              {"wgmma_n", r.wgmma_n},
              {"bn", r.bn},
              {"padded_n", r.padded_n},
              {"wasted_cols", r.wasted_cols},
              {"waste_ratio", r.waste_ratio}};
}

json pipeline_config_json(const PipelineConfig& c) {
  return json{{"mode", to_string(c.mode)},
              {"num_stages", c.num_stages},
              {"num_consumers", c.num_consumers},
              {"load_latency", c.load_latency},
              {"compute_latency", c.compute_latency},
              {"store_latency", c.store_latency},
              {"cluster_n", c.cluster_n},
              {"scheduler", to_string(c.scheduler)},
              {"group_m", c.group_m},
              {"n_sm", c.n_sm},
              {"issue_latency", c.issue_latency},
              {"barrier_latency", c.barrier_latency},
              {"zero_init_latency", c.zero_init_latency},
              {"reset_latency", c.reset_latency},
              {"claim_latency", c.claim_latency},
              {"cluster_barrier_latency", c.cluster_barrier_latency},
              {"presignal_empty", c.presignal_empty}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("pipeline config must be a JSON object");
  PipelineConfig c;
  try {
    if (j.contains("mode")) {
      const auto m = parse_pipeline_mode(j.at("mode").get<std::string>());
      if (!m) throw std::invalid_argument("unknown mode " + j.at("mode").dump());
      c.mode = *m;
    }
    if (j.contains("scheduler")) {
      const auto s = parse_scheduler(j.at("scheduler").get<std::string>());
      if (!s) throw std::invalid_argument("unknown scheduler " + j.at("scheduler").dump());
      c.scheduler = *s;
    }
    const auto num = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    num("num_stages", c.num_stages);
    num("num_consumers", c.num_consumers);
    num("load_latency", c.load_latency);
    num("compute_latency", c.compute_latency);
    num("store_latency", c.store_latency);
    num("cluster_n", c.cluster_n);
    num("group_m", c.group_m);
    num("n_sm", c.n_sm);
    num("issue_latency", c.issue_latency);
    num("barrier_latency", c.barrier_latency);
    num("zero_init_latency", c.zero_init_latency);
    num("reset_latency", c.reset_latency);
    num("claim_latency", c.claim_latency);
    num("cluster_barrier_latency", c.cluster_barrier_latency);
    num("presignal_empty", c.presignal_empty);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

json sim_result_json(const SimResult& r) {
  json sms = json::array();
  for (std::size_t s = 0; s < r.per_unit_busy.size(); ++s) {
    const auto& b = r.per_unit_busy[s];
    const auto& u = r.utilization[s];
    sms.push_back({{"sm", s},
                   {"finish", r.sm_finish[s]},
                   {"busy", {{"load", b.load}, {"compute", b.compute}, {"store", b.store}}},
                   {"utilization", {{"load", u.load}, {"compute", u.compute}, {"store", u.store}}}});
  }
  return json{{"makespan", r.makespan}, {"a2_traffic", r.a2_traffic}, {"trace_events", r.trace.size()}, {"sms", sms}};
}

json ablation_json(const AblationReport& r) {
  json stages = json::array();
  for (const auto& e : r.entries) {
    stages.push_back({{"id", e.stage.id},
                      {"label", e.stage.label},
                      {"makespan", e.result.makespan},
                      {"a2_traffic", e.result.a2_traffic},
                      {"config", pipeline_config_json(e.stage.config)}});
  }
  return json{{"stages", stages},
              {"ordering",
               {{"tensor_core_gain", r.tensor_core_gain},
                {"chain_opt1_opt2_opt3", r.chain_holds},
                {"barrier_gain", r.barrier_gain},
                {"persistent_regresses", r.persistent_regresses},
                {"multicast_regresses", r.multicast_regresses}}}};
}

json workload_json(const WorkloadModel& w) {
  json tiles = json::array();
  for (const Tile& t : w.tiles) tiles.push_back({t.m_tile, t.n_tile, t.block_count});
  return json{{"tiles", tiles}};
}

WorkloadModel workload_from_json(const json& j) {
  WorkloadModel w;
  try {
    for (const auto& t : j.at("tiles")) {
      if (!t.is_array() || t.size() != 3) throw std::invalid_argument("workload tile must be [m_tile, n_tile, block_count]");
      w.tiles.push_back({t[0].get<index_t>(), t[1].get<index_t>(), t[2].get<index_t>()});
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("workload: ") + e.what());
  }
  w.validate();
  return w;
}

std::string padding_csv(const std::vector<PaddingReport>& rows) {
  std::string out = "n,wgmma_n,bn,padded_n,wasted_cols,waste_ratio\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.wgmma_n) + "," + std::to_string(r.bn) + "," +
           std::to_string(r.padded_n) + "," + std::to_string(r.wasted_cols) + "," + format_double(r.waste_ratio) + "\n";
  }
  return out;
}

std::string ablation_csv(const AblationReport& r) {
  std::string out = "id,label,mode,scheduler,cluster_n,makespan,a2_traffic\n";
  for (const auto& e : r.entries) {
    const auto& c = e.stage.config;
    out += e.stage.id + "," + e.stage.label + "," + to_string(c.mode) + "," + to_string(c.scheduler) + "," +
           std::to_string(c.cluster_n) + "," + std::to_string(e.result.makespan) + "," +
           std::to_string(e.result.a2_traffic) + "\n";
  }
  return out;
}

std::string sim_result_csv(const SimResult& r) {
  std::string out = "sm,finish,busy_load,busy_compute,busy_store,util_load,util_compute,util_store\n";
  for (std::size_t s = 0; s < r.per_unit_busy.size(); ++s) {
    const auto& b = r.per_unit_busy[s];
    const auto& u = r.utilization[s];
    out += std::to_string(s) + "," + std::to_string(r.sm_finish[s]) + "," + std::to_string(b.load) + "," +
           std::to_string(b.compute) + "," + std::to_string(b.store) + "," + format_double(u.load) + "," +
           format_double(u.compute) + "," + format_double(u.store) + "\n";
  }
  return out;
}

namespace {
constexpr std::string_view kTraceHeader = "time,sm,unit,lane,stage,tile,kind,aux";
}

std::string trace_csv(const std::vector<TraceEvent>& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& e : trace) {
    out += std::to_string(e.time) + "," + std::to_string(e.sm) + "," + to_string(e.unit) + "," +
           std::to_string(e.lane) + "," + std::to_string(e.stage) + "," + std::to_string(e.tile) + "," +
           to_string(e.kind) + "," + std::to_string(e.aux) + "\n";
  }
  return out;
}

std::vector<TraceEvent> parse_trace_csv(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line) || line != kTraceHeader) throw ParseError(1, "expected trace header");
  std::vector<TraceEvent> out;
  while (reader.next(line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t b = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        f.push_back(line.substr(b, i - b));
        b = i + 1;
      }
    }
    if (f.size() != 8) throw ParseError(reader.number(), "expected 8 fields");
    TraceEvent e;
    const auto unit = parse_unit(f[2]);
    const auto kind = parse_event_kind(f[6]);
    if (!parse_number(f[0], e.time) || !parse_number(f[1], e.sm) || !unit || !parse_number(f[3], e.lane) ||
        !parse_number(f[4], e.stage) || !parse_number(f[5], e.tile) || !kind || !parse_number(f[7], e.aux)) {
      throw ParseError(reader.number(), "malformed trace record");
    }
    e.unit = *unit;
    e.kind = *kind;
    out.push_back(e);
  }
  return out;
}

}  // namespace sparselab
