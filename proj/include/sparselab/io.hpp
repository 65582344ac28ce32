#pragma once

// Matrix Market coordinate files, JSON/CSV reports and trace records.
//
// Every JSON report is an object carrying "schema": 1, the command name and
// the RNG seed. Trace files are CSV with the fixed header
//   time,sm,unit,lane,stage,tile,kind,aux

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sparselab/analysis.hpp"
#include "sparselab/formats.hpp"
#include "sparselab/pipeline_sim.hpp"

namespace sparselab {

inline constexpr int kReportSchema = 1;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Valid banner for a layout this library does not read (array, complex, ...).
class UnsupportedFormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MatrixMarketHeader {
  std::string object;
  std::string format;
  std::string field;
  std::string symmetry;
};

MatrixMarketHeader parse_matrix_market_header(std::string_view banner);

/// One-based coordinate entries become a canonical CsrMatrix: symmetric
/// entries are mirrored, pattern entries get 1.0, duplicates are summed.
CsrMatrix parse_matrix_market(std::string_view text);
CsrMatrix read_matrix_market(const std::filesystem::path& path);

/// "coordinate real general", values printed with round-trip precision.
std::string write_matrix_market(const CsrMatrix& a);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// -- reports ------------------------------------------------------------------

nlohmann::json report_envelope(std::string_view command, std::uint64_t seed);

nlohmann::json matrix_stats_json(const CsrMatrix& a, index_t b_row, index_t bcsr_b_col, index_t wcsr_b_col);
nlohmann::json padding_json(const PaddingReport& r);
nlohmann::json pipeline_config_json(const PipelineConfig& c);
/// Missing keys keep their defaults. Throws std::invalid_argument.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json sim_result_json(const SimResult& r);
nlohmann::json ablation_json(const AblationReport& r);

/// {"tiles": [[m_tile, n_tile, block_count], ...]}
nlohmann::json workload_json(const WorkloadModel& w);
WorkloadModel workload_from_json(const nlohmann::json& j);

std::string padding_csv(const std::vector<PaddingReport>& rows);
std::string ablation_csv(const AblationReport& r);
std::string sim_result_csv(const SimResult& r);

std::string trace_csv(const std::vector<TraceEvent>& trace);
/// Throws ParseError.
std::vector<TraceEvent> parse_trace_csv(std::string_view text);

}  // namespace sparselab
