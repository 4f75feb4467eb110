#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "goalcraft/analysis.hpp"
#include "goalcraft/evalx.hpp"
#include "goalcraft/trainer.hpp"

namespace goalcraft {

enum class CsvSchema {
  metrics,          // epoch,env_steps,success_rate,mean_return,critic_loss,actor_loss,mean_q,seed,variant
  metrics_phase,    // metrics + phase
  summary,          // epoch,mean,ci_low,ci_high,n_seeds
  ablate_summary,   // cell + summary
  field,            // x,y,phi_px,phi_py,phi_norm,angle_opt,angle_rand,q_opt
  heatmap,          // x,y,q_opt
};

const std::vector<std::string>& schema_columns(CsvSchema schema);
std::string header_line(CsvSchema schema);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

std::string metrics_row(const RunRecord& r);
std::string metrics_row(const RunRecord& r, const std::string& phase);
std::string summary_row(const CurvePoint& p);
std::string field_row(const FieldSample& s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

/// Throws ContractError naming the row and column of the first violation:
/// wrong header, ragged rows, or cells that do not parse as the column type.
void validate_csv(const CsvTable& table, CsvSchema schema);

/// Which schema a header matches, if any.
std::optional<CsvSchema> detect_schema(const std::vector<std::string>& header);

struct MetricsRow {
  RunRecord record;
  std::string phase;  // empty for plain metrics files
};

/// Reads and validates a metrics or metrics_phase file.
std::vector<MetricsRow> read_metrics(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace goalcraft
