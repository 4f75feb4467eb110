#include "goalcraft/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "goalcraft/error.hpp"

namespace goalcraft {

namespace {

enum class Cell { integer, real, text };

struct SchemaDef {
  std::vector<std::string> columns;
  std::vector<Cell> types;
};

const SchemaDef& schema_def(CsvSchema schema) {
  static const SchemaDef metrics{
      {"epoch", "env_steps", "success_rate", "mean_return", "critic_loss", "actor_loss", "mean_q",
       "seed", "variant"},
      {Cell::integer, Cell::integer, Cell::real, Cell::real, Cell::real, Cell::real, Cell::real,
       Cell::integer, Cell::text}};
  static const SchemaDef metrics_phase = [] {
    SchemaDef d = metrics;
    d.columns.push_back("phase");
    d.types.push_back(Cell::text);
    return d;
  }();
  static const SchemaDef summary{{"epoch", "mean", "ci_low", "ci_high", "n_seeds"},
                                 {Cell::integer, Cell::real, Cell::real, Cell::real, Cell::integer}};
  static const SchemaDef ablate = [] {
    SchemaDef d = summary;
    d.columns.insert(d.columns.begin(), "cell");
    d.types.insert(d.types.begin(), Cell::text);
    return d;
  }();
  static const SchemaDef field{
      {"x", "y", "phi_px", "phi_py", "phi_norm", "angle_opt", "angle_rand", "q_opt"},
      std::vector<Cell>(8, Cell::real)};
  static const SchemaDef heatmap{{"x", "y", "q_opt"}, std::vector<Cell>(3, Cell::real)};
  switch (schema) {
    case CsvSchema::metrics: return metrics;
    case CsvSchema::metrics_phase: return metrics_phase;
    case CsvSchema::summary: return summary;
    case CsvSchema::ablate_summary: return ablate;
    case CsvSchema::field: return field;
    case CsvSchema::heatmap: return heatmap;
  }
  throw ContractError("unknown CSV schema");
}

bool parses_as(const std::string& s, Cell type) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  switch (type) {
    case Cell::integer: {
      long long v;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec == std::errc() && p == e) return true;
      unsigned long long u;
      auto [p2, ec2] = std::from_chars(b, e, u);
      return ec2 == std::errc() && p2 == e;
    }
    case Cell::real: {
      double v;
      auto [p, ec] = std::from_chars(b, e, v);
      return ec == std::errc() && p == e;
    }
    case Cell::text:
      return s.find_first_of(",\"\n") == std::string::npos;
  }
  return false;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
  return out;
}

template <typename T>
T parse_num(const std::string& s) {
  T v{};
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

const std::vector<std::string>& schema_columns(CsvSchema schema) { return schema_def(schema).columns; }

std::string header_line(CsvSchema schema) { return join(schema_columns(schema)); }

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ContractError("format_double failed");
  return std::string(buf, p);
}

std::string metrics_row(const RunRecord& r) {
  return join({std::to_string(r.epoch), std::to_string(r.env_steps), format_double(r.success_rate),
               format_double(r.mean_return), format_double(r.critic_loss),
               format_double(r.actor_loss), format_double(r.mean_q), std::to_string(r.seed),
               r.variant});
}

std::string metrics_row(const RunRecord& r, const std::string& phase) {
  return metrics_row(r) + "," + phase;
}

std::string summary_row(const CurvePoint& p) {
  return join({std::to_string(p.epoch), format_double(p.mean), format_double(p.ci_low),
               format_double(p.ci_high), std::to_string(p.n_seeds)});
}

std::string field_row(const FieldSample& s) {
  return join({format_double(s.position.x), format_double(s.position.y), format_double(s.phi_2d[0]),
               format_double(s.phi_2d[1]), format_double(s.phi_norm), format_double(s.angle_opt),
               format_double(s.angle_rand), format_double(s.q_opt)});
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void validate_csv(const CsvTable& table, CsvSchema schema) {
  const SchemaDef& def = schema_def(schema);
  if (table.header != def.columns) {
    throw ContractError("CSV header '" + join(table.header) + "' does not match '" +
                        join(def.columns) + "'");
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != def.columns.size()) {
      throw ContractError("CSV row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                          " cells, expected " + std::to_string(def.columns.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!parses_as(row[c], def.types[c])) {
        throw ContractError("CSV row " + std::to_string(r + 1) + " column '" + def.columns[c] +
                            "': bad value '" + row[c] + "'");
      }
    }
  }
}

std::optional<CsvSchema> detect_schema(const std::vector<std::string>& header) {
  for (CsvSchema s : {CsvSchema::metrics, CsvSchema::metrics_phase, CsvSchema::summary,
                      CsvSchema::ablate_summary, CsvSchema::field, CsvSchema::heatmap}) {
    if (schema_columns(s) == header) return s;
  }
  return std::nullopt;
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
  const CsvTable table = read_csv(path);
  const auto schema = detect_schema(table.header);
  if (schema != CsvSchema::metrics && schema != CsvSchema::metrics_phase) {
    throw ContractError(path + ": not a metrics file (header '" + join(table.header) + "')");
  }
  try {
    validate_csv(table, *schema);
  } catch (const ContractError& e) {
    throw ContractError(path + ": " + e.what());
  }
  std::vector<MetricsRow> out;
  for (const auto& row : table.rows) {
    MetricsRow m;
    m.record.epoch = parse_num<int>(row[0]);
    m.record.env_steps = parse_num<std::int64_t>(row[1]);
    m.record.success_rate = parse_num<double>(row[2]);
    m.record.mean_return = parse_num<double>(row[3]);
    m.record.critic_loss = parse_num<double>(row[4]);
    m.record.actor_loss = parse_num<double>(row[5]);
    m.record.mean_q = parse_num<double>(row[6]);
    m.record.seed = parse_num<std::uint64_t>(row[7]);
    m.record.variant = row[8];
    if (row.size() > 9) m.phase = row[9];
    out.push_back(std::move(m));
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace goalcraft
