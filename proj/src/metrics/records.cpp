#include "cloudfill/metrics/records.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cloudfill/core/errors.hpp"

namespace cloudfill::metrics {

namespace {
constexpr const char* kHeader = "chip_id,model,mode,epoch,coverage,max_gap_days,mae_masked,ssim";
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string to_csv(const std::vector<MetricsRecord>& records) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const MetricsRecord& r : records) {
    out += r.chip_id;
    out.push_back(',');
    out += r.model;
    out.push_back(',');
    out += masking::mode_name(r.mode);
    out.push_back(',');
    out += std::to_string(r.epoch);
    out.push_back(',');
    out += format_real(r.coverage);
    out.push_back(',');
    out += std::to_string(r.max_gap_days);
    out.push_back(',');
    out += format_real(r.mae_masked);
    out.push_back(',');
    out += format_real(r.ssim);
    out.push_back('\n');
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for write: " + path.string());
  out << to_csv(records);
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty metrics CSV: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw DataError("unexpected metrics CSV header in " + path.string());
  }
  std::vector<MetricsRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 8 fields, got " + std::to_string(fields.size()));
    }
    MetricsRecord r;
    r.chip_id = fields[0];
    r.model = fields[1];
    r.mode = masking::parse_mode(fields[2]);
    r.epoch = static_cast<std::size_t>(std::stoul(fields[3]));
    r.coverage = std::stod(fields[4]);
    r.max_gap_days = static_cast<std::uint32_t>(std::stoul(fields[5]));
    r.mae_masked = std::stod(fields[6]);
    r.ssim = std::stod(fields[7]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace cloudfill::metrics
