#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cloudfill/metrics/metrics.hpp"

namespace cloudfill::metrics {

// metrics CSV schema (fixed):
//   chip_id,model,mode,epoch,coverage,max_gap_days,mae_masked,ssim

std::string format_real(double v);  // deterministic %.9g rendering

std::string to_csv(const std::vector<MetricsRecord>& records);
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

}  // namespace cloudfill::metrics
