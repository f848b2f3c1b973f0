#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cloudfill/cgan/train.hpp"
#include "cloudfill/harness/config_file.hpp"
#include "cloudfill/vit/train.hpp"

namespace cloudfill::harness {

using masking::Mode;

struct ExperimentConfig {
  Mode mode = Mode::E1;
  std::string model = "vit";  // "vit" | "cgan"
  std::size_t sample_size = 64;
  std::size_t epochs = 30;
  std::size_t runs = 2;
  std::uint64_t seed = 1;  // run k trains with seed + k
  std::string data_root;
  std::string out_dir;
  std::string init_checkpoint;  // optional warm start

  std::size_t batch_size = 8;

  // vit block (dims are taken from the data)
  std::size_t patch = 8;
  std::size_t embed_dim = 128, enc_depth = 4, enc_heads = 4;
  std::size_t dec_dim = 64, dec_depth = 2, dec_heads = 4;
  std::size_t mlp_ratio = 2;
  double vit_lr = 1e-3;
  bool random_patch_masking = false;
  double mask_ratio = 0.5;

  // cgan block
  std::size_t gen_base = 16, disc_base = 16, disc_down_stages = 2;
  double lr_d = 1e-4, lr_g = 5e-4, alpha = 5.0;

  std::size_t band_corr_chips = 64;

  void validate() const;
  static ExperimentConfig from_kv(const KeyValues& kv);  // strict key set
};

struct TableRow {
  std::string model;
  Mode mode = Mode::E1;
  std::size_t sample_size = 0;
  std::size_t run = 0;    // 1-based, winning run
  std::size_t epoch = 0;  // 1-based, winning epoch
  double train_mae = 0.0;
  double train_ssim = 0.0;
  double val_mae = 0.0;
  double val_ssim = 0.0;
};

struct RunSummary {
  std::size_t run = 0;  // 1-based
  std::uint64_t seed = 0;
  std::vector<metrics::EpochStats> history;
  std::size_t best_epoch = 0;
  double best_val_mae = 0.0;
  double best_val_ssim = 0.0;
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_csv_path;
  std::filesystem::path epochs_csv_path;
};

struct ExperimentResult {
  std::vector<RunSummary> runs;
  TableRow row;
  std::filesystem::path row_csv_path;
};

// Trains `runs` replicas with distinct seeds against the fixed validation
// pairing, writes per-run metric CSVs and best checkpoints, then reports
// the best epoch across all runs (selection: validation masked MAE).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Evaluation only, no gradient updates, identical metric pathway.
TableRow zero_shot_eval(const std::filesystem::path& checkpoint,
                        const std::string& data_root, Mode mode,
                        const std::filesystem::path& out_dir,
                        const std::string& csv_tag = "zeroshot");

// row CSV schema shared by run_experiment / zero_shot_eval / make_report
std::string table_row_csv_header();
std::string table_row_to_csv(const TableRow& row);
std::vector<TableRow> read_table_rows(const std::filesystem::path& path);

// per-epoch summary CSV
void write_epochs_csv(const std::filesystem::path& path,
                      const std::vector<metrics::EpochStats>& history);

}  // namespace cloudfill::harness
