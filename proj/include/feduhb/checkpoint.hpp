#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "feduhb/fl_engine.hpp"
#include "feduhb/param_vector.hpp"

namespace feduhb {

/// One persisted global model.
struct ModelRecord {
  std::size_t round = 0;
  ParamVector model;
};

/// Checkpoint files are sequences of length-prefixed records:
///   u64 payload bytes | u64 round | u64 dim | dim x f64 (little-endian).
void write_model_records(const std::filesystem::path& path,
                         std::span<const ModelRecord> records);
std::vector<ModelRecord> read_model_records(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, std::size_t round,
                const ParamVector& model);
ParamVector load_model(const std::filesystem::path& path);

/// Round history for history-based unlearning baselines. Same framing;
/// payload: u64 round | u64 dim | u64 clients | f64[dim] model_before |
/// per client (u64 id | u64 weight | f64[dim] delta) | f64[dim] aggregate.
void save_history(const std::filesystem::path& path, std::span<const RoundRecord> history);
std::vector<RoundRecord> load_history(const std::filesystem::path& path);

}  // namespace feduhb
