#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pnnsr/training.hpp"

namespace pnnsr {

/// Dataset cache, all fields little-endian:
///   "PNND" | u32 version (1) | f64 sigma | u64 frames | u64 scale |
///   u64 patterns | f64 scatter_radius | u64 seed |
///   per pattern: f64 target, then frames x (f64 value, f64 distance)
struct DatasetFile {
  TrainConfig config;
  std::vector<TrainingPattern> patterns;
};

std::vector<std::uint8_t> encode_dataset(const TrainConfig& cfg,
                                         std::span<const TrainingPattern> patterns);
DatasetFile decode_dataset(std::span<const std::uint8_t> bytes);

void write_dataset_file(const std::filesystem::path& path, const TrainConfig& cfg,
                        std::span<const TrainingPattern> patterns);
DatasetFile read_dataset_file(const std::filesystem::path& path);

}  // namespace pnnsr
