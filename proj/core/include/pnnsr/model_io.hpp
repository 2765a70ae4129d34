#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pnnsr/kernelnet.hpp"
#include "pnnsr/text_io.hpp"

namespace pnnsr {

/// A trained kernel plus the conditions it was trained for. Text layout:
///   MLPPNN 1
///   hidden=25 distance_units=hr noise_sigma=<s> scale=<L> frames=<N>
///   <3H+1 whitespace-separated reals>
struct KernelModel {
  KernelMlp net;
  double noise_sigma = 0.0;
  int scale = 1;
  int frames = 1;
};

std::string format_model(const KernelModel& model);
KernelModel parse_model(std::string_view text);
KernelModel read_model_file(const std::filesystem::path& path);
void write_model_file(const std::filesystem::path& path, const KernelModel& model);

}  // namespace pnnsr
