#include "pnnsr/model_io.hpp"

#include <sstream>
#include <vector>

namespace pnnsr {

namespace {

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("model header is missing \"" + key + "\"");
  return it->second;
}

}  // namespace

std::string format_model(const KernelModel& model) {
  std::string out = "MLPPNN 1\n";
  out += "hidden=" + std::to_string(model.net.hidden_units()) +
         " distance_units=hr noise_sigma=" + format_real(model.noise_sigma) +
         " scale=" + std::to_string(model.scale) + " frames=" + std::to_string(model.frames) +
         "\n";
  const auto params = model.net.parameters();
  // Hidden (w, b) pairs one per line, then output weights, then the bias.
  for (int i = 0; i < model.net.hidden_units(); ++i) {
    out += format_real(params[2 * i]) + " " + format_real(params[2 * i + 1]) + "\n";
  }
  const std::size_t out_begin = 2 * model.net.hidden.size();
  for (std::size_t i = out_begin; i + 1 < params.size(); ++i) {
    out += format_real(params[i]);
    out += (i + 2 < params.size()) ? " " : "\n";
  }
  out += format_real(params.back()) + "\n";
  return out;
}

KernelModel parse_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "MLPPNN 1") {
    throw FormatError("not a kernel model file (expected \"MLPPNN 1\" header)");
  }
  if (!std::getline(in, line)) throw FormatError("kernel model is missing its parameter line");
  const auto kv = parse_key_values(line);

  KernelModel model;
  const auto hidden = parse_integer(require(kv, "hidden"), "hidden");
  if (hidden < 1 || hidden > 4096) throw FormatError("invalid hidden unit count");
  if (require(kv, "distance_units") != "hr") {
    throw FormatError("unsupported distance_units \"" + kv.at("distance_units") +
                      "\" (only \"hr\" is defined)");
  }
  model.noise_sigma = parse_real(require(kv, "noise_sigma"), "noise_sigma");
  model.scale = static_cast<int>(parse_integer(require(kv, "scale"), "scale"));
  model.frames = static_cast<int>(parse_integer(require(kv, "frames"), "frames"));
  if (model.scale < 1 || model.frames < 1 || model.noise_sigma < 0.0) {
    throw FormatError("model header has out-of-range scale, frames or noise_sigma");
  }

  std::vector<double> params;
  std::string token;
  while (in >> token) params.push_back(parse_real(token, "model parameter"));
  const auto expected = static_cast<std::size_t>(3 * hidden + 1);
  if (params.size() != expected) {
    throw FormatError("model has " + std::to_string(params.size()) + " parameters, expected " +
                      std::to_string(expected));
  }
  model.net = KernelMlp(static_cast<int>(hidden));
  model.net.set_parameters(params);
  return model;
}

KernelModel read_model_file(const std::filesystem::path& path) {
  try {
    return parse_model(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_model_file(const std::filesystem::path& path, const KernelModel& model) {
  write_text_file(path, format_model(model));
}

}  // namespace pnnsr
