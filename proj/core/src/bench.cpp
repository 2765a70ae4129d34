#include "pnnsr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pnnsr/parallel.hpp"
#include "pnnsr/pipeline.hpp"
#include "pnnsr/synth.hpp"
#include "pnnsr/text_io.hpp"

namespace pnnsr {

PatternErrors evaluate_patterns(const KernelMlp& net, std::span<const TrainingPattern> data) {
  if (data.empty()) throw std::invalid_argument("no evaluation patterns");
  const Kernel kernel = MlpKernel{net};
  double se_nn = 0.0;
  double se_pnn = 0.0;
  for (const auto& p : data) {
    const double e_nn = seq_nn(p.samples) - p.target;
    const double e_pnn = pnn_combine(p.samples, kernel) - p.target;
    se_nn += e_nn * e_nn;
    se_pnn += e_pnn * e_pnn;
  }
  const double n = static_cast<double>(data.size());
  return {std::sqrt(se_nn / n), std::sqrt(se_pnn / n)};
}

std::uint64_t heldout_seed(std::uint64_t train_seed) {
  return restart_seed(train_seed ^ 0xB0C5E7A11ull, 7919);
}

namespace {

Image center_crop(const Image& img, int width, int height) {
  const int x0 = (img.width() - width) / 2;
  const int y0 = (img.height() - height) / 2;
  Image out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
  return out;
}

}  // namespace

BenchReport run_bench(const std::vector<Image>& images, const BenchOptions& options) {
  if (images.empty()) throw std::invalid_argument("bench needs at least one image");
  if (options.sigmas.empty()) throw std::invalid_argument("bench needs at least one sigma");
  if (!options.models.empty() && options.models.size() != options.sigmas.size()) {
    throw std::invalid_argument("bench got " + std::to_string(options.models.size()) +
                                " models for " + std::to_string(options.sigmas.size()) +
                                " sigmas");
  }
  const unsigned threads = options.deterministic ? 1u : resolve_threads(options.threads);

  // Sort sigma (and any matching models) ascending.
  std::vector<std::size_t> order(options.sigmas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return options.sigmas[a] < options.sigmas[b]; });

  BenchReport report;
  report.options = options;
  report.threads = threads;
  const int scale = options.train.scale;

  for (const std::size_t idx : order) {
    const double sigma = options.sigmas[idx];
    try {
      TrainConfig cfg = options.train;
      cfg.sigma = sigma;
      cfg.threads = threads;

      BenchRow row;
      row.sigma = sigma;
      KernelModel model;
      if (options.models.empty()) {
        const auto data = make_dataset(images, cfg);
        const TrainResult trained = train(data, cfg);
        model.net = trained.net;
        row.train_loss = trained.final_loss;
      } else {
        model = options.models[idx];
        if (model.scale != scale) {
          throw PipelineError("model scale " + std::to_string(model.scale) +
                              " does not match bench scale " + std::to_string(scale));
        }
      }
      model.noise_sigma = sigma;
      model.scale = scale;
      model.frames = cfg.frames;

      TrainConfig eval_cfg = cfg;
      eval_cfg.patterns = options.eval_patterns;
      eval_cfg.seed = heldout_seed(cfg.seed);
      const auto heldout = make_dataset(images, eval_cfg);
      const PatternErrors pe = evaluate_patterns(model.net, heldout);
      row.rmse_seq_nn = pe.seq_nn;
      row.rmse_mlp_pnn = pe.mlp_pnn;
      row.half_width = kernel_half_width(MlpKernel{model.net}, 3.0 * scale);

      // Synthetic sequences: single-frame bilinear vs the full interpolation.
      double se_bilinear = 0.0;
      double se_pnn = 0.0;
      double best_ms = -1.0;
      std::size_t used = 0;
      for (std::size_t i = 0; i < images.size(); ++i) {
        const int lr = std::min({options.sequence_lr_size, images[i].width() / scale,
                                 images[i].height() / scale});
        if (lr < 4) continue;
        ++used;
        const Image hr = center_crop(images[i], lr * scale, lr * scale);
        SynthOptions so;
        so.frames = cfg.frames;
        so.scale = scale;
        so.sigma = sigma;
        so.seed = restart_seed(eval_cfg.seed, static_cast<int>(i));
        const SynthSequence seq = synth_sequence(hr, so);
        const Kernel kernel = MlpKernel{model.net};

        const Image bilinear = upsample_bilinear(seq.frames[so.reference_index], scale);
        const double rb = rmse(bilinear, seq.truth);
        se_bilinear += rb * rb;

        const bool timed = used == 1;
        const int repeats = (timed && !options.deterministic) ? 3 : 1;
        Image out;
        for (int rep = 0; rep < repeats; ++rep) {
          const auto start = std::chrono::steady_clock::now();
          out = interpolate(seq.frames, seq.transforms, kernel, scale, threads);
          const double ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start)
                                .count();
          if (timed && (best_ms < 0.0 || ms < best_ms)) best_ms = ms;
        }
        const double rp = rmse(out, seq.truth);
        se_pnn += rp * rp;
      }
      if (used == 0) throw Error("every image is too small for a synthetic sequence");
      const double n = static_cast<double>(used);
      row.rmse_bilinear = std::sqrt(se_bilinear / n);
      row.rmse_mlp_pnn_sequence = std::sqrt(se_pnn / n);
      row.wall_time_interp_ms = options.deterministic ? 0.0 : std::max(0.0, best_ms);

      report.rows.push_back(row);
      report.models.push_back(model);
    } catch (const Error& e) {
      throw Error("bench sigma=" + format_real(sigma) + ": " + e.what());
    }
  }
  return report;
}

std::string format_bench_report(const BenchReport& report) {
  const bool timing = !report.options.deterministic;
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%8s %10s %10s %10s %12s %11s%s\n", "sigma", "seq_nn",
                "mlp_pnn", "bilinear", "mlp_pnn_seq", "half_width", timing ? "  interp_ms" : "");
  out += line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%8.3f %10.4f %10.4f %10.4f %12.4f %11.4f", r.sigma,
                  r.rmse_seq_nn, r.rmse_mlp_pnn, r.rmse_bilinear, r.rmse_mlp_pnn_sequence,
                  r.half_width);
    out += line;
    if (timing) {
      std::snprintf(line, sizeof line, " %10.3f", r.wall_time_interp_ms);
      out += line;
    }
    out += "\n";
  }
  for (const auto& r : report.rows) {
    const std::string p = "bench." + format_real(r.sigma) + ".";
    out += p + "sigma=" + format_real(r.sigma) + "\n";
    out += p + "rmse_seq_nn=" + format_real(r.rmse_seq_nn) + "\n";
    out += p + "rmse_mlp_pnn=" + format_real(r.rmse_mlp_pnn) + "\n";
    out += p + "rmse_bilinear=" + format_real(r.rmse_bilinear) + "\n";
    out += p + "rmse_mlp_pnn_sequence=" + format_real(r.rmse_mlp_pnn_sequence) + "\n";
    out += p + "half_width=" + format_real(r.half_width) + "\n";
    out += p + "train_loss=" + format_real(r.train_loss) + "\n";
    if (timing) out += p + "wall_time_interp_ms=" + format_real(r.wall_time_interp_ms) + "\n";
  }
  const auto& t = report.options.train;
  out += "bench.env.threads=" + std::to_string(report.threads) + "\n";
  out += "bench.env.deterministic=" + std::string(report.options.deterministic ? "1" : "0") + "\n";
  out += "bench.config.frames=" + std::to_string(t.frames) + "\n";
  out += "bench.config.scale=" + std::to_string(t.scale) + "\n";
  out += "bench.config.patterns=" + std::to_string(t.patterns) + "\n";
  out += "bench.config.scatter_radius=" + format_real(t.scatter_radius) + "\n";
  out += "bench.config.restarts=" + std::to_string(t.restarts) + "\n";
  out += "bench.config.cg_max_iters=" + std::to_string(t.cg_max_iters) + "\n";
  out += "bench.config.cg_tol=" + format_real(t.cg_tol) + "\n";
  out += "bench.config.hidden_units=" + std::to_string(t.hidden_units) + "\n";
  out += "bench.config.seed=" + std::to_string(t.seed) + "\n";
  out += "bench.config.eval_patterns=" + std::to_string(report.options.eval_patterns) + "\n";
  out += "bench.config.sequence_lr_size=" + std::to_string(report.options.sequence_lr_size) + "\n";
  out += "bench.config.pretrained=" + std::string(report.options.models.empty() ? "0" : "1") + "\n";
  return out;
}

}  // namespace pnnsr
