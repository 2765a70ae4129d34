#include "pnnsr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "pnnsr/bench.hpp"
#include "pnnsr/dataset_io.hpp"
#include "pnnsr/model_io.hpp"
#include "pnnsr/pgm.hpp"
#include "pnnsr/pipeline.hpp"
#include "pnnsr/registration.hpp"
#include "pnnsr/restoration.hpp"
#include "pnnsr/synth.hpp"
#include "pnnsr/text_io.hpp"
#include "pnnsr/training.hpp"

namespace pnnsr {

namespace fs = std::filesystem;

namespace {

std::vector<Image> load_images(const std::vector<std::string>& paths) {
  std::vector<Image> images;
  images.reserve(paths.size());
  for (const auto& p : paths) images.push_back(read_pgm_file(p));
  return images;
}

void add_train_flags(CLI::App& app, TrainConfig& cfg) {
  app.add_option("--sigma", cfg.sigma, "Input noise standard deviation (gray levels)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--frames", cfg.frames, "Samples per pattern (sequence length N)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--scale", cfg.scale, "Resolution factor L")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--patterns", cfg.patterns, "Training patterns")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--scatter-radius", cfg.scatter_radius, "Sample scatter radius (LR pixels)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--restarts", cfg.restarts, "Independent training restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--cg-max-iters", cfg.cg_max_iters, "Conjugate-gradient iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--cg-tol", cfg.cg_tol, "Relative loss decrease over 5 iterations to stop")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--hidden", cfg.hidden_units, "Hidden units of the kernel MLP")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// ---------------------------------------------------------------- register

struct RegisterArgs {
  std::vector<std::string> frames;
  std::string out;
  std::size_t reference = 0;
  RegistrationOptions options;
  unsigned threads = 0;
};

void run_register(const RegisterArgs& a, std::ostream& out, std::ostream& err) {
  const auto frames = load_images(a.frames);
  const auto ts = register_sequence(frames, a.reference, a.options, a.threads);
  if (a.out.empty()) {
    out << format_transforms(ts);
  } else {
    write_transforms_file(a.out, ts);
    err << "wrote " << ts.size() << " transforms to " << a.out << '\n';
  }
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  std::string input;
  std::string out_dir;
  SynthOptions options;
};

std::string frame_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%03zu.pgm", k);
  return buf;
}

void run_synth(const SynthArgs& a, std::ostream& err) {
  const Image hr = read_pgm_file(a.input);
  const SynthSequence seq = synth_sequence(hr, a.options);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    write_pgm_file(dir / frame_name(k), seq.frames[k]);
  }
  write_transforms_file(dir / "transforms.txt", seq.transforms);
  write_pgm_file(dir / "truth.pgm", seq.truth);
  write_text_file(dir / "synth.txt", format_synth_metadata(a.options, seq));
  err << "wrote " << seq.frames.size() << " frames of " << seq.frames[0].width() << "x"
      << seq.frames[0].height() << " to " << dir.string() << '\n';
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::vector<std::string> images;
  std::string out;
  std::string dataset;
  TrainConfig cfg;
};

bool same_generation(const TrainConfig& a, const TrainConfig& b) {
  return a.sigma == b.sigma && a.frames == b.frames && a.scale == b.scale &&
         a.patterns == b.patterns && a.scatter_radius == b.scatter_radius && a.seed == b.seed;
}

void run_train(const TrainArgs& a, std::ostream& err) {
  a.cfg.validate();
  std::vector<TrainingPattern> data;
  if (!a.dataset.empty() && fs::exists(a.dataset)) {
    DatasetFile cached = read_dataset_file(a.dataset);
    if (!same_generation(cached.config, a.cfg)) {
      throw Error("dataset cache " + a.dataset + " was generated with different settings");
    }
    data = std::move(cached.patterns);
    err << "loaded " << data.size() << " patterns from " << a.dataset << '\n';
  } else {
    data = make_dataset(load_images(a.images), a.cfg);
    if (!a.dataset.empty()) write_dataset_file(a.dataset, a.cfg, data);
  }

  const TrainResult result = train(data, a.cfg);
  for (std::size_t r = 0; r < result.report.restarts.size(); ++r) {
    const auto& rep = result.report.restarts[r];
    err << "restart " << r << ": ";
    if (rep.diverged) {
      err << "diverged (" << rep.stop_reason << ")\n";
      continue;
    }
    err << "loss " << format_real(rep.initial_loss) << " -> " << format_real(rep.final_loss)
        << " in " << rep.iterations << " iterations (" << rep.stop_reason << ")";
    if (rep.skipped_patterns > 0) err << ", " << rep.skipped_patterns << " patterns skipped";
    err << '\n';
  }
  err << "selected restart " << result.report.selected << '\n';

  KernelModel model;
  model.net = result.net;
  model.noise_sigma = a.cfg.sigma;
  model.scale = a.cfg.scale;
  model.frames = a.cfg.frames;
  write_model_file(a.out, model);
}

// ---------------------------------------------------------------- superres

struct SuperresArgs {
  std::vector<std::string> frames;
  std::string out;
  std::string interpolated_out;
  bool ascii = false;
  PipelineConfig cfg;
  std::string filter;
  std::string transforms;
};

void run_superres(SuperresArgs a, std::ostream& err) {
  if (!a.filter.empty()) a.cfg.filter_path = a.filter;
  if (!a.transforms.empty()) a.cfg.transforms_path = a.transforms;
  const auto frames = load_images(a.frames);
  const SuperresolveResult r = superresolve(frames, a.cfg);
  write_pgm_file(a.out, r.image, !a.ascii);
  if (!a.interpolated_out.empty()) write_pgm_file(a.interpolated_out, r.interpolated, !a.ascii);
  err << "superres " << r.image.width() << "x" << r.image.height() << " from " << frames.size()
      << " frames: registration " << r.registration_ms << " ms, interpolation "
      << r.interpolation_ms << " ms, filtering " << r.filtering_ms << " ms";
  if (r.degenerate_nodes > 0) err << ", " << r.degenerate_nodes << " degenerate nodes";
  err << '\n';
}

// ----------------------------------------------------------- design-filter

struct DesignArgs {
  std::vector<std::string> pairs;
  int size = 7;
  double sigma = 0.0;
  std::string out;
};

void run_design(const DesignArgs& a, std::ostream& err) {
  std::vector<ImagePair> pairs;
  for (std::size_t i = 0; i + 1 < a.pairs.size(); i += 2) {
    pairs.push_back({read_pgm_file(a.pairs[i]), read_pgm_file(a.pairs[i + 1])});
  }
  const FirFilter f = design_filter(pairs, a.size, a.sigma);
  write_filter_file(a.out, f);
  const double before = design_objective(pairs, FirFilter::delta(a.size));
  const double after = design_objective(pairs, f);
  err << "designed " << a.size << "x" << a.size << " filter from " << pairs.size()
      << " pairs: squared error " << format_real(before) << " -> " << format_real(after) << '\n';
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::string> images;
  std::vector<std::string> models;
  std::string out;
  std::string save_models;
  BenchOptions options;
};

void run_bench_command(BenchArgs a, std::ostream& out, std::ostream& err) {
  for (const auto& m : a.models) a.options.models.push_back(read_model_file(m));
  const BenchReport report = run_bench(load_images(a.images), a.options);
  const std::string text = format_bench_report(report);
  if (a.out.empty()) {
    out << text;
  } else {
    write_text_file(a.out, text);
    err << "wrote bench report to " << a.out << '\n';
  }
  if (!a.save_models.empty()) {
    fs::create_directories(a.save_models);
    for (std::size_t i = 0; i < report.models.size(); ++i) {
      const fs::path p =
          fs::path(a.save_models) / ("model_sigma" + format_real(report.rows[i].sigma) + ".txt");
      write_model_file(p, report.models[i]);
    }
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-frame superresolution with a perceptron-shaped PNN kernel", "pnnsr"};
  app.require_subcommand(1);
  app.fallthrough(false);

  RegisterArgs reg;
  auto* reg_cmd = app.add_subcommand("register", "Estimate frame-to-reference transforms");
  reg_cmd->add_option("frames", reg.frames, "Input frames (PGM)")->required()->check(CLI::ExistingFile);
  reg_cmd->add_option("-o,--out", reg.out, "Transform file (default: standard output)");
  reg_cmd->add_option("--reference", reg.reference, "Reference frame index")->capture_default_str();
  reg_cmd->add_option("--levels", reg.options.levels, "Pyramid levels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  reg_cmd->add_option("--max-iters", reg.options.max_iters, "Gauss-Newton iterations per level")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  reg_cmd->add_option("--threads", reg.threads, "Worker threads (0 = all cores)");

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Degrade an HR image into a jittered LR sequence");
  syn_cmd->add_option("input", syn.input, "High-resolution image (PGM)")
      ->required()
      ->check(CLI::ExistingFile);
  syn_cmd->add_option("-o,--out-dir", syn.out_dir, "Output directory")->required();
  syn_cmd->add_option("--frames", syn.options.frames, "Sequence length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  syn_cmd->add_option("--scale", syn.options.scale, "Downsampling factor L")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  syn_cmd->add_option("--sigma", syn.options.sigma, "Noise standard deviation (gray levels)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  syn_cmd->add_option("--max-shift", syn.options.max_shift, "Translation jitter (LR pixels)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  syn_cmd->add_option("--max-rotation", syn.options.max_rotation_deg, "Rotation jitter (degrees)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  syn_cmd->add_option("--max-scale-dev", syn.options.max_scale_dev, "Scale jitter")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();
  syn_cmd->add_option("--seed", syn.options.seed, "Random seed")->capture_default_str();
  syn_cmd->add_option("--reference", syn.options.reference_index, "Reference frame index")
      ->capture_default_str();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train a kernel MLP on still images");
  tr_cmd->add_option("images", tr.images, "Training images (PGM)")->check(CLI::ExistingFile);
  tr_cmd->add_option("-o,--out", tr.out, "Model file")->required();
  tr_cmd->add_option("--dataset", tr.dataset, "Pattern cache: read if present, else written");
  tr_cmd->add_option("--threads", tr.cfg.threads, "Restart workers (0 = all cores)");
  add_train_flags(*tr_cmd, tr.cfg);

  SuperresArgs sr;
  auto* sr_cmd = app.add_subcommand("superres", "Reconstruct a high-resolution image");
  sr_cmd->add_option("frames", sr.frames, "Input frames (PGM)")->required()->check(CLI::ExistingFile);
  sr_cmd->add_option("-m,--model", sr.cfg.model_path, "Kernel model file")
      ->required()
      ->check(CLI::ExistingFile);
  sr_cmd->add_option("-f,--filter", sr.filter, "Restoration filter file")->check(CLI::ExistingFile);
  sr_cmd->add_option("-t,--transforms", sr.transforms, "Known transforms; skips registration")
      ->check(CLI::ExistingFile);
  sr_cmd->add_option("-o,--out", sr.out, "Output image (PGM)")->required();
  sr_cmd->add_option("--interpolated", sr.interpolated_out, "Also write the pre-filter image");
  sr_cmd->add_option("--scale", sr.cfg.scale, "Resolution factor L")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sr_cmd->add_option("--reference", sr.cfg.reference_index, "Reference frame index")
      ->capture_default_str();
  sr_cmd->add_option("--threads", sr.cfg.threads, "Worker threads (0 = all cores)");
  sr_cmd->add_flag("--deterministic", sr.cfg.deterministic, "Single-threaded, reproducible run");
  sr_cmd->add_flag("--ascii", sr.ascii, "Write plain (P2) PGM");

  DesignArgs ds;
  auto* ds_cmd = app.add_subcommand("design-filter", "Least-squares restoration filter design");
  ds_cmd->add_option("--pair", ds.pairs, "Degraded and target image (PGM), repeatable")
      ->required()
      ->expected(2, CLI::detail::expected_max_vector_size)
      ->allow_extra_args(false)
      ->check(CLI::ExistingFile);
  ds_cmd->add_option("--size", ds.size, "Odd filter size")->capture_default_str();
  ds_cmd->add_option("--sigma", ds.sigma, "Noise level the filter is designed for")
      ->check(CLI::NonNegativeNumber);
  ds_cmd->add_option("-o,--out", ds.out, "Filter file")->required();

  BenchArgs bn;
  auto* bn_cmd = app.add_subcommand("bench", "Train per noise level and compare interpolators");
  bn_cmd->add_option("images", bn.images, "Images (PGM)")->required()->check(CLI::ExistingFile);
  bn_cmd->add_option("--sigmas", bn.options.sigmas, "Noise levels")
      ->delimiter(',')
      ->capture_default_str();
  bn_cmd->add_option("--model", bn.models, "Pre-trained model per sigma, in --sigmas order")
      ->check(CLI::ExistingFile);
  bn_cmd->add_option("--eval-patterns", bn.options.eval_patterns, "Held-out patterns per sigma")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bn_cmd->add_option("--sequence-size", bn.options.sequence_lr_size,
                     "LR side of the synthetic evaluation sequences")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bn_cmd->add_option("--threads", bn.options.threads, "Worker threads (0 = all cores)");
  bn_cmd->add_flag("--deterministic", bn.options.deterministic,
                   "Single-threaded run without timing lines");
  bn_cmd->add_option("-o,--out", bn.out, "Report file (default: standard output)");
  bn_cmd->add_option("--save-models", bn.save_models, "Directory for the trained models");
  add_train_flags(*bn_cmd, bn.options.train);

  if (args.empty()) {
    err << app.help();
    return 1;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << sub->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "pnnsr: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  if (ds_cmd->parsed() && ds.pairs.size() % 2 != 0) {
    err << "pnnsr: --pair takes a degraded and a target image\n";
    return 1;
  }
  if (tr_cmd->parsed() && tr.images.empty() && tr.dataset.empty()) {
    err << "pnnsr: train needs images or an existing --dataset cache\n";
    return 1;
  }

  try {
    if (reg_cmd->parsed()) run_register(reg, out, err);
    if (syn_cmd->parsed()) run_synth(syn, err);
    if (tr_cmd->parsed()) run_train(tr, err);
    if (sr_cmd->parsed()) run_superres(sr, err);
    if (ds_cmd->parsed()) run_design(ds, err);
    if (bn_cmd->parsed()) run_bench_command(bn, out, err);
  } catch (const std::exception& e) {
    err << "pnnsr: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace pnnsr
