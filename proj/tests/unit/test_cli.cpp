#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "pnnsr/cli.hpp"
#include "pnnsr/model_io.hpp"
#include "pnnsr/pgm.hpp"
#include "pnnsr/registration.hpp"
#include "pnnsr/restoration.hpp"
#include "pnnsr/text_io.hpp"
#include "support/test_images.hpp"

using namespace pnnsr;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  const char* env = std::getenv("PNNSR_TEST_TMP");
  const fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "pnnsr_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string s(const fs::path& p) { return p.string(); }

/// Trains a small model once per process and returns its path.
fs::path small_model() {
  static const fs::path model = [] {
    const fs::path dir = workdir() / "model";
    fs::create_directories(dir);
    std::vector<std::string> args{"train", "-o", s(dir / "model.txt"), "--patterns", "400",
                                  "--restarts", "2", "--cg-max-iters", "40", "--seed", "3"};
    const auto images = testing::training_set(64);
    for (std::size_t i = 0; i < images.size(); ++i) {
      const fs::path p = dir / ("img" + std::to_string(i) + ".pgm");
      write_pgm_file(p, images[i]);
      args.push_back(s(p));
    }
    const Run r = run(args);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return dir / "model.txt";
  }();
  return model;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  const Run none = run({});
  CHECK(none.code == 1);
  CHECK(none.err.find("register") != std::string::npos);
  CHECK(none.out.empty());

  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"superres", "--no-such-flag"}).code == 1);
  CHECK(run({"synth", s(workdir() / "missing.pgm"), "-o", s(workdir())}).code == 1);
  CHECK(run({"train", "-o", "x.txt", "--sigma", "-1"}).code == 1);

  const Run help = run({"register", "--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("--levels") != std::string::npos);
}

TEST_CASE("degenerate superres writes the input back") {
  const fs::path dir = workdir() / "degenerate";
  fs::create_directories(dir);
  const Image img = testing::integer_noise(17, 11, 5);
  write_pgm_file(dir / "in.pgm", img);
  write_transforms_file(dir / "t.txt", {SimilarityTransform::identity()});
  KernelModel m;
  m.net.output_bias = 0.7;
  m.scale = 1;
  write_model_file(dir / "m.txt", m);

  const Run r = run({"superres", s(dir / "in.pgm"), "-m", s(dir / "m.txt"), "-t",
                     s(dir / "t.txt"), "--scale", "1", "-o", s(dir / "out.pgm"), "--deterministic"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_file_bytes(dir / "out.pgm") == read_file_bytes(dir / "in.pgm"));

  SUBCASE("scale mismatch is a runtime error") {
    const Run bad = run({"superres", s(dir / "in.pgm"), "-m", s(dir / "m.txt"), "--scale", "3",
                         "-o", s(dir / "bad.pgm")});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("scale") != std::string::npos);
  }
}

TEST_CASE("synth, register, superres and design-filter") {
  const fs::path dir = workdir() / "e2e";
  fs::create_directories(dir);
  write_pgm_file(dir / "hr.pgm", testing::fractal_texture(120, 120, 17));

  const Run syn = run({"synth", s(dir / "hr.pgm"), "-o", s(dir / "seq"), "--frames", "9",
                       "--seed", "4"});
  REQUIRE_MESSAGE(syn.code == 0, syn.err);
  std::vector<std::string> frames;
  for (int k = 0; k < 9; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.pgm", k);
    frames.push_back(s(dir / "seq" / name));
    CHECK(fs::exists(frames.back()));
  }
  CHECK(fs::exists(dir / "seq" / "truth.pgm"));
  CHECK(read_text_file(dir / "seq" / "synth.txt").find("frames=9") != std::string::npos);

  const Image truth = read_pgm_file(dir / "seq" / "truth.pgm");
  const Image reference = read_pgm_file(frames[0]);
  const double bilinear = rmse(upsample_bilinear(reference, 3), truth);

  std::vector<std::string> sr{"superres", "-m", s(small_model()), "-t",
                              s(dir / "seq" / "transforms.txt"), "-o", s(dir / "sr.pgm"),
                              "--interpolated", s(dir / "interp.pgm")};
  sr.insert(sr.begin() + 1, frames.begin(), frames.end());
  const Run r = run(sr);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Image out = read_pgm_file(dir / "sr.pgm");
  CHECK(out.same_shape(truth));
  CHECK(rmse(out, truth) < bilinear);

  SUBCASE("register recovers the emitted transforms") {
    std::vector<std::string> args{"register", "-o", s(dir / "est.txt")};
    args.insert(args.end(), frames.begin(), frames.end());
    const Run reg = run(args);
    REQUIRE_MESSAGE(reg.code == 0, reg.err);
    const auto est = read_transforms_file(dir / "est.txt");
    const auto known = read_transforms_file(dir / "seq" / "transforms.txt");
    REQUIRE(est.size() == known.size());
    for (std::size_t k = 0; k < est.size(); ++k) {
      CHECK(std::abs(est[k].theta - known[k].theta) < 2e-3);
      const Point2 c{19.5, 19.5};
      const Point2 a = apply(est[k], c), b = apply(known[k], c);
      CHECK(std::hypot(a.x - b.x, a.y - b.y) < 0.1);
    }
  }
  SUBCASE("design-filter then filtered superres") {
    const Run ds = run({"design-filter", "--pair", s(dir / "interp.pgm"),
                        s(dir / "seq" / "truth.pgm"), "--size", "5", "-o", s(dir / "f.txt")});
    REQUIRE_MESSAGE(ds.code == 0, ds.err);
    CHECK(parse_filter(read_text_file(dir / "f.txt")).size == 5);
    const Run odd = run({"design-filter", "--pair", s(dir / "interp.pgm"), "-o", s(dir / "g.txt")});
    CHECK(odd.code == 1);
  }
}

TEST_CASE("bench reports are deterministic") {
  const fs::path dir = workdir() / "bench";
  fs::create_directories(dir);
  std::vector<std::string> args{"bench", "--sigmas", "0,10", "--patterns", "200", "--restarts",
                                "1", "--cg-max-iters", "10", "--eval-patterns", "200",
                                "--sequence-size", "20", "--deterministic"};
  const auto images = testing::training_set(64);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const fs::path p = dir / ("img" + std::to_string(i) + ".pgm");
    write_pgm_file(p, images[i]);
    args.push_back(s(p));
  }
  const Run a = run(args);
  REQUIRE_MESSAGE(a.code == 0, a.err);
  CHECK(a.out.find("bench.0.rmse_seq_nn=") != std::string::npos);
  CHECK(a.out.find("bench.10.half_width=") != std::string::npos);
  args.push_back("--threads");
  args.push_back("2");
  CHECK(run(args).out == a.out);
}
