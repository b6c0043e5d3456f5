#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "lact/data.hpp"
#include "lact/dataset.hpp"
#include "lact/io.hpp"

using namespace lact;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result lact_run(std::vector<std::string> args) {
  args.insert(args.begin(), "lact");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("lact_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string read_text(const fs::path& p) {
  const auto b = io::read_bytes(p);
  return std::string(b.begin(), b.end());
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

// random phantoms -> small parallel dataset with train/val/test tags
fs::path small_dataset(const fs::path& root, const std::string& views = "12",
                       const std::string& keep = "9") {
  REQUIRE(lact_run({"phantom", "--kind", "random", "--size", "16", "--count", "4", "--seed", "3",
                    "--out", (root / "img").string()})
              .code == 0);
  const Result r = lact_run({"simulate", "--views", views, "--keep", keep, "--train", "2", "--val",
                             "1", "--in", (root / "img").string(), "--out", (root / "ds").string()});
  REQUIRE(r.code == 0);
  return root / "ds";
}

}  // namespace

TEST_CASE("phantom command") {
  const auto dir = scratch_dir("phantom");
  Result r = lact_run({"phantom", "--kind", "shepp-logan", "--size", "32", "--count", "1", "--out",
                       (dir / "sl").string()});
  CHECK(r.code == 0);
  const Array2 a = io::read_array(dir / "sl" / "phantom_0000.lact");
  CHECK(a.flat().size() == 32 * 32);
  const Image expect = shepp_logan(32);
  CHECK(std::equal(a.flat().begin(), a.flat().end(), expect.values.flat().begin()));
  CHECK(fs::exists(dir / "sl" / "phantom.resolved.txt"));

  for (const char* sub : {"r1", "r2"})
    CHECK(lact_run({"phantom", "--kind", "random", "--seed", "7", "--count", "10", "--size", "16",
                    "--out", (dir / sub).string()})
              .code == 0);
  for (int i = 0; i < 10; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "phantom_%04d.lact", i);
    CHECK(io::read_bytes(dir / "r1" / name) == io::read_bytes(dir / "r2" / name));
  }
  CHECK(io::read_bytes(dir / "r1" / "phantom_0000.lact") != io::read_bytes(dir / "r1" / "phantom_0001.lact"));

  r = lact_run({"phantom", "--count", "0", "--out", (dir / "z").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("count") != std::string::npos);
  CHECK(lact_run({"phantom", "--kind", "triangle", "--out", (dir / "z").string()}).code == 2);
  CHECK(lact_run({"phantom", "--size", "-4", "--out", (dir / "z").string()}).code == 2);
  CHECK(lact_run({"phantom", "--bogus", "1", "--out", (dir / "z").string()}).code == 2);
  CHECK(lact_run({"phantom"}).code == 2);
  CHECK(lact_run({}).code == 2);

  SUBCASE("flags override the config file, which overrides defaults") {
    write_text(dir / "p.cfg", "# settings\nsize = 16\ncount = 2\nout = " + (dir / "cfg").string() + "\n");
    CHECK(lact_run({"phantom", "--config", (dir / "p.cfg").string(), "--size", "24"}).code == 0);
    CHECK(io::read_array(dir / "cfg" / "phantom_0001.lact").rows() == 24);
    const KeyValues snap = read_key_values(dir / "cfg" / "phantom.resolved.txt");
    CHECK(snap.at("size") == "24");
    CHECK(snap.at("count") == "2");
    CHECK(snap.at("kind") == "shepp-logan");
    write_text(dir / "bad.cfg", "sizes = 16\n");
    r = lact_run({"phantom", "--config", (dir / "bad.cfg").string(), "--out", (dir / "z").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("sizes") != std::string::npos);
  }
}

TEST_CASE("simulate command") {
  const auto dir = scratch_dir("simulate");
  const fs::path ds_dir = small_dataset(dir);
  const Dataset ds = read_dataset(ds_dir);
  CHECK(ds.samples.size() == 4);
  CHECK(ds.split("train").size() == 2);
  CHECK(ds.split("test").size() == 1);

  SUBCASE("keep = views gives a limited sinogram equal to the full one") {
    CHECK(lact_run({"simulate", "--views", "8", "--keep", "8", "--in", (dir / "img").string(), "--out",
                    (dir / "all").string()})
              .code == 0);
    for (const auto& s : read_dataset(dir / "all").samples)
      CHECK(s.limited.values.flat().size() == s.sino_label.values.flat().size());
  }
  SUBCASE("fan geometry defaults to 360 views") {
    CHECK(lact_run({"simulate", "--geometry", "fan", "--in", (dir / "img").string(), "--out",
                    (dir / "fan").string()})
              .code == 0);
    const Dataset fan = read_dataset(dir / "fan");
    CHECK(n_angles(fan.scan.geometry()) == 360);
    CHECK(fan.samples.front().limited.values.rows() == 150);
  }
  SUBCASE("mismatched label sizes are reported") {
    io::write_array(dir / "img" / "zz_odd.lact", Array2(20, 20));
    const Result r = lact_run({"simulate", "--in", (dir / "img").string(), "--out", (dir / "x").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("zz_odd") != std::string::npos);
    CHECK(r.err.find("20x20") != std::string::npos);
  }
  CHECK(lact_run({"simulate", "--keep", "500", "--in", (dir / "img").string(), "--out", (dir / "y").string()})
            .code == 2);
}

TEST_CASE("reconstruct and eval commands") {
  const auto dir = scratch_dir("recon");
  const fs::path ds_dir = small_dataset(dir);
  const std::string csv = (dir / "m.csv").string();
  for (int pass = 0; pass < 2; ++pass)
    CHECK(lact_run({"reconstruct", "--method", "fbp", "--in", ds_dir.string(), "--out",
                    (dir / "fbp").string(), "--metrics", csv})
              .code == 0);
  const auto rows = lines_of(read_text(csv));
  REQUIRE(rows.size() == 1 + 2 * 4);
  CHECK(rows[0] == "id,method,psnr_db,ssim");
  CHECK(fields_of(rows[1])[1] == "fbp");
  CHECK(rows[1] == rows[5]);
  for (const auto& s : read_dataset(ds_dir).samples) CHECK(fs::exists(dir / "fbp" / (s.id + ".lact")));

  SUBCASE("TV defaults are recorded") {
    CHECK(lact_run({"reconstruct", "--method", "tv", "--tv-max-iters", "5", "--split", "test", "--in",
                    ds_dir.string(), "--out", (dir / "tv").string()})
              .code == 0);
    const KeyValues snap = read_key_values(dir / "tv" / "reconstruct.resolved.txt");
    CHECK(snap.at("tv_lambda3") == "100");
    CHECK(snap.at("tv_rho") == "0.1");
    CHECK(snap.at("tv_t5") == "0.1");
  }
  SUBCASE("cgls runs") {
    CHECK(lact_run({"reconstruct", "--method", "cgls", "--cgls-iters", "5", "--in", ds_dir.string(),
                    "--out", (dir / "cgls").string()})
              .code == 0);
  }
  SUBCASE("mgn needs a checkpoint") {
    const Result r = lact_run({"reconstruct", "--method", "mgn", "--in", ds_dir.string(), "--out",
                               (dir / "mgn").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("checkpoint") != std::string::npos);
  }
  SUBCASE("eval of labels against themselves") {
    const Result r = lact_run({"eval", "--pred", (dir / "img").string(), "--label", ds_dir.string(),
                               "--out", (dir / "self.csv").string()});
    CHECK(r.code == 0);
    const auto lines = lines_of(read_text(dir / "self.csv"));
    REQUIRE(lines.size() == 6);
    CHECK(lines.back() == "mean,pred,inf,1");
  }
  SUBCASE("eval means are row averages") {
    CHECK(lact_run({"eval", "--pred", (dir / "fbp").string(), "--label", ds_dir.string(), "--method",
                    "fbp", "--out", (dir / "e.csv").string()})
              .code == 0);
    const auto lines = lines_of(read_text(dir / "e.csv"));
    REQUIRE(lines.size() == 6);
    double p = 0.0, s = 0.0;
    for (std::size_t i = 1; i < 5; ++i) {
      p += std::stod(fields_of(lines[i])[2]) / 4.0;
      s += std::stod(fields_of(lines[i])[3]) / 4.0;
    }
    const auto mean = fields_of(lines[5]);
    CHECK(mean[0] == "mean");
    CHECK(std::stod(mean[2]) == doctest::Approx(p).epsilon(1e-5));
    CHECK(std::stod(mean[3]) == doctest::Approx(s).epsilon(1e-5));
  }
  SUBCASE("eval errors") {
    fs::create_directories(dir / "few");
    fs::copy_file(dir / "fbp" / "phantom_0000.lact", dir / "few" / "phantom_0000.lact");
    Result r = lact_run({"eval", "--pred", (dir / "few").string(), "--label", ds_dir.string(), "--out",
                         (dir / "x.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("1 prediction(s)") != std::string::npos);
    auto bytes = io::read_bytes(dir / "fbp" / "phantom_0002.lact");
    bytes[0] = 'X';
    io::write_bytes(dir / "fbp" / "phantom_0002.lact", bytes);
    r = lact_run({"eval", "--pred", (dir / "fbp").string(), "--label", ds_dir.string(), "--out",
                  (dir / "x.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("phantom_0002.lact") != std::string::npos);
  }
}

TEST_CASE("train command") {
  const auto dir = scratch_dir("train");
  const fs::path ds_dir = small_dataset(dir);
  const auto config = [&](const std::string& out, const std::string& extra = "") {
    const fs::path p = dir / (out + ".cfg");
    write_text(p, "data = " + ds_dir.string() + "\ncheckpoint_dir = " + (dir / out).string() +
                      "\nn_iter = 2\nfeatures = 3\nepochs = 2\nseed = 5\n" + extra);
    return p.string();
  };
  CHECK(lact_run({"train", "--config", config("a")}).code == 0);
  CHECK(lact_run({"train", "--config", config("b")}).code == 0);
  for (const char* f : {"model.ckpt", "model.ckpt.bin", "history.csv"})
    CHECK(io::read_bytes(dir / "a" / f) == io::read_bytes(dir / "b" / f));
  const auto history = lines_of(read_text(dir / "a" / "history.csv"));
  REQUIRE(history.size() == 3);
  CHECK(history[0] == "epoch,mean_loss,val_psnr");
  const std::string val_psnr = fields_of(history[2])[2];

  SUBCASE("the checkpoint reproduces the last validation PSNR") {
    const Result r = lact_run({"reconstruct", "--method", "mgn", "--checkpoint",
                               (dir / "a" / "model.ckpt").string(), "--split", "val", "--in",
                               ds_dir.string(), "--out", (dir / "mgn").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("mean psnr_db " + val_psnr + " ") != std::string::npos);
  }
  SUBCASE("a different seed gives a different model") {
    CHECK(lact_run({"train", "--config", config("c"), "--seed", "6"}).code == 0);
    CHECK(io::read_bytes(dir / "a" / "model.ckpt.bin") != io::read_bytes(dir / "c" / "model.ckpt.bin"));
  }
  SUBCASE("usage and numerical failures") {
    CHECK(lact_run({"train"}).code == 2);
    CHECK(lact_run({"train", "--config", (dir / "missing.cfg").string()}).code == 2);
    CHECK(lact_run({"train", "--config", config("d", "lambda = 2\n")}).code == 2);
    CHECK(lact_run({"train", "--config", config("e", "color = red\n")}).code == 2);
    const Result r = lact_run({"train", "--config", config("f", "lr = 1e300\n")});
    CHECK(r.code == 3);
    CHECK(r.err.find("epoch") != std::string::npos);
  }
}
