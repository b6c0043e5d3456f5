// Acceptance checks. Usage: acceptance [criterion ...]; no arguments runs all.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "lact/analytic.hpp"
#include "lact/data.hpp"
#include "lact/dataset.hpp"
#include "lact/io.hpp"
#include "lact/iterative.hpp"
#include "lact/mgn.hpp"
#include "lact/nn/checkpoint.hpp"
#include "lact/nn/ct_layers.hpp"
#include "lact/projector.hpp"
#include "support.hpp"

using namespace lact;
using nn::Shape;
using nn::Tensor;
using test::adjoint_pair;
using test::gradient_error;
using test::inner;
using test::random_tensor;
using test::rel_gap;
namespace fs = std::filesystem;

namespace {

// Pinned from the first run of the finished implementation (rounded down).
constexpr double kFullViewFbpPsnr = 25.92;
constexpr double kFullViewFanFbpPsnr = 27.35;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("lact_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Image random_label(std::size_t size, std::uint64_t seed) {
  PhantomSpec spec;
  spec.kind = PhantomSpec::Kind::random_ellipses;
  spec.size = size;
  spec.seed = seed;
  return make_phantom(spec);
}

ScanSpec scan_of(ScanSpec::Kind kind, std::size_t size, std::size_t views, std::size_t keep) {
  ScanSpec s;
  s.kind = kind;
  s.size = size;
  s.views = views;
  s.keep = keep;
  return s;
}

// ------------------------------------------------------------------ 1

Outcome adjoint_suite() {
  Rng rng(101);
  double worst = 0.0;
  std::size_t instances = 0;
  std::map<std::string, std::size_t> per_op;
  const auto record = [&](const std::string& op, double lhs, double rhs) {
    worst = std::max(worst, rel_gap(lhs, rhs));
    ++instances;
    ++per_op[op];
  };

  for (int i = 0; i < 20; ++i) {
    const std::size_t size = 8 + rng.below(57);
    const std::size_t views = 4 + rng.below(60);
    const auto kind = i % 2 == 0 ? ScanSpec::Kind::parallel : ScanSpec::Kind::fan;
    const ScanSpec scan = scan_of(kind, size, views, 1 + rng.below(views));
    const Geometry geom = scan.geometry();
    const ViewSelection sel = scan.selection();
    const ImageGrid grid = scan.grid();
    const std::size_t dets = n_detectors(geom);

    const Image x(grid, test::random_array(size, size, rng));
    const Sinogram y(test::random_array(views, dets, rng));
    record("projector", inner(project(x, geom).values.flat(), y.values.flat()),
           inner(x.values.flat(), backproject(y, geom).values.flat()));

    const LimitedSinogram lim{sel, test::random_array(sel.size(), dets, rng)};
    record("restrict/pad_dual", inner(restrict_views(y, sel).values.flat(), lim.values.flat()),
           inner(y.values.flat(), pad_dual(lim).values.flat()));

    GradField p(size, size);
    for (auto& v : p.dx.flat()) v = rng.uniform(-1.0, 1.0);
    for (auto& v : p.dy.flat()) v = rng.uniform(-1.0, 1.0);
    const GradField gx = grad(x);
    // div is the negative adjoint of grad
    record("grad/div", inner(gx.dx.flat(), p.dx.flat()) + inner(gx.dy.flat(), p.dy.flat()),
           -inner(x.values.flat(), div(p, grid).values.flat()));

    const Shape spec_shape{1 + rng.below(2), views, dets, 2};
    auto [f_lhs, f_rhs] = adjoint_pair([](const Tensor& t) { return nn::fft2(t); }, spec_shape, rng);
    record("fft2", f_lhs, f_rhs);

    const auto op = std::make_shared<const FbpOperator>(geom);
    auto [b_lhs, b_rhs] = adjoint_pair([&](const Tensor& t) { return nn::fbp_layer(t, op); },
                                       {1, views, dets, 1}, rng);
    record("fbp_layer", b_lhs, b_rhs);
    record("fbp operator", inner(op->apply(y).values.flat(), x.values.flat()),
           inner(y.values.flat(), op->adjoint(x).values.flat()));
  }

  // the full-size scans themselves
  for (const auto kind : {ScanSpec::Kind::parallel, ScanSpec::Kind::fan}) {
    const ScanSpec scan = scan_of(kind, 128, kind == ScanSpec::Kind::fan ? 360 : 180, 150);
    const Geometry geom = scan.geometry();
    const Image x(scan.grid(), test::random_array(128, 128, rng));
    const Sinogram y(test::random_array(n_angles(geom), n_detectors(geom), rng));
    record("projector", inner(project(x, geom).values.flat(), y.values.flat()),
           inner(x.values.flat(), backproject(y, geom).values.flat()));
    const FbpOperator op(geom);
    record("fbp operator", inner(op.apply(y).values.flat(), x.values.flat()),
           inner(y.values.flat(), op.adjoint(x).values.flat()));
  }

  std::size_t fewest = instances;
  for (const auto& [op, n] : per_op) fewest = std::min(fewest, n);
  Outcome o;
  o.pass = worst <= 1e-10 && fewest >= 20;
  o.detail = "worst relative gap " + fmt("%.2e", worst) + " over " + std::to_string(instances) +
             " instances, at least " + std::to_string(fewest) + " per operator";
  return o;
}

// ------------------------------------------------------------------ 2

Outcome gradient_suite() {
  Rng rng(202);
  double worst = 0.0;
  std::string worst_name;
  const auto check = [&](const std::string& name, const Tensor& p, const std::function<Tensor()>& loss,
                         std::size_t probes = 24) {
    const double e = gradient_error(p, loss, probes);
    if (!(e <= worst)) {
      worst = e;
      worst_name = name;
    }
  };
  const auto target_loss = [](const Tensor& out, const Tensor& c) { return nn::sum_squares(nn::sub(out, c)); };

  {
    Tensor x = random_tensor({2, 8, 8, 3}, rng);
    Tensor f = random_tensor({5, 5, 3, 4}, rng);
    Tensor b = random_tensor({1, 1, 1, 4}, rng);
    const Tensor c = random_tensor({2, 8, 8, 4}, rng, false);
    const auto loss = [&] { return target_loss(nn::conv2d(x, f, b), c); };
    check("conv2d input", x, loss, 64);
    check("conv2d filters", f, loss, 64);
    check("conv2d bias", b, loss);
  }
  {
    Tensor x = random_tensor({2, 5, 4, 3}, rng);
    nn::BnParams bn = nn::make_bn(3, "bn");
    for (auto& v : bn.scale.mutable_values()) v = rng.uniform(0.5, 2.0);
    for (auto& v : bn.offset.mutable_values()) v = rng.uniform(-1.0, 1.0);
    const Tensor c = random_tensor({2, 5, 4, 3}, rng, false);
    for (bool training : {true, false}) {
      const auto loss = [&] { return target_loss(nn::batchnorm(x, bn, training), c); };
      check("batchnorm input", x, loss, 60);
      check("batchnorm scale", bn.scale, loss);
      check("batchnorm offset", bn.offset, loss);
    }
  }
  {
    // entries kept clear of the kink
    std::vector<double> v(64);
    for (auto& e : v) e = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.05, 1.0);
    Tensor x = Tensor::parameter({1, 8, 8, 1}, v, "x");
    const Tensor c = random_tensor({1, 8, 8, 1}, rng, false);
    check("relu", x, [&] { return target_loss(nn::relu(x), c); }, 64);
  }
  {
    Tensor x = random_tensor({2, 6, 7, 2}, rng);
    const Tensor c = random_tensor({2, 6, 7, 2}, rng, false);
    check("fft2", x, [&] { return target_loss(nn::fft2(x), c); }, 84);
    check("ifft2", x, [&] { return target_loss(nn::ifft2(x), c); }, 84);
  }
  for (const auto kind : {ScanSpec::Kind::parallel, ScanSpec::Kind::fan}) {
    const ScanSpec scan = scan_of(kind, 16, 12, 9);
    const Geometry geom = scan.geometry();
    const ViewSelection sel = scan.selection();
    const std::size_t dets = n_detectors(geom);
    const auto fbp = std::make_shared<const FbpOperator>(geom);
    const std::string tag = kind == ScanSpec::Kind::fan ? " (fan)" : " (parallel)";

    Tensor u = random_tensor({1, 16, 16, 1}, rng);
    const Tensor cs = random_tensor({1, 12, dets, 1}, rng, false);
    check("project_layer" + tag, u, [&] { return target_loss(nn::project_layer(u, geom), cs); });
    Tensor s = random_tensor({1, 12, dets, 1}, rng);
    const Tensor ci = random_tensor({1, 16, 16, 1}, rng, false);
    check("fbp_layer" + tag, s, [&] { return target_loss(nn::fbp_layer(s, fbp), ci); });

    Tensor z = random_tensor({1, 16, 16, 1}, rng);
    Tensor sigma = random_tensor({1, 12, dets, 2}, rng);
    const Tensor g = random_tensor({1, sel.size(), dets, 1}, rng, false);
    const auto mp = mgn::MergeParams::make(0.9, 0.3, 0.2, 0.4);
    const auto merge_loss = [&] {
      return target_loss(mgn::merge_forward(u, z, sigma, g, mp, geom, sel, fbp), ci);
    };
    check("merge_forward u" + tag, u, merge_loss);
    check("merge_forward z" + tag, z, merge_loss);
    check("merge_forward sigma" + tag, sigma, merge_loss);
    for (const auto& t : mp.parameters()) check("merge_forward " + t.name() + tag, t, merge_loss);
  }
  {
    const ScanSpec scan = scan_of(ScanSpec::Kind::parallel, 16, 12, 9);
    std::vector<std::pair<std::string, Image>> labels{{"a", random_label(16, 1)}, {"b", random_label(16, 2)}};
    const Dataset ds = build_dataset(labels, scan, 2, 0);
    mgn::MgnModel model({scan, 2, 4, 17});
    model.merge().t2.mutable_values()[0] = 0.3;
    for (auto* blocks : {&model.sigma_blocks(), &model.z_blocks()})
      for (auto& b : *blocks)
        for (auto& bn : b.bn)
          for (auto& v : bn.scale.mutable_values()) v = rng.uniform(0.5, 1.5);
    const mgn::Batch b = mgn::make_batch(ds.split("train"));
    const auto loss = [&] {
      const auto out = mgn::mgn_forward(b.g, b.u0, model, true);
      return nn::add(mgn::mgn_loss(out.z, out.sigma, b.image, b.sino, 0.5), nn::sum_squares(out.u));
    };
    for (const auto& t : model.merge().parameters()) check("network " + t.name(), t, loss);
    for (std::size_t n = 0; n < 2; ++n) {
      auto& sb = model.sigma_blocks()[n];
      auto& zb = model.z_blocks()[n];
      check("network " + sb.conv[0].filters.name(), sb.conv[0].filters, loss, 12);
      check("network " + sb.conv[2].filters.name(), sb.conv[2].filters, loss, 12);
      check("network " + sb.bn[0].scale.name(), sb.bn[0].scale, loss);
      check("network " + zb.conv[1].filters.name(), zb.conv[1].filters, loss, 12);
      check("network " + zb.conv[3].filters.name(), zb.conv[3].filters, loss, 12);
      check("network " + zb.bn[2].offset.name(), zb.bn[2].offset, loss);
    }
  }
  Outcome o;
  o.pass = worst <= 1e-4;
  o.detail = "worst relative error " + fmt("%.2e", worst) + " (" + worst_name + ")";
  return o;
}

// ------------------------------------------------------------------ 3

Outcome zero_weight_identity() {
  const ScanSpec scan = scan_of(ScanSpec::Kind::parallel, 64, 180, 150);
  std::vector<std::pair<std::string, Image>> labels{{"a", random_label(64, 5)}};
  const Dataset ds = build_dataset(labels, scan, 1, 0);
  mgn::MgnModel model({scan, 5, 8, 3});
  for (auto& b : model.sigma_blocks()) b.zero();
  for (auto& b : model.z_blocks()) b.zero();
  model.merge().t1.mutable_values()[0] = 1.0;
  model.merge().t2.mutable_values()[0] = 0.0;
  model.merge().t3.mutable_values()[0] = 0.0;
  model.merge().t4.mutable_values()[0] = 0.0;
  const mgn::Batch b = mgn::make_batch(ds.split("train"));
  bool identical = true;
  for (bool training : {false, true}) {
    const auto out = mgn::mgn_forward(b.g, b.u0, model, training);
    identical = identical && out.u.size() == b.u0.size() &&
                std::memcmp(out.u.values().data(), b.u0.values().data(), b.u0.size() * sizeof(double)) == 0;
  }
  return {identical, identical ? "u_N equals u0 bit for bit (N_iter 5, 64x64, both BN modes)"
                               : "u_N differs from u0"};
}

// ------------------------------------------------------------------ 4

Outcome fbp_sanity() {
  const Image label = shepp_logan(128);
  std::string detail;
  bool pass = true;
  for (const auto kind : {ScanSpec::Kind::parallel, ScanSpec::Kind::fan}) {
    const bool fan = kind == ScanSpec::Kind::fan;
    const ScanSpec scan = scan_of(kind, 128, fan ? 360 : 180, 150);
    const Geometry geom = scan.geometry();
    const Sinogram sino = project(label, geom);
    const double full = psnr(FbpOperator(geom).apply(sino), label);
    const double limited = psnr(fbp_limited(restrict_views(sino, scan.selection()), geom), label);
    const double pinned = fan ? kFullViewFanFbpPsnr : kFullViewFbpPsnr;
    pass = pass && full >= pinned && limited < full;
    detail += std::string(fan ? "; fan " : "parallel ") + "full " + fmt("%.3f", full) + " dB (pinned " +
              fmt("%.2f", pinned) + "), limited " + fmt("%.3f", limited) + " dB";
  }
  return {pass, detail};
}

// ------------------------------------------------------------------ 5

Outcome tv_beats_fbp() {
  const ScanSpec scan = scan_of(ScanSpec::Kind::parallel, 128, 180, 150);
  const Geometry geom = scan.geometry();
  double tv_sum = 0.0, fbp_sum = 0.0;
  const std::size_t n = 20;
  for (std::size_t i = 0; i < n; ++i) {
    const Image label = random_label(128, 5000 + i);
    const LimitedSinogram g = restrict_views(project(label, geom), scan.selection());
    fbp_sum += psnr(fbp_limited(g, geom), label);
    tv_sum += psnr(tv_admm(g, geom, TvParams{}).image, label);
  }
  const double tv = tv_sum / n, fb = fbp_sum / n;
  return {tv > fb, "mean PSNR tv " + fmt("%.3f", tv) + " dB vs fbp " + fmt("%.3f", fb) + " dB over 20 phantoms"};
}

// ------------------------------------------------------------------ 6

Outcome mgn_trains() {
  Outcome o;
  // single-sample overfit
  const ScanSpec scan = scan_of(ScanSpec::Kind::parallel, 64, 180, 150);
  double ratio = 0.0;
  {
    std::vector<std::pair<std::string, Image>> labels{{"a", random_label(64, 77)}};
    const Dataset one = build_dataset(labels, scan, 1, 0);
    mgn::MgnModel model({scan, 2, 64, 1});
    mgn::TrainConfig tc;
    tc.epochs = 200;
    tc.lr = 0.001;
    tc.seed = 1;
    const auto r = mgn::train(model, one, tc);
    ratio = r.step_losses.back() / r.step_losses.front();
  }
  // 50 phantoms: 40 train, 10 held out
  double mgn_mean = 0.0, fbp_mean = 0.0, seconds = 0.0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, Image>> labels;
    for (std::size_t i = 0; i < 50; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "p%02zu", i);
      labels.emplace_back(id, random_label(64, 1000 + i));
    }
    const Dataset ds = build_dataset(labels, scan, 40, 0);
    mgn::MgnModel model({scan, 3, 64, 1});
    mgn::TrainConfig tc;
    tc.epochs = 4;
    tc.seed = 1;
    mgn::train(model, ds, tc);
    const auto test_set = ds.split("test");
    const auto images = mgn::reconstruct(model, test_set);
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      mgn_mean += psnr(images[i], test_set[i]->image_label) / test_set.size();
      fbp_mean += psnr(test_set[i]->u0, test_set[i]->image_label) / test_set.size();
    }
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  o.pass = ratio < 0.5 && mgn_mean > fbp_mean && seconds <= 1800.0;
  o.detail = "overfit loss ratio " + fmt("%.3f", ratio) + " after 200 steps; held-out PSNR mgn " +
             fmt("%.3f", mgn_mean) + " dB vs fbp " + fmt("%.3f", fbp_mean) + " dB, 50-phantom run " +
             fmt("%.0f", seconds) + " s";
  return o;
}

// ------------------------------------------------------------------ 7

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lact");
  std::ostringstream out, err;
  const int code = lact::cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

Outcome determinism() {
  const auto dir = scratch("determinism");
  bool ok = cli({"phantom", "--kind", "random", "--size", "32", "--count", "5", "--seed", "11", "--out",
                 (dir / "img").string()}) == 0 &&
            cli({"simulate", "--views", "60", "--keep", "50", "--train", "4", "--val", "1", "--in",
                 (dir / "img").string(), "--out", (dir / "ds").string()}) == 0;
  for (const char* run : {"a", "b"}) {
    std::ofstream(dir / "train.cfg") << "data = " << (dir / "ds").string() << "\ncheckpoint_dir = "
                                     << (dir / run).string()
                                     << "\nn_iter = 2\nfeatures = 8\nepochs = 2\nbatch_size = 2\nseed = 4\n";
    ok = ok && cli({"train", "--config", (dir / "train.cfg").string()}) == 0;
  }
  if (!ok) return {false, "a command failed"};
  std::string detail;
  bool same = true;
  for (const char* f : {"model.ckpt", "model.ckpt.bin", "history.csv"}) {
    const bool eq = io::read_bytes(dir / "a" / f) == io::read_bytes(dir / "b" / f);
    same = same && eq;
    detail += std::string(detail.empty() ? "" : ", ") + f + (eq ? " identical" : " DIFFERS");
  }
  return {same, detail};
}

// ------------------------------------------------------------------ 8

Outcome format_round_trip() {
  const auto dir = scratch("formats");
  Rng rng(808);
  std::string failures;
  const auto expect = [&](bool cond, const std::string& what) {
    if (!cond) failures += (failures.empty() ? "" : "; ") + what;
  };
  const auto rejects_named = [&](const std::function<void()>& read, const fs::path& file) {
    try {
      read();
    } catch (const io::FormatError& e) {
      return std::string(e.what()).find(file.filename().string()) != std::string::npos;
    }
    return false;
  };

  for (const auto dtype : {io::Dtype::f64, io::Dtype::f32}) {
    io::LactTensor t;
    t.dtype = dtype;
    t.dims = {3, 4, 5};
    for (int i = 0; i < 60; ++i) {
      const double v = rng.uniform(-1e3, 1e3);
      t.values.push_back(dtype == io::Dtype::f32 ? static_cast<double>(static_cast<float>(v)) : v);
    }
    const fs::path p = dir / (dtype == io::Dtype::f32 ? "t32.lact" : "t64.lact");
    io::write_lact(p, t);
    const auto bytes = io::read_bytes(p);
    const auto back = io::read_lact(p);
    expect(back.values == t.values && back.dims == t.dims && io::encode_lact(back) == bytes,
           "LACT round trip");
    auto bad = bytes;
    bad[0] = 'X';
    io::write_bytes(dir / "bad.lact", bad);
    expect(rejects_named([&] { io::read_lact(dir / "bad.lact"); }, dir / "bad.lact"), "LACT magic");
  }

  {
    mgn::MgnModel model({scan_of(ScanSpec::Kind::parallel, 16, 12, 9), 2, 4, 9});
    const nn::Checkpoint ck = model.to_checkpoint();
    nn::write_checkpoint(dir / "m.ckpt", ck);
    const auto manifest = io::read_bytes(dir / "m.ckpt");
    const auto blob = io::read_bytes(dir / "m.ckpt.bin");
    const nn::Checkpoint back = nn::read_checkpoint(dir / "m.ckpt");
    bool same = back.meta == ck.meta && back.arrays.size() == ck.arrays.size();
    for (std::size_t i = 0; same && i < ck.arrays.size(); ++i)
      same = back.arrays[i].name == ck.arrays[i].name && back.arrays[i].shape == ck.arrays[i].shape &&
             std::memcmp(back.arrays[i].values.data(), ck.arrays[i].values.data(),
                         ck.arrays[i].values.size() * sizeof(double)) == 0;
    nn::write_checkpoint(dir / "m2.ckpt", mgn::MgnModel::from_checkpoint(back).to_checkpoint());
    expect(same && io::read_bytes(dir / "m2.ckpt.bin") == blob, "checkpoint round trip");
    auto bad = manifest;
    bad[0] = 'X';
    io::write_bytes(dir / "bad.ckpt", bad);
    expect(rejects_named([&] { nn::read_checkpoint(dir / "bad.ckpt"); }, dir / "bad.ckpt"), "checkpoint magic");
  }

  {
    const io::Pgm pgm = io::to_pgm(shepp_logan(64).values);
    io::write_pgm(dir / "p.pgm", pgm);
    const auto bytes = io::read_bytes(dir / "p.pgm");
    const io::Pgm back = io::read_pgm(dir / "p.pgm");
    io::write_pgm(dir / "p2.pgm", back);
    expect(back.pixels == pgm.pixels && back.window_min == pgm.window_min &&
               back.window_max == pgm.window_max && io::read_bytes(dir / "p2.pgm") == bytes,
           "PGM round trip");
    auto bad = bytes;
    bad[0] = 'Q';
    io::write_bytes(dir / "bad.pgm", bad);
    expect(rejects_named([&] { io::read_pgm(dir / "bad.pgm"); }, dir / "bad.pgm"), "PGM magic");
  }
  return {failures.empty(), failures.empty() ? "LACT f64/f32, checkpoint and PGM round trip bit-exactly; "
                                               "bad magic rejected with the file named"
                                             : failures};
}

// ------------------------------------------------------------------ 9

Outcome plancherel() {
  Rng rng(909);
  std::set<std::pair<std::size_t, std::size_t>> shapes;
  for (const auto& [kind, size, views] : std::vector<std::tuple<ScanSpec::Kind, std::size_t, std::size_t>>{
           {ScanSpec::Kind::parallel, 128, 180}, {ScanSpec::Kind::parallel, 64, 180},
           {ScanSpec::Kind::fan, 128, 360}, {ScanSpec::Kind::fan, 64, 360}}) {
    const ScanSpec scan = scan_of(kind, size, views, 150);
    const std::size_t dets = n_detectors(scan.geometry());
    shapes.emplace(views, dets);
    shapes.emplace(150, dets);
  }
  for (std::size_t views : {180, 360, 150}) shapes.emplace(views, 725);
  double worst = 0.0;
  std::string list;
  for (const auto& [h, w] : shapes) {
    for (bool real_input : {true, false}) {
      const Tensor x = real_input ? nn::to_complex(random_tensor({1, h, w, 1}, rng, false))
                                  : random_tensor({1, h, w, 2}, rng, false);
      const double before = std::sqrt(nn::sum_squares(x).item());
      const double after = std::sqrt(nn::sum_squares(nn::fft2(x)).item());
      worst = std::max(worst, std::abs(after - before) / before);
    }
    list += (list.empty() ? "" : " ") + std::to_string(h) + "x" + std::to_string(w);
  }
  return {worst <= 1e-10, "worst relative norm gap " + fmt("%.2e", worst) + " on " + list};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"adjoint suite", adjoint_suite},
      {"gradient suite", gradient_suite},
      {"zero-weight identity", zero_weight_identity},
      {"FBP sanity", fbp_sanity},
      {"TV beats FBP", tv_beats_fbp},
      {"MGN trains", mgn_trains},
      {"determinism", determinism},
      {"format round-trip", format_round_trip},
      {"Plancherel", plancherel},
  };
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k));
  }
  if (selected.empty())
    for (std::size_t k = 1; k <= criteria.size(); ++k) selected.push_back(k);

  bool all = true;
  for (std::size_t k : selected) {
    const auto& [name, fn] = criteria[k - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k, name.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
