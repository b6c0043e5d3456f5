#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "lact/analytic.hpp"
#include "lact/config.hpp"
#include "lact/data.hpp"
#include "lact/dataset.hpp"
#include "lact/io.hpp"
#include "lact/iterative.hpp"
#include "lact/mgn.hpp"
#include "lact/nn/adam.hpp"
#include "lact/nn/checkpoint.hpp"

namespace lact::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One setting: config key, default text (empty = no default), help.
struct Setting {
  std::string key;
  std::string fallback;
  std::string help;
  bool required = false;
};

/// Registers one --flag per setting plus --config, then resolves values
/// with precedence flags > config file > defaults.
class Settings {
 public:
  Settings(CLI::App* cmd, std::vector<Setting> settings, bool config_required = false)
      : settings_(std::move(settings)) {
    auto* c = cmd->add_option("--config", config_, "key=value settings file");
    if (config_required) c->required();
    for (const auto& s : settings_) {
      std::string flag = "--" + s.key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      std::string help = s.help;
      if (!s.fallback.empty()) help += " (default " + s.fallback + ")";
      flags_[s.key] = cmd->add_option(flag, values_[s.key], help);
    }
  }

  KeyValues resolve() const {
    KeyValues file;
    if (!config_.empty()) {
      if (!fs::exists(config_)) throw UsageError("config file '" + config_ + "' does not exist");
      file = read_key_values(config_);
      std::set<std::string> allowed;
      for (const auto& s : settings_) allowed.insert(s.key);
      reject_unknown(file, allowed, config_);
    }
    KeyValues out;
    for (const auto& s : settings_) {
      if (flags_.at(s.key)->count() > 0)
        out[s.key] = values_.at(s.key);
      else if (file.contains(s.key))
        out[s.key] = file.at(s.key);
      else if (!s.fallback.empty())
        out[s.key] = s.fallback;
      else if (s.required)
        throw UsageError("missing required setting '" + s.key + "'");
    }
    return out;
  }

 private:
  std::vector<Setting> settings_;
  std::string config_;
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> flags_;
};

bool get_bool(const KeyValues& kv, const std::string& key) {
  const std::string v = get_string(kv, key, "false");
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("setting '" + key + "': expected true or false, got '" + v + "'");
}

std::string one_of(const KeyValues& kv, const std::string& key,
                   std::initializer_list<const char*> choices) {
  const std::string v = get_string(kv, key, "");
  for (const char* c : choices)
    if (v == c) return v;
  std::string list;
  for (const char* c : choices) list += (list.empty() ? "" : "|") + std::string(c);
  throw ConfigError("setting '" + key + "': expected " + list + ", got '" + v + "'");
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string metrics_line(const MetricsRow& r) {
  return r.id + "," + r.method + "," + csv_number(r.psnr_db) + "," + csv_number(r.ssim) + "\n";
}

constexpr const char* kMetricsHeader = "id,method,psnr_db,ssim\n";

void write_text(const fs::path& path, const std::string& text, bool append = false) {
  std::ofstream f(path, append ? std::ios::binary | std::ios::app : std::ios::binary | std::ios::trunc);
  if (!f) throw io::FormatError(path, "cannot open for writing");
  f << text;
  if (!f) throw io::FormatError(path, "write failed");
}

void snapshot(const fs::path& dir, const std::string& command, const KeyValues& kv) {
  fs::create_directories(dir);
  write_key_values(dir / (command + ".resolved.txt"), kv);
}

/// Images of a directory keyed by file stem, in name order.
std::vector<std::pair<std::string, Array2>> read_image_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".lact") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, Array2>> out;
  for (const auto& f : files) out.emplace_back(f.stem().string(), io::read_array(f));
  return out;
}

FilterSpec filter_from(const KeyValues& kv) {
  FilterSpec f;
  f.kind = one_of(kv, "filter", {"ram-lak", "hann"}) == "hann" ? FilterSpec::Kind::hann
                                                                : FilterSpec::Kind::ram_lak;
  f.cutoff = get_double(kv, "cutoff", 1.0);
  f.validate();
  return f;
}

// ---------------------------------------------------------------- phantom

struct PhantomCmd {
  CLI::App* app;
  Settings settings;
  explicit PhantomCmd(CLI::App& root)
      : app(root.add_subcommand("phantom", "write synthetic phantom images")),
        settings(app, {{"kind", "shepp-logan", "shepp-logan or random"},
                       {"size", "128", "image side in pixels"},
                       {"count", "1", "number of images"},
                       {"seed", "0", "seed of the first random phantom"},
                       {"ellipses", "8", "inserts per random phantom"},
                       {"pgm", "false", "also export 16-bit PGM"},
                       {"out", "", "output directory", true}}) {}

  int run(std::ostream& out) const {
    const KeyValues kv = settings.resolve();
    PhantomSpec spec;
    spec.kind = one_of(kv, "kind", {"shepp-logan", "random"}) == "random"
                    ? PhantomSpec::Kind::random_ellipses
                    : PhantomSpec::Kind::shepp_logan;
    spec.size = get_size(kv, "size", 128);
    spec.n_ellipses = get_size(kv, "ellipses", 8);
    const std::size_t count = get_size(kv, "count", 1);
    const std::uint64_t seed = get_u64(kv, "seed", 0);
    const bool pgm = get_bool(kv, "pgm");
    if (count == 0) throw UsageError("--count must be at least 1");
    spec.validate();

    const fs::path dir = get_string(kv, "out", "");
    fs::create_directories(dir);
    for (std::size_t i = 0; i < count; ++i) {
      spec.seed = seed + i;
      const Image img = make_phantom(spec);
      char id[32];
      std::snprintf(id, sizeof id, "phantom_%04zu", i);
      io::write_array(dir / (std::string(id) + ".lact"), img.values);
      if (pgm) io::write_pgm(dir / (std::string(id) + ".pgm"), io::to_pgm(img.values));
    }
    snapshot(dir, "phantom", kv);
    out << "wrote " << count << " phantom(s) to " << dir.string() << "\n";
    return ok;
  }
};

// ---------------------------------------------------------------- simulate

std::vector<Setting> scan_settings() {
  return {{"geometry", "parallel", "parallel or fan"},
          {"views", "", "full-scan view count (default 180 parallel, 360 fan)"},
          {"keep", "150", "acquired views, taken from the start of the scan"},
          {"detectors", "0", "parallel detector bins, 0 = fit the grid"},
          {"source_radius", "0", "fan source orbit radius in pixels, 0 = 4 x size"},
          {"fan_half_angle_deg", "0", "fan half angle, 0 = fit the grid"},
          {"detector_step_deg", "0.1", "fan detector angular step"}};
}

struct SimulateCmd {
  CLI::App* app;
  Settings settings;
  static std::vector<Setting> all() {
    auto s = scan_settings();
    s.push_back({"train", "0", "samples tagged train"});
    s.push_back({"val", "0", "samples tagged val, after the train ones; the rest are test"});
    s.push_back({"in", "", "directory of label images", true});
    s.push_back({"out", "", "dataset directory", true});
    return s;
  }
  explicit SimulateCmd(CLI::App& root)
      : app(root.add_subcommand("simulate", "build a limited-angle dataset from label images")),
        settings(app, all()) {}

  int run(std::ostream& out) const {
    KeyValues kv = settings.resolve();
    const bool fan = one_of(kv, "geometry", {"parallel", "fan"}) == "fan";
    if (!kv.contains("views")) kv["views"] = fan ? "360" : "180";
    const auto images = read_image_dir(get_string(kv, "in", ""));
    if (images.empty()) throw UsageError("no .lact images in '" + get_string(kv, "in", "") + "'");

    const Array2& first = images.front().second;
    if (first.rows() != first.cols())
      throw UsageError("label images must be square, got " + std::to_string(first.rows()) + "x" +
                       std::to_string(first.cols()));
    KeyValues scan_kv;
    for (const auto& k : ScanSpec::keys())
      if (kv.contains(k)) scan_kv[k] = kv.at(k);
    scan_kv["size"] = std::to_string(first.rows());
    const ScanSpec scan = ScanSpec::from_key_values(scan_kv);
    const ImageGrid grid = scan.grid();

    std::vector<std::pair<std::string, Image>> labels;
    for (const auto& [id, a] : images) {
      if (a.rows() != grid.height || a.cols() != grid.width)
        throw UsageError("image '" + id + "' is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", the scan grid is " +
                         std::to_string(grid.height) + "x" + std::to_string(grid.width));
      labels.emplace_back(id, Image(grid, a));
    }
    const Dataset ds =
        build_dataset(labels, scan, get_size(kv, "train", 0), get_size(kv, "val", 0));
    const fs::path dir = get_string(kv, "out", "");
    write_dataset(dir, ds);
    snapshot(dir, "simulate", kv);
    out << "wrote " << ds.samples.size() << " sample(s) to " << dir.string() << "\n";
    return ok;
  }
};

// ---------------------------------------------------------------- reconstruct

struct ReconstructCmd {
  CLI::App* app;
  Settings settings;
  explicit ReconstructCmd(CLI::App& root)
      : app(root.add_subcommand("reconstruct", "reconstruct every sample of a dataset")),
        settings(app, {{"method", "fbp", "fbp, cgls, tv or mgn"},
                       {"checkpoint", "", "model manifest (mgn)"},
                       {"split", "all", "all, train, val or test"},
                       {"filter", "ram-lak", "FBP filter: ram-lak or hann"},
                       {"cutoff", "1", "FBP filter cutoff as a fraction of Nyquist"},
                       {"cgls_iters", "50", "CGLS iterations"},
                       {"cgls_tol", "1e-6", "CGLS relative normal-residual tolerance"},
                       {"tv_lambda3", "100", "TV weight"},
                       {"tv_rho", "0.1", "ADMM penalty"},
                       {"tv_t5", "0.1", "u-step size"},
                       {"tv_max_iters", "300", "ADMM iteration cap"},
                       {"tv_epsilon", "1e-4", "relative-change stopping threshold"},
                       {"pgm", "false", "also export 16-bit PGM"},
                       {"in", "", "dataset directory", true},
                       {"out", "", "output directory", true},
                       {"metrics", "", "metrics CSV, appended to"}}) {}

  int run(std::ostream& out) const {
    const KeyValues kv = settings.resolve();
    const std::string method = one_of(kv, "method", {"fbp", "cgls", "tv", "mgn"});
    const std::string split = one_of(kv, "split", {"all", "train", "val", "test"});
    if (method == "mgn" && get_string(kv, "checkpoint", "").empty())
      throw UsageError("--method mgn needs --checkpoint");
    const FilterSpec filt = filter_from(kv);
    TvParams tv;
    tv.lambda3 = get_double(kv, "tv_lambda3", tv.lambda3);
    tv.rho = get_double(kv, "tv_rho", tv.rho);
    tv.t5 = get_double(kv, "tv_t5", tv.t5);
    tv.max_iters = get_size(kv, "tv_max_iters", tv.max_iters);
    tv.epsilon = get_double(kv, "tv_epsilon", tv.epsilon);
    tv.validate();
    const std::size_t cgls_iters = get_size(kv, "cgls_iters", 50);
    const double cgls_tol = get_double(kv, "cgls_tol", 1e-6);
    const bool pgm = get_bool(kv, "pgm");

    const Dataset ds = read_dataset(get_string(kv, "in", ""));
    std::vector<const Sample*> samples;
    for (const auto& s : ds.samples)
      if (split == "all" || s.split == split) samples.push_back(&s);
    const Geometry geom = ds.scan.geometry();

    std::vector<Image> images;
    if (method == "mgn") {
      auto model = mgn::MgnModel::from_checkpoint(nn::read_checkpoint(get_string(kv, "checkpoint", "")));
      if (model.config().scan.to_key_values() != ds.scan.to_key_values())
        throw UsageError("checkpoint scan does not match the dataset scan");
      images = mgn::reconstruct(model, samples);
    } else {
      for (const auto* s : samples) {
        if (method == "fbp")
          images.push_back(fbp_limited(s->limited, geom, filt));
        else if (method == "cgls")
          images.push_back(cgls(s->limited, geom, cgls_iters, cgls_tol).image);
        else
          images.push_back(tv_admm(s->limited, geom, tv, filt).image);
      }
    }

    const fs::path dir = get_string(kv, "out", "");
    fs::create_directories(dir);
    std::string rows;
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& id = samples[i]->id;
      io::write_array(dir / (id + ".lact"), images[i].values);
      if (pgm) io::write_pgm(dir / (id + ".pgm"), io::to_pgm(images[i].values));
      MetricsRow r{id, method, psnr(images[i], samples[i]->image_label),
                   ssim(images[i], samples[i]->image_label)};
      psnr_sum += r.psnr_db;
      ssim_sum += r.ssim;
      rows += metrics_line(r);
    }
    const std::string metrics = get_string(kv, "metrics", "");
    if (!metrics.empty()) {
      const bool fresh = !fs::exists(metrics) || fs::file_size(metrics) == 0;
      write_text(metrics, (fresh ? std::string(kMetricsHeader) : std::string()) + rows, true);
    }
    snapshot(dir, "reconstruct", kv);
    const auto n = static_cast<double>(std::max<std::size_t>(1, samples.size()));
    out << "reconstructed " << samples.size() << " sample(s) with " << method << "\n";
    out << "mean psnr_db " << io::format_double(psnr_sum / n) << " ssim "
        << io::format_double(ssim_sum / n) << "\n";
    return ok;
  }
};

// ---------------------------------------------------------------- train

struct TrainCmd {
  CLI::App* app;
  Settings settings;
  explicit TrainCmd(CLI::App& root)
      : app(root.add_subcommand("train", "train the unrolled network")),
        settings(app,
                 {{"data", "", "dataset directory", true},
                  {"checkpoint_dir", "", "output directory for model and history", true},
                  {"n_iter", "5", "iteration blocks"},
                  {"features", "64", "feature maps per hidden conv layer"},
                  {"lr", "0.001", "Adam learning rate"},
                  {"lambda", "0.5", "image/spectrum loss balance"},
                  {"batch_size", "1", "samples per step"},
                  {"epochs", "100", "passes over the train split"},
                  {"seed", "0", "initialisation and shuffling seed"}},
                 true) {}

  int run(std::ostream& out) const {
    const KeyValues kv = settings.resolve();
    const Dataset ds = read_dataset(get_string(kv, "data", ""));
    mgn::ModelConfig mc;
    mc.scan = ds.scan;
    mc.n_iter = get_size(kv, "n_iter", 5);
    mc.features = get_size(kv, "features", 64);
    mc.seed = get_u64(kv, "seed", 0);
    mgn::TrainConfig tc;
    tc.epochs = get_size(kv, "epochs", 100);
    tc.batch_size = get_size(kv, "batch_size", 1);
    tc.lr = get_double(kv, "lr", 0.001);
    tc.lambda = get_double(kv, "lambda", 0.5);
    tc.seed = mc.seed;
    if (mc.n_iter == 0 || mc.features == 0 || tc.batch_size == 0)
      throw UsageError("n_iter, features and batch_size must be positive");
    if (!(tc.lr > 0.0)) throw UsageError("lr must be positive");
    if (!(tc.lambda >= 0.0 && tc.lambda <= 1.0)) throw UsageError("lambda must lie in [0, 1]");

    const fs::path dir = get_string(kv, "checkpoint_dir", "");
    fs::create_directories(dir);
    snapshot(dir, "train", kv);
    mgn::MgnModel model(mc);
    std::string history = "epoch,mean_loss,val_psnr\n";
    mgn::train(model, ds, tc, [&](const mgn::EpochRecord& r) {
      const std::string line = std::to_string(r.epoch) + "," + io::format_double(r.mean_loss) +
                               "," + (std::isnan(r.val_psnr) ? "" : io::format_double(r.val_psnr)) +
                               "\n";
      history += line;
      out << "epoch " << line;
      out.flush();
    });
    nn::write_checkpoint(dir / "model.ckpt", model.to_checkpoint());
    write_text(dir / "history.csv", history);
    out << "checkpoint " << (dir / "model.ckpt").string() << "\n";
    return ok;
  }
};

// ---------------------------------------------------------------- eval

struct EvalCmd {
  CLI::App* app;
  Settings settings;
  explicit EvalCmd(CLI::App& root)
      : app(root.add_subcommand("eval", "score predicted images against labels")),
        settings(app, {{"pred", "", "directory of predicted <id>.lact images", true},
                       {"label", "", "dataset directory or directory of <id>.lact labels", true},
                       {"method", "pred", "method name written to the CSV"},
                       {"out", "", "metrics CSV to write", true}}) {}

  int run(std::ostream& out) const {
    const KeyValues kv = settings.resolve();
    const fs::path pred_dir = get_string(kv, "pred", "");
    const fs::path label_dir = get_string(kv, "label", "");
    const std::string method = get_string(kv, "method", "pred");
    auto preds = read_image_dir(pred_dir);

    std::map<std::string, Array2> labels;
    if (fs::exists(label_dir / "manifest.txt")) {
      for (auto& s : read_dataset(label_dir, false).samples)
        labels.emplace(s.id, std::move(s.image_label.values));
    } else {
      for (auto& [id, a] : read_image_dir(label_dir)) labels.emplace(id, std::move(a));
    }
    if (preds.size() != labels.size())
      throw std::runtime_error("eval: " + std::to_string(preds.size()) + " prediction(s) in '" +
                               pred_dir.string() + "' but " + std::to_string(labels.size()) +
                               " label(s) in '" + label_dir.string() + "'");

    std::string text = kMetricsHeader;
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (const auto& [id, p] : preds) {
      const auto it = labels.find(id);
      if (it == labels.end()) throw std::runtime_error("eval: no label for prediction '" + id + "'");
      const ImageGrid grid{it->second.cols(), it->second.rows(), 1.0};
      if (p.rows() != grid.height || p.cols() != grid.width)
        throw io::FormatError(pred_dir / (id + ".lact"), "shape does not match its label");
      MetricsRow r{id, method, psnr(Image(grid, p), Image(grid, it->second)),
                   ssim(Image(grid, p), Image(grid, it->second))};
      psnr_sum += r.psnr_db;
      ssim_sum += r.ssim;
      text += metrics_line(r);
    }
    const auto n = static_cast<double>(preds.size());
    const MetricsRow mean{"mean", method, preds.empty() ? 0.0 : psnr_sum / n,
                          preds.empty() ? 0.0 : ssim_sum / n};
    text += metrics_line(mean);
    const fs::path csv = get_string(kv, "out", "");
    if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
    write_text(csv, text);
    write_key_values(fs::path(csv.string() + ".resolved.txt"), kv);
    out << "mean psnr_db " << io::format_double(mean.psnr_db) << " ssim "
        << io::format_double(mean.ssim) << "\n";
    return ok;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Limited-angle CT toolkit"};
  app.name(args.empty() ? "lact" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  PhantomCmd phantom(app);
  SimulateCmd simulate(app);
  ReconstructCmd reconstruct(app);
  TrainCmd train(app);
  EvalCmd eval(app);

  try {
    std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rev.begin(), rev.end());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  }

  try {
    if (phantom.app->parsed()) return phantom.run(out);
    if (simulate.app->parsed()) return simulate.run(out);
    if (reconstruct.app->parsed()) return reconstruct.run(out);
    if (train.app->parsed()) return train.run(out);
    return eval.run(out);
  } catch (const mgn::TrainingDiverged& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical;
  } catch (const DivergedError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical;
  } catch (const nn::NonFiniteGradient& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace lact::cli
