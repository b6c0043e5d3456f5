#include "lact/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "lact/io.hpp"
#include "lact/iterative.hpp"
#include "lact/projector.hpp"

namespace lact {

namespace {

constexpr const char* kFormat = "lact-dataset-1";

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
  });
}

double max_abs_diff(const Array2& a, const Array2& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.flat()[i] - b.flat()[i]));
  return m;
}

}  // namespace

Sample make_sample(std::string id, std::string split, Image label, const Geometry& geom,
                   const ViewSelection& sel) {
  check_matches(label, geom);
  Sample s;
  s.id = std::move(id);
  s.split = std::move(split);
  s.sino_label = project(label, geom);
  s.limited = restrict_views(s.sino_label, sel);
  s.u0 = fbp_limited(s.limited, geom);
  s.image_label = std::move(label);
  return s;
}

std::vector<const Sample*> Dataset::split(const std::string& name) const {
  std::vector<const Sample*> out;
  for (const auto& s : samples)
    if (s.split == name) out.push_back(&s);
  return out;
}

Dataset build_dataset(const std::vector<std::pair<std::string, Image>>& labels, const ScanSpec& scan,
                      std::size_t n_train, std::size_t n_val) {
  if (n_train + n_val > labels.size())
    throw std::invalid_argument("build_dataset: split sizes exceed the " +
                                std::to_string(labels.size()) + " available images");
  Dataset ds;
  ds.scan = scan;
  const Geometry geom = scan.geometry();
  const ViewSelection sel = scan.selection();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& [id, img] = labels[i];
    if (!valid_id(id)) throw std::invalid_argument("build_dataset: bad sample id '" + id + "'");
    const char* split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    ds.samples.push_back(make_sample(id, split, img, geom, sel));
  }
  return ds;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  KeyValues kv = ds.scan.to_key_values();
  kv["format"] = kFormat;
  kv["count"] = std::to_string(ds.samples.size());
  for (const auto& s : ds.samples) {
    if (!kv.emplace("sample." + s.id, s.split).second)
      throw std::invalid_argument("write_dataset: duplicate sample id '" + s.id + "'");
    io::write_array(dir / (s.id + ".image.lact"), s.image_label.values);
    io::write_array(dir / (s.id + ".sino.lact"), s.sino_label.values);
    io::write_array(dir / (s.id + ".limited.lact"), s.limited.values);
    io::write_array(dir / (s.id + ".u0.lact"), s.u0.values);
  }
  write_key_values(dir / "manifest.txt", kv);
}

Dataset read_dataset(const std::filesystem::path& dir, bool verify) {
  const auto manifest = dir / "manifest.txt";
  KeyValues kv;
  try {
    kv = read_key_values(manifest);
  } catch (const ConfigError& e) {
    throw io::FormatError(manifest, e.what());
  }
  if (get_string(kv, "format", "") != kFormat)
    throw io::FormatError(manifest, "not a dataset manifest");

  Dataset ds;
  KeyValues scan_kv;
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [k, v] : kv) {
    if (ScanSpec::keys().contains(k))
      scan_kv[k] = v;
    else if (k.rfind("sample.", 0) == 0)
      entries.emplace_back(k.substr(7), v);
    else if (k != "format" && k != "count")
      throw io::FormatError(manifest, "unknown key '" + k + "'");
  }
  try {
    ds.scan = ScanSpec::from_key_values(scan_kv);
  } catch (const ConfigError& e) {
    throw io::FormatError(manifest, e.what());
  }
  if (get_size(kv, "count", 0) != entries.size())
    throw io::FormatError(manifest, "count does not match the sample entries");

  const Geometry geom = ds.scan.geometry();
  const ViewSelection sel = ds.scan.selection();
  const ImageGrid grid = ds.scan.grid();
  const auto load = [&](const std::string& id, const char* what, std::size_t rows,
                        std::size_t cols) {
    const auto path = dir / (id + "." + what + ".lact");
    Array2 a = io::read_array(path);
    if (a.rows() != rows || a.cols() != cols)
      throw io::FormatError(path, "shape " + std::to_string(a.rows()) + "x" +
                                      std::to_string(a.cols()) + " does not match the manifest");
    return a;
  };
  for (const auto& [id, split] : entries) {
    if (!valid_id(id)) throw io::FormatError(manifest, "bad sample id '" + id + "'");
    if (split != "train" && split != "val" && split != "test")
      throw io::FormatError(manifest, "sample '" + id + "' has unknown split '" + split + "'");
    Sample s;
    s.id = id;
    s.split = split;
    s.image_label = Image(grid, load(id, "image", grid.height, grid.width));
    s.sino_label = Sinogram(load(id, "sino", n_angles(geom), n_detectors(geom)));
    s.limited = LimitedSinogram{sel, load(id, "limited", sel.size(), n_detectors(geom))};
    s.u0 = Image(grid, load(id, "u0", grid.height, grid.width));
    if (verify) {
      const Sinogram fresh = project(s.image_label, geom);
      if (max_abs_diff(fresh.values, s.sino_label.values) > 1e-6)
        throw io::FormatError(dir / (id + ".sino.lact"), "inconsistent with its image label");
      if (max_abs_diff(restrict_views(fresh, sel).values, s.limited.values) > 1e-6)
        throw io::FormatError(dir / (id + ".limited.lact"), "inconsistent with its image label");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace lact
