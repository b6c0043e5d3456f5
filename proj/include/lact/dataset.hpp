#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lact/raster.hpp"
#include "lact/scan.hpp"

namespace lact {

/// One training or evaluation example. sino_label = project(image_label),
/// limited = restrict_views(sino_label), u0 = FBP of the zero-padded limited
/// sinogram.
struct Sample {
  std::string id;
  std::string split;  // train, val or test
  Image image_label;
  Sinogram sino_label;
  LimitedSinogram limited;
  Image u0;
};

Sample make_sample(std::string id, std::string split, Image label, const Geometry& geom,
                   const ViewSelection& sel);

struct Dataset {
  ScanSpec scan;
  std::vector<Sample> samples;

  std::vector<const Sample*> split(const std::string& name) const;
};

/// First n_train samples go to train, the next n_val to val, the rest to test.
Dataset build_dataset(const std::vector<std::pair<std::string, Image>>& labels, const ScanSpec& scan,
                      std::size_t n_train, std::size_t n_val);

// Layout: manifest.txt (key=value: format, scan keys, count, sample.<id> =
// split) plus <id>.image.lact, <id>.sino.lact, <id>.limited.lact, <id>.u0.lact.
void write_dataset(const std::filesystem::path& dir, const Dataset& ds);
/// Reloads a dataset. With verify set, each sample's sinograms are checked
/// against a fresh projection of its label (max abs error 1e-6).
Dataset read_dataset(const std::filesystem::path& dir, bool verify = true);

}  // namespace lact
