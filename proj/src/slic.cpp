#include "sbglsu/slic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "sbglsu/errors.hpp"

namespace sbglsu {

void SlicParams::validate() const {
  if (superpixel_size < 1) throw ParameterError("superpixel_size must be >= 1");
  if (!(compactness > 0.0)) throw ParameterError("compactness must be > 0");
  if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (!(min_region_fraction > 0.0 && min_region_fraction <= 1.0)) {
    throw ParameterError("min_region_fraction must be in (0, 1]");
  }
}

SuperpixelMap::SuperpixelMap(std::size_t height, std::size_t width,
                             std::vector<std::uint32_t> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (labels_.size() != height_ * width_) {
    throw ShapeError("label map has " + std::to_string(labels_.size()) + " entries, expected " +
                     std::to_string(height_ * width_));
  }
  if (labels_.empty()) return;
  const std::uint32_t max_label = *std::max_element(labels_.begin(), labels_.end());
  std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
  for (const auto l : labels_) seen[l] = true;
  for (std::size_t l = 0; l < seen.size(); ++l) {
    if (!seen[l]) throw FormatError("label map is not dense: label " + std::to_string(l) + " missing");
  }
  region_count_ = seen.size();
}

std::vector<std::vector<std::size_t>> SuperpixelMap::regions() const {
  std::vector<std::vector<std::size_t>> out(region_count_);
  for (std::size_t p = 0; p < labels_.size(); ++p) out[labels_[p]].push_back(p);
  return out;
}

namespace {

// Per-pixel gradient magnitude: squared spectral differences of the vertical
// and horizontal 4-neighbours (clamped at the border), summed over bands.
double gradient(const HsiCube& cube, std::size_t r, std::size_t c) {
  const std::size_t h = cube.height(), w = cube.width();
  const auto up = cube.spectrum(pixel_index(r > 0 ? r - 1 : r, c, w));
  const auto down = cube.spectrum(pixel_index(r + 1 < h ? r + 1 : r, c, w));
  const auto left = cube.spectrum(pixel_index(r, c > 0 ? c - 1 : c, w));
  const auto right = cube.spectrum(pixel_index(r, c + 1 < w ? c + 1 : c, w));
  double g = 0.0;
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    const double dv = down[b] - up[b];
    const double dh = right[b] - left[b];
    g += dv * dv + dh * dh;
  }
  return g;
}

std::vector<double> seed_positions(std::size_t extent, std::size_t step) {
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(static_cast<double>(extent) / static_cast<double>(step))));
  const double spacing = static_cast<double>(extent) / static_cast<double>(count);
  std::vector<double> pos(count);
  // Cell centres, so a zero-gradient image reproduces the grid exactly.
  for (std::size_t i = 0; i < count; ++i) pos[i] = (static_cast<double>(i) + 0.5) * spacing - 0.5;
  return pos;
}

kernels::SlicCenters initial_centers(const HsiCube& cube, std::size_t step) {
  const auto rows = seed_positions(cube.height(), step);
  const auto cols = seed_positions(cube.width(), step);
  kernels::SlicCenters centers;
  centers.spectra.resize(static_cast<Eigen::Index>(cube.bands()),
                         static_cast<Eigen::Index>(rows.size() * cols.size()));
  const auto h = static_cast<std::ptrdiff_t>(cube.height());
  const auto w = static_cast<std::ptrdiff_t>(cube.width());
  for (const double r0 : rows) {
    for (const double c0 : cols) {
      const auto br = static_cast<std::ptrdiff_t>(std::lround(r0));
      const auto bc = static_cast<std::ptrdiff_t>(std::lround(c0));
      double r = r0, c = c0;
      std::size_t pr = static_cast<std::size_t>(br), pc = static_cast<std::size_t>(bc);
      double best = gradient(cube, pr, pc);
      // Move only on a strictly lower gradient; scan order fixes ties.
      for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
          const std::ptrdiff_t nr = br + dr, nc = bc + dc;
          if (nr < 0 || nc < 0 || nr >= h || nc >= w) continue;
          const double g = gradient(cube, static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
          if (g < best) {
            best = g;
            r = static_cast<double>(nr);
            c = static_cast<double>(nc);
            pr = static_cast<std::size_t>(nr);
            pc = static_cast<std::size_t>(nc);
          }
        }
      }
      const auto k = static_cast<Eigen::Index>(centers.row.size());
      const auto spec = cube.spectrum(pixel_index(pr, pc, cube.width()));
      centers.spectra.col(k) = Eigen::Map<const Vector>(spec.data(), static_cast<Eigen::Index>(spec.size()));
      centers.row.push_back(r);
      centers.col.push_back(c);
    }
  }
  return centers;
}

}  // namespace

SuperpixelMap segment(const HsiCube& cube, const SlicParams& params, Execution exec) {
  params.validate();
  if (cube.pixels() == 0 || cube.bands() == 0) throw ParameterError("cube must be non-empty");
  if (params.superpixel_size > std::max(cube.height(), cube.width())) {
    throw ParameterError("superpixel_size " + std::to_string(params.superpixel_size) +
                         " exceeds both image dimensions (" + std::to_string(cube.height()) + "x" +
                         std::to_string(cube.width()) + ")");
  }
  const std::size_t step = params.superpixel_size;
  auto centers = initial_centers(cube, step);
  const kernels::SlicWindow window{step, params.compactness / static_cast<double>(step)};
  std::vector<std::int32_t> labels(cube.pixels(), -1);

  for (std::size_t it = 0; it < params.max_iters; ++it) {
    const auto buckets = kernels::CenterBuckets::build(centers, cube.height(), cube.width(), step);
    const std::size_t changed = kernels::slic_assign(exec, cube, centers, buckets, window, labels);
    if (changed == 0) break;
    kernels::slic_update_centers(exec, cube, labels, centers);
  }
  return enforce_connectivity(labels, cube.height(), cube.width(), params);
}

SuperpixelMap enforce_connectivity(std::span<const std::int32_t> labels, std::size_t height,
                                   std::size_t width, const SlicParams& params) {
  params.validate();
  const std::size_t n = height * width;
  if (labels.size() != n) throw ShapeError("label array does not match image size");
  if (n == 0) return SuperpixelMap(height, width, {});

  const auto neighbours = [height, width](std::size_t p, auto&& fn) {
    const std::size_t r = p / width, c = p % width;
    if (r > 0) fn(p - width);
    if (r + 1 < height) fn(p + width);
    if (c > 0) fn(p - 1);
    if (c + 1 < width) fn(p + 1);
  };

  // 4-connected components of equal raw label, numbered in row-major discovery order.
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, kUnset);
  std::vector<std::vector<std::size_t>> members;
  std::deque<std::size_t> queue;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] != kUnset) continue;
    const std::size_t id = members.size();
    members.emplace_back();
    comp[start] = id;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      members[id].push_back(p);
      neighbours(p, [&](std::size_t q) {
        if (comp[q] == kUnset && labels[q] == labels[start]) {
          comp[q] = id;
          queue.push_back(q);
        }
      });
    }
  }

  const double side = static_cast<double>(params.superpixel_size);
  const double min_size = params.min_region_fraction * side * side;
  bool merged = true;
  while (merged && members.size() > 1) {
    merged = false;
    for (std::size_t id = 0; id < members.size(); ++id) {
      if (members[id].empty() || static_cast<double>(members[id].size()) >= min_size) continue;
      std::size_t target = kUnset;
      for (const std::size_t p : members[id]) {
        neighbours(p, [&](std::size_t q) {
          const std::size_t other = comp[q];
          if (other == id) return;
          if (target == kUnset || members[other].size() > members[target].size() ||
              (members[other].size() == members[target].size() && other < target)) {
            target = other;
          }
        });
      }
      if (target == kUnset) continue;
      for (const std::size_t p : members[id]) comp[p] = target;
      auto& dst = members[target];
      dst.insert(dst.end(), members[id].begin(), members[id].end());
      members[id].clear();
      merged = true;
    }
  }

  std::vector<std::uint32_t> dense(n);
  std::vector<std::uint32_t> remap(members.size(), static_cast<std::uint32_t>(-1));
  std::uint32_t next = 0;
  for (std::size_t p = 0; p < n; ++p) {
    auto& slot = remap[comp[p]];
    if (slot == static_cast<std::uint32_t>(-1)) slot = next++;
    dense[p] = slot;
  }
  return SuperpixelMap(height, width, std::move(dense));
}

}  // namespace sbglsu
