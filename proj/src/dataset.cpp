#include "feduhb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "feduhb/errors.hpp"

namespace feduhb {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;  // unsigned byte, rank 3
constexpr std::uint32_t kLabelMagic = 0x00000801;  // unsigned byte, rank 1

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path,
                        std::size_t offset) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw FormatError(path.string() + ": truncated at byte offset " +
                      std::to_string(offset));
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& image_path,
                 const std::filesystem::path& label_path) {
  std::ifstream images(image_path, std::ios::binary);
  if (!images) throw FormatError("cannot open " + image_path.string());
  std::ifstream labels(label_path, std::ios::binary);
  if (!labels) throw FormatError("cannot open " + label_path.string());

  const std::uint32_t image_magic = read_be32(images, image_path, 0);
  if (image_magic != kImageMagic) {
    throw FormatError(image_path.string() + ": bad magic at byte offset 0 (got 0x" +
                      std::to_string(image_magic) + ", want image magic 0x00000803)");
  }
  const std::uint32_t num_images = read_be32(images, image_path, 4);
  const std::uint32_t rows = read_be32(images, image_path, 8);
  const std::uint32_t cols = read_be32(images, image_path, 12);

  const std::uint32_t label_magic = read_be32(labels, label_path, 0);
  if (label_magic != kLabelMagic) {
    throw FormatError(label_path.string() + ": bad magic at byte offset 0 (got 0x" +
                      std::to_string(label_magic) + ", want label magic 0x00000801)");
  }
  const std::uint32_t num_labels = read_be32(labels, label_path, 4);
  if (num_images != num_labels) {
    throw FormatError("image/label count mismatch: " + std::to_string(num_images) +
                      " vs " + std::to_string(num_labels));
  }

  Dataset data;
  data.rows = rows;
  data.cols = cols;
  data.feature_dim = static_cast<std::size_t>(rows) * cols;
  data.features.resize(static_cast<std::size_t>(num_images) * data.feature_dim);
  data.labels.resize(num_images);

  std::vector<unsigned char> pixel_buf(data.feature_dim);
  for (std::uint32_t i = 0; i < num_images; ++i) {
    if (!images.read(reinterpret_cast<char*>(pixel_buf.data()), pixel_buf.size())) {
      throw FormatError(image_path.string() + ": truncated image payload at byte offset " +
                        std::to_string(16 + std::size_t(i) * data.feature_dim));
    }
    double* dst = data.features.data() + std::size_t(i) * data.feature_dim;
    for (std::size_t j = 0; j < data.feature_dim; ++j) {
      dst[j] = pixel_buf[j] / 255.0;  // pixel scaling happens at load time
    }
  }
  std::vector<unsigned char> label_buf(num_labels);
  if (!labels.read(reinterpret_cast<char*>(label_buf.data()), label_buf.size())) {
    throw FormatError(label_path.string() + ": truncated label payload at byte offset " +
                      std::to_string(8));
  }
  int max_label = 0;
  for (std::uint32_t i = 0; i < num_labels; ++i) {
    data.labels[i] = label_buf[i];
    max_label = std::max(max_label, data.labels[i]);
  }
  data.num_classes = max_label + 1;
  return data;
}

void save_idx(const Dataset& data, const std::filesystem::path& image_path,
              const std::filesystem::path& label_path) {
  if (data.rows * data.cols != data.feature_dim || data.rows == 0) {
    throw FormatError("save_idx: dataset has no image geometry");
  }
  std::ofstream images(image_path, std::ios::binary);
  if (!images) throw FormatError("cannot write " + image_path.string());
  write_be32(images, kImageMagic);
  write_be32(images, static_cast<std::uint32_t>(data.num_examples()));
  write_be32(images, static_cast<std::uint32_t>(data.rows));
  write_be32(images, static_cast<std::uint32_t>(data.cols));
  std::vector<unsigned char> pixel_buf(data.feature_dim);
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    const auto img = data.example(i);
    for (std::size_t j = 0; j < data.feature_dim; ++j) {
      const double v = std::clamp(img[j], 0.0, 1.0) * 255.0;
      pixel_buf[j] = static_cast<unsigned char>(std::lround(v));
    }
    images.write(reinterpret_cast<const char*>(pixel_buf.data()), pixel_buf.size());
  }

  std::ofstream labels(label_path, std::ios::binary);
  if (!labels) throw FormatError("cannot write " + label_path.string());
  write_be32(labels, kLabelMagic);
  write_be32(labels, static_cast<std::uint32_t>(data.num_examples()));
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    const unsigned char b = static_cast<unsigned char>(data.labels[i]);
    labels.write(reinterpret_cast<const char*>(&b), 1);
  }
}

PartitionPlan partition_iid(const Dataset& data, std::size_t num_clients, RngStream rng) {
  if (num_clients == 0) throw ConfigError("partition_iid: num_clients must be positive");
  if (data.num_examples() < num_clients) {
    throw ConfigError("partition_iid: fewer examples (" +
                      std::to_string(data.num_examples()) + ") than clients (" +
                      std::to_string(num_clients) + ")");
  }
  std::vector<std::size_t> order(data.num_examples());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  PartitionPlan plan;
  plan.client_shards.resize(num_clients);
  for (std::size_t i = 0; i < order.size(); ++i) {
    plan.client_shards[i % num_clients].push_back(order[i]);
  }
  return plan;
}

void stamp_trigger(std::span<double> image, std::size_t rows, std::size_t cols,
                   const TriggerSpec& spec) {
  if (spec.row + spec.height > rows || spec.col + spec.width > cols) {
    throw ConfigError("trigger patch out of image bounds");
  }
  for (std::size_t r = spec.row; r < spec.row + spec.height; ++r) {
    for (std::size_t c = spec.col; c < spec.col + spec.width; ++c) {
      image[r * cols + c] = spec.value;
    }
  }
}

std::vector<std::size_t> inject_backdoor(Dataset& data, std::span<const std::size_t> shard,
                                         const TriggerSpec& spec, RngStream rng) {
  if (spec.poison_fraction <= 0.0 || spec.poison_fraction > 1.0) {
    throw ConfigError("poison_fraction must lie in (0, 1]");
  }
  if (spec.row + spec.height > data.rows || spec.col + spec.width > data.cols) {
    throw ConfigError("trigger patch out of image bounds");
  }
  const std::size_t count =
      static_cast<std::size_t>(std::ceil(spec.poison_fraction * double(shard.size())));
  std::vector<std::size_t> pool(shard.begin(), shard.end());
  rng.shuffle(pool);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  for (std::size_t idx : pool) {
    stamp_trigger(data.mutable_example(idx), data.rows, data.cols, spec);
    if (spec.relabel) data.labels[idx] = spec.target_label;
  }
  return pool;
}

std::pair<Dataset, Dataset> gen_synthetic_images(const SyntheticImageSpec& spec,
                                                 std::uint64_t seed) {
  if (spec.num_classes < 2) throw ConfigError("synthetic images need >= 2 classes");
  if (spec.rows < 2 * spec.margin || spec.cols < 2 * spec.margin) {
    throw ConfigError("synthetic image margin exceeds image size");
  }
  RngStream rng(seed, StreamPurpose::kDataGen);

  // One high-contrast template per class: a sparse coarse blob mask
  // upsampled bilinearly, with the margin band forced dark so trigger
  // patches land on near-empty pixels. Sparse masks keep the classes
  // close to orthogonal, so the problem is linearly separable before
  // noise is added.
  const std::size_t grid = 6;
  std::vector<std::vector<double>> templates(spec.num_classes);
  for (int k = 0; k < spec.num_classes; ++k) {
    RngStream trng = rng.derive(0x7E5A + static_cast<std::uint64_t>(k));
    std::vector<double> coarse(grid * grid);
    for (double& v : coarse) v = trng.uniform() < 0.35 ? 1.0 : 0.0;
    std::vector<double>& tmpl = templates[k];
    tmpl.resize(spec.rows * spec.cols, 0.0);
    const std::size_t inner_rows = spec.rows - 2 * spec.margin;
    const std::size_t inner_cols = spec.cols - 2 * spec.margin;
    for (std::size_t r = 0; r < inner_rows; ++r) {
      for (std::size_t c = 0; c < inner_cols; ++c) {
        const double gr = (grid - 1) * double(r) / double(inner_rows - 1);
        const double gc = (grid - 1) * double(c) / double(inner_cols - 1);
        const std::size_t r0 = static_cast<std::size_t>(gr);
        const std::size_t c0 = static_cast<std::size_t>(gc);
        const std::size_t r1 = std::min(r0 + 1, grid - 1);
        const std::size_t c1 = std::min(c0 + 1, grid - 1);
        const double fr = gr - double(r0);
        const double fc = gc - double(c0);
        const double v = (1 - fr) * ((1 - fc) * coarse[r0 * grid + c0] +
                                     fc * coarse[r0 * grid + c1]) +
                         fr * ((1 - fc) * coarse[r1 * grid + c0] +
                               fc * coarse[r1 * grid + c1]);
        tmpl[(r + spec.margin) * spec.cols + (c + spec.margin)] = 0.85 * v;
      }
    }
  }

  auto make_split = [&](std::size_t n, std::size_t duplicates, RngStream srng) {
    duplicates = std::max<std::size_t>(1, duplicates);
    const std::size_t unique = (n + duplicates - 1) / duplicates;
    Dataset d;
    d.rows = spec.rows;
    d.cols = spec.cols;
    d.feature_dim = spec.rows * spec.cols;
    d.num_classes = spec.num_classes;
    d.features.resize(n * d.feature_dim);
    d.labels.resize(n);
    for (std::size_t i = 0; i < unique; ++i) {
      const int label = static_cast<int>(srng.below(spec.num_classes));
      int observed = label;
      if (spec.label_noise > 0.0 && srng.uniform() < spec.label_noise) {
        observed = static_cast<int>(srng.below(spec.num_classes));
      }
      double* dst = d.features.data() + (i * duplicates) * d.feature_dim;
      const std::vector<double>& tmpl = templates[label];
      for (std::size_t j = 0; j < d.feature_dim; ++j) {
        const double raw = tmpl[j] + spec.noise * srng.normal();
        const double byte = std::clamp(std::round(raw * 255.0), 0.0, 255.0);
        dst[j] = byte / 255.0;  // 8-bit quantized so IDX round-trips exactly
      }
      for (std::size_t c = 0; c < duplicates && i * duplicates + c < n; ++c) {
        const std::size_t at = i * duplicates + c;
        d.labels[at] = observed;
        if (c > 0) {
          std::copy_n(dst, d.feature_dim, d.features.data() + at * d.feature_dim);
        }
      }
    }
    return d;
  };

  // Test examples are always fresh draws, never copies of training data.
  Dataset train = make_split(spec.num_train, spec.duplicates, rng.derive(0x12A1));
  Dataset test = make_split(spec.num_test, 1, rng.derive(0x35B2));
  return {std::move(train), std::move(test)};
}

}  // namespace feduhb
