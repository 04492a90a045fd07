/*
 * Copyright 2026 The tactile-evalkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Baseline metrics used for comparison: FID on embedding Gaussians, plain
// embedding MMD, PSNR/SSIM on 8-bit luma images, cross-modal top-k retrieval
// and a k-NN classification probe.

#ifndef EVALKIT_BASELINE_METRICS_HPP_
#define EVALKIT_BASELINE_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "evalkit/embedding_store.hpp"
#include "evalkit/kernel_mmd.hpp"
#include "evalkit/report.hpp"

namespace evalkit {

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased, divisor n - 1
  std::size_t count = 0;
};

GaussianFit fit_gaussian(const PointSet& points);
GaussianFit fit_gaussian(const EmbeddingSet& set);

// Frechet distance between two Gaussian fits:
//   |mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2)
double fid(const GaussianFit& a, const GaussianFit& b);

// Same estimator as tmmd, reported under its own label.
MetricReport embedding_mmd(const EmbeddingSet& generated,
                           const EmbeddingSet& reference,
                           const MmdConfig& config);

struct ImageGray {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(std::size_t x, std::size_t y) const {
    return pixels[y * width + x];
  }
};

// BT.601 luma, rounded half-up: (299 R + 587 G + 114 B + 500) / 1000.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);
ImageGray gray_from_rgb(std::size_t width, std::size_t height,
                        std::span<const std::uint8_t> rgb);

ImageGray load_png(const std::filesystem::path& path);
void write_png(const ImageGray& image, const std::filesystem::path& path);

// Peak signal-to-noise ratio in dB; +infinity when the images are equal.
double psnr(const ImageGray& x, const ImageGray& y);

// Mean single-scale SSIM over all valid 11x11 Gaussian (sigma 1.5) windows.
double ssim(const ImageGray& x, const ImageGray& y);

struct RetrievalResult {
  double top1 = 0.0;
  double top5 = 0.0;
  std::map<std::size_t, double> top_k;  // requested k -> hit fraction
  std::vector<std::string> query_ids;
  std::vector<std::size_t> ranks;  // 1-based rank of the true item
};

// Ranks the gallery by descending cosine similarity to each query (ties by
// ascending gallery id). `pairing` maps query id -> true gallery id.
RetrievalResult retrieval_topk(const EmbeddingSet& queries,
                               const EmbeddingSet& gallery,
                               const std::map<std::string, std::string>& pairing,
                               std::span<const std::size_t> ks);

// Fraction of test rows whose k-nearest-neighbor vote (Euclidean) matches
// their label. Vote ties go to the smallest mean distance, then the
// lexicographically smallest label.
double knn_probe(const EmbeddingSet& train,
                 std::span<const std::string> train_labels,
                 const EmbeddingSet& test,
                 std::span<const std::string> test_labels, std::size_t k);

}  // namespace evalkit

#endif  // EVALKIT_BASELINE_METRICS_HPP_
