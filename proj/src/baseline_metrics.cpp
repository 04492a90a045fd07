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

#include "evalkit/baseline_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <png.h>

#include "evalkit/error.hpp"
#include "evalkit/parallel.hpp"
#include "evalkit/tactile_metrics.hpp"

namespace evalkit {
namespace {

constexpr double kEigenTolerance = 1e-8;
constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = (0.01 * 255) * (0.01 * 255);
constexpr double kSsimC2 = (0.03 * 255) * (0.03 * 255);

// Symmetric PSD square root; eigenvalues in [-tol, 0) are treated as 0.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical,
                std::string("eigendecomposition failed for ") + what);
  }
  Eigen::VectorXd values = es.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < -kEigenTolerance) {
      throw Error(ErrorCode::kIllFormedCovariance,
                  std::string(what) + " has eigenvalue " +
                      std::to_string(values[i]) + " (not PSD)");
    }
    values[i] = std::sqrt(std::max(values[i], 0.0));
  }
  return es.eigenvectors() * values.asDiagonal() *
         es.eigenvectors().transpose();
}

double trace_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical, "eigendecomposition failed in FID");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()[i];
    if (v < -kEigenTolerance) {
      throw Error(ErrorCode::kIllFormedCovariance,
                  "covariance product has a negative eigenvalue " +
                      std::to_string(v));
    }
    s += std::sqrt(std::max(v, 0.0));
  }
  return s;
}

void check_same_size(const ImageGray& x, const ImageGray& y) {
  if (x.width != y.width || x.height != y.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "images are " + std::to_string(x.width) + "x" +
                    std::to_string(x.height) + " and " +
                    std::to_string(y.width) + "x" + std::to_string(y.height));
  }
}

std::array<double, kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow> w{};
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double u = i - kSsimWindow / 2;
    w[i] = std::exp(-(u * u) / (2.0 * kSsimSigma * kSsimSigma));
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += static_cast<double>(a[k]) * b[k];
    na += static_cast<double>(a[k]) * a[k];
    nb += static_cast<double>(b[k]) * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = static_cast<double>(a[k]) - b[k];
    s += diff * diff;
  }
  return s;
}

}  // namespace

GaussianFit fit_gaussian(const PointSet& points) {
  const std::size_t n = points.size();
  if (n < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "fitting a Gaussian needs at least 2 samples");
  }
  const std::size_t d = points.dim();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      x(points.values().data(), static_cast<Eigen::Index>(n),
        static_cast<Eigen::Index>(d));
  GaussianFit fit;
  fit.count = n;
  fit.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - fit.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) /
                        static_cast<double>(n - 1);
  // Mirror the upper triangle so the result is exactly symmetric.
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) cov(i, j) = cov(j, i);
  }
  fit.cov = std::move(cov);
  return fit;
}

GaussianFit fit_gaussian(const EmbeddingSet& set) {
  return fit_gaussian(PointSet::from(set));
}

double fid(const GaussianFit& a, const GaussianFit& b) {
  if (a.mean.size() != b.mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Gaussian fits have different dimensions");
  }
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const Eigen::MatrixXd root_a = psd_sqrt(a.cov, "first covariance");
  psd_sqrt(b.cov, "second covariance");  // validates PSD
  Eigen::MatrixXd product = root_a * b.cov * root_a;
  product = 0.5 * (product + product.transpose()).eval();
  const double value =
      mean_term + a.cov.trace() + b.cov.trace() - 2.0 * trace_sqrt(product);
  return std::max(value, 0.0);
}

MetricReport embedding_mmd(const EmbeddingSet& generated,
                           const EmbeddingSet& reference,
                           const MmdConfig& config) {
  auto report = tmmd(generated, reference, config);
  report.metric = "embedding-mmd";
  return report;
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) /
                                   1000u);
}

ImageGray gray_from_rgb(std::size_t width, std::size_t height,
                        std::span<const std::uint8_t> rgb) {
  if (rgb.size() != width * height * 3) {
    throw Error(ErrorCode::kDimensionMismatch,
                "RGB buffer size does not match image dimensions");
  }
  ImageGray image{width, height, std::vector<std::uint8_t>(width * height)};
  for (std::size_t i = 0; i < width * height; ++i) {
    image.pixels[i] = luma(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  }
  return image;
}

ImageGray load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::kIo, "cannot read PNG '" + path.string() +
                                    "': " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo,
                "cannot decode PNG '" + path.string() + "': " + message);
  }
  if (gray) {
    return ImageGray{image.width, image.height, std::move(buffer)};
  }
  return gray_from_rgb(image.width, image.height, buffer);
}

void write_png(const ImageGray& image, const std::filesystem::path& path) {
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.width);
  out.height = static_cast<png_uint_32>(image.height);
  out.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&out, path.string().c_str(), 0,
                               image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, "cannot write PNG '" + path.string() +
                                    "': " + out.message);
  }
}

double psnr(const ImageGray& x, const ImageGray& y) {
  check_same_size(x, y);
  if (x.pixels.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "PSNR of empty images");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    const double diff = static_cast<double>(x.pixels[i]) - y.pixels[i];
    sum += diff * diff;
  }
  const double mse = sum / static_cast<double>(x.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const ImageGray& x, const ImageGray& y) {
  check_same_size(x, y);
  if (x.width < kSsimWindow || x.height < kSsimWindow) {
    throw Error(ErrorCode::kInvalidArgument,
                "SSIM needs images of at least 11x11 pixels");
  }
  const auto w = gaussian_window();
  const std::size_t out_w = x.width - kSsimWindow + 1;
  const std::size_t out_h = x.height - kSsimWindow + 1;
  std::vector<double> row_means(out_h);
  parallel_for(out_h, [&](std::size_t oy) {
    double row_total = 0.0;
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int dy = 0; dy < kSsimWindow; ++dy) {
        for (int dx = 0; dx < kSsimWindow; ++dx) {
          const double weight = w[dy] * w[dx];
          const double a = x.at(ox + dx, oy + dy);
          const double b = y.at(ox + dx, oy + dy);
          mx += weight * a;
          my += weight * b;
          sxx += weight * (a * a);
          syy += weight * (b * b);
          sxy += weight * (a * b);
        }
      }
      const double var_x = sxx - mx * mx;
      const double var_y = syy - my * my;
      const double cov = sxy - mx * my;
      const double num = (2.0 * (mx * my) + kSsimC1) * (2.0 * cov + kSsimC2);
      const double den =
          (mx * mx + my * my + kSsimC1) * (var_x + var_y + kSsimC2);
      row_total += num / den;
    }
    row_means[oy] = row_total;
  });
  double total = 0.0;
  for (double v : row_means) total += v;
  return total / static_cast<double>(out_w * out_h);
}

RetrievalResult retrieval_topk(
    const EmbeddingSet& queries, const EmbeddingSet& gallery,
    const std::map<std::string, std::string>& pairing,
    std::span<const std::size_t> ks) {
  if (queries.dim() != gallery.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query and gallery embeddings have different dimensions");
  }
  if (queries.count() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "retrieval needs >= 1 query");
  }
  for (auto k : ks) {
    if (k == 0 || k > gallery.count()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "k=" + std::to_string(k) + " is outside [1, gallery size " +
                      std::to_string(gallery.count()) + "]");
    }
  }
  std::vector<std::size_t> targets(queries.count());
  for (std::size_t q = 0; q < queries.count(); ++q) {
    const auto& id = queries.ids()[q];
    auto it = pairing.find(id);
    if (it == pairing.end()) {
      throw Error(ErrorCode::kMissingSample,
                  "query '" + id + "' has no paired gallery id");
    }
    auto target = gallery.find(it->second);
    if (!target) {
      throw Error(ErrorCode::kMissingSample,
                  "paired gallery id '" + it->second + "' for query '" + id +
                      "' is not in the gallery");
    }
    targets[q] = *target;
  }

  RetrievalResult result;
  result.query_ids = queries.ids();
  result.ranks.assign(queries.count(), 0);
  parallel_for(queries.count(), [&](std::size_t q) {
    const auto query = queries.row(q);
    const std::size_t target = targets[q];
    const double true_sim = cosine(query, gallery.row(target));
    const auto& true_id = gallery.ids()[target];
    std::size_t ahead = 0;
    for (std::size_t g = 0; g < gallery.count(); ++g) {
      if (g == target) continue;
      const double sim = cosine(query, gallery.row(g));
      if (sim > true_sim || (sim == true_sim && gallery.ids()[g] < true_id)) {
        ++ahead;
      }
    }
    result.ranks[q] = ahead + 1;
  });

  auto fraction_within = [&](std::size_t k) {
    std::size_t hits = 0;
    for (auto r : result.ranks) hits += r <= k ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(result.ranks.size());
  };
  result.top1 = fraction_within(1);
  result.top5 = fraction_within(5);
  for (auto k : ks) result.top_k[k] = fraction_within(k);
  return result;
}

double knn_probe(const EmbeddingSet& train,
                 std::span<const std::string> train_labels,
                 const EmbeddingSet& test,
                 std::span<const std::string> test_labels, std::size_t k) {
  if (train.count() == 0) {
    throw Error(ErrorCode::kTooFewSamples, "k-NN probe needs training rows");
  }
  if (train_labels.size() != train.count() ||
      test_labels.size() != test.count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "label count does not match embedding count");
  }
  if (k == 0 || k % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "k must be a positive odd number");
  }
  if (k > train.count()) {
    throw Error(ErrorCode::kInvalidArgument,
                "k=" + std::to_string(k) + " exceeds the training set size " +
                    std::to_string(train.count()));
  }
  if (train.dim() != test.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "train and test embeddings have different dimensions");
  }
  if (test.count() == 0) return 0.0;

  std::vector<char> correct(test.count(), 0);
  parallel_for(test.count(), [&](std::size_t t) {
    std::vector<std::pair<double, std::size_t>> dist(train.count());
    for (std::size_t i = 0; i < train.count(); ++i) {
      dist[i] = {squared_distance(test.row(t), train.row(i)), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                      dist.end());
    // label -> (votes, summed distance)
    std::map<std::string, std::pair<std::size_t, double>> votes;
    for (std::size_t j = 0; j < k; ++j) {
      auto& v = votes[train_labels[dist[j].second]];
      v.first += 1;
      v.second += std::sqrt(dist[j].first);
    }
    const std::string* best = nullptr;
    std::size_t best_votes = 0;
    double best_mean = 0.0;
    for (const auto& [label, v] : votes) {  // lexicographic order
      const double mean = v.second / static_cast<double>(v.first);
      if (best == nullptr || v.first > best_votes ||
          (v.first == best_votes && mean < best_mean)) {
        best = &label;
        best_votes = v.first;
        best_mean = mean;
      }
    }
    correct[t] = *best == test_labels[t] ? 1 : 0;
  });
  const auto hits = std::accumulate(correct.begin(), correct.end(), std::size_t{0});
  return static_cast<double>(hits) / static_cast<double>(test.count());
}

}  // namespace evalkit
