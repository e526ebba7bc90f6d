#pragma once

// Synthetic prompt-product pools.
//
// Each category owns a fixed population of products (phi, sigma). Categories
// are grouped into quality classes; a category's mean is its class mean plus a
// small uniform offset, and phi, sigma are drawn independently from a Beta
// distribution with that mean, so E[q] equals the category mean.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbt/errors.hpp"
#include "pbt/market.hpp"
#include "pbt/rng.hpp"
#include "pbt/text.hpp"

namespace pbt {

/// A contiguous block of categories sharing a class mean quality.
struct ClassBound {
  CategoryId first = 1;
  CategoryId last = 1;
  double mean = 0.5;

  friend bool operator==(const ClassBound&, const ClassBound&) = default;
};

/// Mean qualities of the four generator classes (20 categories each): SD, LD, GLIDE, DALL-E mini.
inline constexpr std::array<double, 4> kGeneratorClassMeans{0.778, 0.775, 0.548, 0.668};
inline constexpr std::size_t kCategoriesPerClass = 20;

/// Class layout for the first n categories: blocks of 20 cycling through the
/// four generator classes, so n = 80 reproduces the full table and n < 80 is
/// a prefix of it.
inline std::vector<ClassBound> generator_class_bounds(std::size_t n) {
  std::vector<ClassBound> out;
  for (CategoryId first = 1, k = 0; first <= n; first += kCategoriesPerClass, ++k) {
    out.push_back({first, std::min<CategoryId>(first + kCategoriesPerClass - 1, n),
                   kGeneratorClassMeans[k % kGeneratorClassMeans.size()]});
  }
  return out;
}

/// The 80 MSCOCO object categories, used as default labels.
inline const std::vector<std::string>& default_category_labels() {
  static const std::vector<std::string> labels{
      "person",        "bicycle",      "car",           "motorcycle",    "airplane",     "bus",
      "train",         "truck",        "boat",          "traffic light", "fire hydrant", "stop sign",
      "parking meter", "bench",        "bird",          "cat",           "dog",          "horse",
      "sheep",         "cow",          "elephant",      "bear",          "zebra",        "giraffe",
      "backpack",      "umbrella",     "handbag",       "tie",           "suitcase",     "frisbee",
      "skis",          "snowboard",    "sports ball",   "kite",          "baseball bat", "baseball glove",
      "skateboard",    "surfboard",    "tennis racket", "bottle",        "wine glass",   "cup",
      "fork",          "knife",        "spoon",         "bowl",          "banana",       "apple",
      "sandwich",      "orange",       "broccoli",      "carrot",        "hot dog",      "pizza",
      "donut",         "cake",         "chair",         "couch",         "potted plant", "bed",
      "dining table",  "toilet",       "tv",            "laptop",        "mouse",        "remote",
      "keyboard",      "cell phone",   "microwave",     "oven",          "toaster",      "sink",
      "refrigerator",  "book",         "clock",         "vase",          "scissors",     "teddy bear",
      "hair drier",    "toothbrush"};
  return labels;
}

struct PoolSpec {
  std::size_t n_categories = 80;
  std::size_t per_category = 250;
  /// Empty means generator_class_bounds(n_categories).
  std::vector<ClassBound> class_bounds;
  double jitter = 0.05;
  double concentration = 10.0;
  std::uint64_t seed = 42;

  std::vector<ClassBound> resolved_bounds() const {
    return class_bounds.empty() ? generator_class_bounds(n_categories) : class_bounds;
  }

  void validate() const {
    if (n_categories == 0) throw ConfigError("pool needs n_categories >= 1");
    if (per_category == 0) throw ConfigError("pool needs per_category >= 1");
    if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw ConfigError("pool jitter must be >= 0");
    if (!(concentration > 0.0) || !std::isfinite(concentration)) throw ConfigError("pool concentration must be > 0");
    auto bounds = resolved_bounds();
    std::sort(bounds.begin(), bounds.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    CategoryId next = 1;
    for (const auto& b : bounds) {
      if (b.first != next || b.last < b.first) throw ConfigError("class bounds must partition categories 1..N");
      if (!(b.mean > 0.0 && b.mean < 1.0)) throw ConfigError("class mean quality must lie in (0,1)");
      next = b.last + 1;
    }
    if (next != n_categories + 1) throw ConfigError("class bounds must partition categories 1..N");
  }

  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

/// Immutable per-category product populations.
class PromptPool {
public:
  PromptPool() = default;

  explicit PromptPool(std::vector<std::vector<QualityObservation>> products,
                      std::map<CategoryId, std::string> labels = {})
      : products_(std::move(products)), labels_(std::move(labels)) {
    true_means_.reserve(products_.size());
    for (const auto& cat : products_) {
      if (cat.empty()) throw ConfigError("every pool category needs at least one product");
      double s = 0.0;
      for (const auto& o : cat) s += o.q;
      true_means_.push_back(s / static_cast<double>(cat.size()));
    }
  }

  std::size_t n_categories() const noexcept { return products_.size(); }
  bool contains(CategoryId id) const noexcept { return id >= 1 && id <= products_.size(); }

  const std::vector<QualityObservation>& products(CategoryId id) const {
    if (!contains(id)) throw ConfigError("unknown category id " + std::to_string(id));
    return products_[id - 1];
  }

  /// Empirical mean of q over the category's products.
  double true_mean(CategoryId id) const {
    if (!contains(id)) throw ConfigError("unknown category id " + std::to_string(id));
    return true_means_[id - 1];
  }
  const std::vector<double>& true_means() const noexcept { return true_means_; }

  const std::map<CategoryId, std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const PromptPool& x, const PromptPool& y) {
    return x.products_ == y.products_ && x.labels_ == y.labels_;
  }

private:
  std::vector<std::vector<QualityObservation>> products_;
  std::vector<double> true_means_;
  std::map<CategoryId, std::string> labels_;
};

namespace detail {

inline double sample_beta(std::mt19937_64& gen, double alpha, double beta, double mean) {
  std::gamma_distribution<double> gx(alpha, 1.0);
  std::gamma_distribution<double> gy(beta, 1.0);
  const double x = gx(gen);
  const double y = gy(gen);
  if (!(x + y > 0.0)) return mean;
  return std::clamp(x / (x + y), 0.0, 1.0);
}

}  // namespace detail

/// Synthesizes a pool. Category i's products depend only on (seed, i).
inline PromptPool generate_pool(const PoolSpec& spec) {
  spec.validate();
  const auto bounds = spec.resolved_bounds();
  std::vector<std::vector<QualityObservation>> products(spec.n_categories);
  std::map<CategoryId, std::string> labels;
  const auto& names = default_category_labels();

  for (const auto& cls : bounds) {
    for (CategoryId id = cls.first; id <= cls.last; ++id) {
      std::mt19937_64 gen(hash_key(spec.seed, Stream::kPool, {id}));
      std::uniform_real_distribution<double> offset(-spec.jitter, spec.jitter);
      const double mu = std::clamp(cls.mean + offset(gen), 0.02, 0.98);
      const double alpha = mu * spec.concentration;
      const double beta = (1.0 - mu) * spec.concentration;
      auto& cat = products[id - 1];
      cat.reserve(spec.per_category);
      for (std::size_t j = 0; j < spec.per_category; ++j) {
        const double phi = detail::sample_beta(gen, alpha, beta, mu);
        const double sigma = detail::sample_beta(gen, alpha, beta, mu);
        cat.push_back(QualityObservation::make(phi, sigma));
      }
      if (id <= names.size()) labels.emplace(id, names[id - 1]);
    }
  }
  return PromptPool(std::move(products), std::move(labels));
}

/// Coordinates of one bundle draw: master seed and iteration.
struct DrawKey {
  std::uint64_t seed = 0;
  std::size_t t = 0;
};

/// m products drawn uniformly with replacement; slot j uses hash(seed, t, category, j).
inline std::vector<QualityObservation> draw_bundle(const PromptPool& pool, CategoryId category, std::size_t m,
                                                   DrawKey key) {
  const auto& products = pool.products(category);
  if (m == 0) throw ConfigError("bundle size must be >= 1");
  std::vector<QualityObservation> bundle;
  bundle.reserve(m);
  for (std::size_t slot = 0; slot < m; ++slot) {
    const auto bits = hash_key(key.seed, Stream::kBundleDraw, {key.t, category, slot});
    bundle.push_back(products[to_index(bits, products.size())]);
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Persistence: CSV `category_id,prompt_id,phi,sigma` plus an optional
// `<path>.labels.json` sidecar mapping category id to label.

inline constexpr std::string_view kPoolHeader = "category_id,prompt_id,phi,sigma";

inline std::filesystem::path labels_sidecar(const std::filesystem::path& pool_path) {
  auto p = pool_path;
  p += ".labels.json";
  return p;
}

inline void save_pool(const PromptPool& pool, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open pool file for writing: " + path.string());
  out << kPoolHeader << '\n';
  for (CategoryId id = 1; id <= pool.n_categories(); ++id) {
    std::size_t prompt = 1;
    for (const auto& o : pool.products(id)) {
      out << id << ',' << prompt++ << ',' << text::format_double(o.phi, 17) << ','
          << text::format_double(o.sigma, 17) << '\n';
    }
  }
  if (!out) throw IoError("failed writing pool file: " + path.string());

  const auto sidecar = labels_sidecar(path);
  if (pool.labels().empty()) {
    std::error_code ec;
    std::filesystem::remove(sidecar, ec);
    return;
  }
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, label] : pool.labels()) j[std::to_string(id)] = label;
  std::ofstream side(sidecar, std::ios::binary | std::ios::trunc);
  if (!side) throw IoError("cannot open label sidecar for writing: " + sidecar.string());
  side << j.dump(2) << '\n';
}

inline PromptPool load_pool(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("pool not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open pool file: " + path.string());

  std::map<CategoryId, std::vector<QualityObservation>> by_category;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != kPoolHeader) throw ParseError(lineno, "expected header '" + std::string(kPoolHeader) + "'");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 4) throw ParseError(lineno, "expected 4 fields, got " + std::to_string(fields.size()));
    const auto cat = text::parse_uint(fields[0]);
    if (!cat || *cat == 0) throw ParseError(lineno, "invalid category_id '" + std::string(fields[0]) + "'");
    if (!text::parse_uint(fields[1])) throw ParseError(lineno, "invalid prompt_id '" + std::string(fields[1]) + "'");
    const auto phi = text::parse_double(fields[2]);
    const auto sigma = text::parse_double(fields[3]);
    if (!phi) throw ParseError(lineno, "invalid phi '" + std::string(fields[2]) + "'");
    if (!sigma) throw ParseError(lineno, "invalid sigma '" + std::string(fields[3]) + "'");
    try {
      by_category[*cat].push_back(QualityObservation::make(*phi, *sigma));
    } catch (const DomainError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (by_category.empty()) throw ParseError(0, "no records");
  if (by_category.rbegin()->first != by_category.size())
    throw ParseError(0, "category ids must be contiguous starting at 1");

  std::vector<std::vector<QualityObservation>> products;
  products.reserve(by_category.size());
  for (auto& [id, obs] : by_category) products.push_back(std::move(obs));

  std::map<CategoryId, std::string> labels;
  const auto sidecar = labels_sidecar(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream side(sidecar, std::ios::binary);
    nlohmann::json j;
    try {
      side >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(0, std::string("label sidecar: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(0, "label sidecar must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      const auto id = text::parse_uint(key);
      if (!id || !value.is_string()) throw ParseError(0, "label sidecar entries must map ids to strings");
      labels.emplace(*id, value.get<std::string>());
    }
  }
  return PromptPool(std::move(products), std::move(labels));
}

}  // namespace pbt
