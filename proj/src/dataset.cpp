#include "lrcc/dataset.hpp"

#include "lrcc/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace lrcc {

namespace {

void check_finite(const std::vector<double>& data) {
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (!std::isfinite(data[k])) {
      throw DataFormatError(DataFormatError::Kind::NonFinite,
                            "non-finite entry at flat index " + std::to_string(k));
    }
  }
}

}  // namespace

ObservationSet::ObservationSet(Index n, Index d1, Index d2, std::vector<double> data)
    : n_(n), d1_(d1), d2_(d2), data_(std::move(data)) {
  if (n < 1) throw DataFormatError(DataFormatError::Kind::EmptySet, "observation set is empty");
  if (d1 < 1 || d2 < 1) throw ShapeError("matrix dimensions must be positive");
  require_shape(static_cast<Index>(data_.size()) == n * d1 * d2,
                "observation data length does not match n*d1*d2");
  check_finite(data_);
  if (d1 < d2) {
    std::vector<double> t(data_.size());
    for (Index i = 0; i < n; ++i) {
      MatView src(data_.data() + i * d1 * d2, d1, d2);
      MatMutView(t.data() + i * d1 * d2, d2, d1) = src.transpose();
    }
    data_ = std::move(t);
    std::swap(d1_, d2_);
    transposed_ = true;
  }
}

ObservationSet ObservationSet::from_stacked(const Vec& x, Index d1, Index d2) {
  require_shape(d1 > 0 && d2 > 0 && x.size() % (d1 * d2) == 0, "stacked vector length");
  return ObservationSet(x.size() / (d1 * d2), d1, d2, std::vector<double>(x.data(), x.data() + x.size()));
}

LabelVector::LabelVector(std::vector<int> labels) : labels_(std::move(labels)) {
  int max_label = -1;
  for (int v : labels_) {
    if (v < 0) throw std::invalid_argument("labels must be nonnegative");
    max_label = std::max(max_label, v);
  }
  k_ = max_label + 1;
  std::vector<bool> seen(static_cast<std::size_t>(k_), false);
  for (int v : labels_) seen[static_cast<std::size_t>(v)] = true;
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw std::invalid_argument("label classes must be contiguous from 0 and nonempty");
  }
}

LabelVector LabelVector::compact(const std::vector<int>& raw) {
  std::unordered_map<int, int> ids;
  std::vector<int> out;
  out.reserve(raw.size());
  for (int v : raw) {
    auto [it, inserted] = ids.try_emplace(v, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return LabelVector(std::move(out));
}

void MixtureSpec::validate() const {
  const std::size_t k = means.size();
  if (k == 0) throw std::invalid_argument("mixture needs at least one component");
  if (weights.size() != k || ranks.size() != k) {
    throw std::invalid_argument("mixture weights/ranks must match the number of means");
  }
  if (!(noise >= 0.0)) throw std::invalid_argument("noise scale must be >= 0");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("mixture weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
  for (std::size_t a = 0; a < k; ++a) {
    const RowMat& m = means[a];
    if (m.rows() != means[0].rows() || m.cols() != means[0].cols() || m.size() == 0) {
      throw std::invalid_argument("mixture means must share one nonempty shape");
    }
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
    const Index rank = (s.array() > cut).count();
    if (rank > ranks[a]) {
      throw std::invalid_argument("mixture mean " + std::to_string(a) + " has rank " +
                                  std::to_string(rank) + " above its target " +
                                  std::to_string(ranks[a]));
    }
  }
}

// ---- MTS1 ------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'T', 'S', '1'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint64_t get_le(const std::uint8_t* p, int width) {
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_mts(const ObservationSet& obs) {
  if (obs.n() < 1) throw DataFormatError(DataFormatError::Kind::EmptySet, "refusing to encode an empty set");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + obs.data().size() * 8);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(obs.n()));
  put_u32(out, static_cast<std::uint32_t>(obs.d1()));
  put_u32(out, static_cast<std::uint32_t>(obs.d2()));
  for (double v : obs.data()) put_f64(out, v);
  return out;
}

ObservationSet decode_mts(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw DataFormatError(DataFormatError::Kind::BadMagic, "bad magic: expected \"MTS1\"");
  }
  if (bytes.size() < kHeaderBytes) {
    throw DataFormatError(DataFormatError::Kind::Truncated, "truncated payload: header incomplete");
  }
  const auto n = static_cast<Index>(get_le(bytes.data() + 4, 4));
  const auto d1 = static_cast<Index>(get_le(bytes.data() + 8, 4));
  const auto d2 = static_cast<Index>(get_le(bytes.data() + 12, 4));
  const auto count = static_cast<std::size_t>(n * d1 * d2);
  if (bytes.size() < kHeaderBytes + 8 * count) {
    throw DataFormatError(DataFormatError::Kind::Truncated,
                          "truncated payload: expected " + std::to_string(8 * count) + " bytes, found " +
                              std::to_string(bytes.size() - kHeaderBytes));
  }
  std::vector<double> data(count);
  for (std::size_t k = 0; k < count; ++k) {
    data[k] = std::bit_cast<double>(get_le(bytes.data() + kHeaderBytes + 8 * k, 8));
  }
  return ObservationSet(n, d1, d2, std::move(data));
}

void save_mts(const ObservationSet& obs, const std::filesystem::path& path) {
  const auto bytes = encode_mts(obs);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataFormatError(DataFormatError::Kind::Io, "write failed: " + path.string());
}

ObservationSet load_mts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_mts(bytes);
  } catch (const DataFormatError& e) {
    throw DataFormatError(e.kind(), path.string() + ": " + e.what());
  }
}

// ---- text formats ------------------------------------------------------------

namespace {

double parse_double(std::string_view field, std::size_t line_no) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataFormatError(DataFormatError::Kind::Parse, "line " + std::to_string(line_no) +
                                                            ": cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

ObservationSet load_csv(const std::filesystem::path& path, Index d1, Index d2) {
  if (d1 < 1 || d2 < 1) throw ShapeError("csv dimensions must be positive");
  std::ifstream in(path);
  if (!in) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path.string());
  const auto per_line = static_cast<std::size_t>(d1 * d2);
  std::vector<double> data;
  std::string line;
  std::size_t line_no = 0;
  Index n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t fields = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      if (fields < per_line) data.push_back(parse_double(field, line_no));
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields != per_line) {
      throw DataFormatError(DataFormatError::Kind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                                              std::to_string(per_line) + " fields, found " +
                                                              std::to_string(fields));
    }
    ++n;
  }
  return ObservationSet(n, d1, d2, std::move(data));
}

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path.string() + " for writing");
  for (int v : labels) out << v << '\n';
  if (!out) throw DataFormatError(DataFormatError::Kind::Io, "write failed: " + path.string());
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s(line);
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    if (s.empty()) continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw DataFormatError(DataFormatError::Kind::Parse,
                            path.string() + " line " + std::to_string(line_no) + ": not an integer label");
    }
    labels.push_back(v);
  }
  return labels;
}

// ---- generators ----------------------------------------------------------------

namespace {

Mat gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Mat m(rows, cols);
  // Row-major fill order so the stream layout matches the storage layout.
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
  return m;
}

std::pair<Mat, Mat> singular_factors(Index d1, Index d2, Index r, Rng& rng) {
  if (r > std::min(d1, d2)) throw ShapeError("requested more singular vectors than min(d1, d2)");
  Eigen::JacobiSVD<Mat> svd(gaussian_matrix(d1, d2, rng), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU().leftCols(r), svd.matrixV().leftCols(r)};
}

void append(std::vector<double>& out, const Mat& m) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
}

}  // namespace

std::pair<Mat, Mat> random_singular_factors(Index d1, Index d2, Index r, std::uint64_t seed) {
  Rng rng(seed);
  return singular_factors(d1, d2, r, rng);
}

Eigen::Vector3d quarter_sphere_point(double theta, double vartheta) {
  return {std::sin(vartheta) * std::cos(theta), std::sin(vartheta) * std::sin(theta), std::cos(vartheta)};
}

Eigen::Vector3d reflected_quarter_sphere_point(double theta, double vartheta) {
  return {1.0 + std::sin(vartheta) * std::cos(theta), 0.5 - std::sin(vartheta) * std::sin(theta),
          0.5 - std::cos(vartheta)};
}

LabeledData gen_quarter_spheres(const QuarterSphereOptions& opts, std::uint64_t seed) {
  if (opts.d1 < 3 || opts.d2 < 3) throw ShapeError("quarter-sphere data needs d1 >= 3 and d2 >= 3");
  if (opts.n_per_cluster < 1) throw std::invalid_argument("n_per_cluster must be >= 1");
  Rng rng(seed);
  const auto [u, v] = singular_factors(opts.d1, opts.d2, 3, rng);
  Mat u_hat = u;
  Mat v_hat = v;
  if (!opts.share_factors) std::tie(u_hat, v_hat) = singular_factors(opts.d1, opts.d2, 3, rng);

  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(2 * opts.n_per_cluster * opts.d1 * opts.d2));
  std::vector<int> labels;
  for (int cluster = 0; cluster < 2; ++cluster) {
    for (Index i = 0; i < opts.n_per_cluster; ++i) {
      const double theta = rng.uniform(0.0, std::numbers::pi);
      const double vartheta = rng.uniform(0.0, std::numbers::pi / 2);
      Eigen::Vector3d s = cluster == 0 ? quarter_sphere_point(theta, vartheta)
                                       : reflected_quarter_sphere_point(theta, vartheta);
      for (int c = 0; c < 3; ++c) s(c) += opts.noise * rng.gaussian();
      const Mat a = cluster == 0 ? Mat(u * s.asDiagonal() * v.transpose())
                                 : Mat(u_hat * s.asDiagonal() * v_hat.transpose());
      append(data, a);
      labels.push_back(cluster);
    }
  }
  return {ObservationSet(2 * opts.n_per_cluster, opts.d1, opts.d2, std::move(data)), LabelVector(std::move(labels))};
}

const Eigen::Matrix<double, 2, 8>& unbalanced_centroid_values() {
  static const Eigen::Matrix<double, 2, 8> c = [] {
    Eigen::Matrix<double, 2, 8> m;
    m << 0.02, 0.09, 0.16, 0.70, 0.70, 0.80, 0.90, 0.90,  //
        0.48, 0.55, 0.48, 0.36, 0.60, 0.48, 0.36, 0.60;
    return m;
  }();
  return c;
}

LabeledData gen_unbalanced_gaussian(const std::vector<Index>& sizes, Index d1, Index d2, double noise,
                                    std::uint64_t seed) {
  if (sizes.size() != 8) throw std::invalid_argument("unbalanced Gaussian data needs exactly 8 cluster sizes");
  if (d1 < 2 || d2 < 2) throw ShapeError("unbalanced Gaussian data needs d1 >= 2 and d2 >= 2");
  Rng rng(seed);
  const auto& c = unbalanced_centroid_values();
  std::vector<Mat> centroids;
  for (int k = 0; k < 8; ++k) {
    const auto [u, v] = singular_factors(d1, d2, 2, rng);
    centroids.push_back(u * c.col(k).asDiagonal() * v.transpose());
  }
  std::vector<double> data;
  std::vector<int> labels;
  Index n = 0;
  for (int k = 0; k < 8; ++k) {
    if (sizes[static_cast<std::size_t>(k)] < 1) throw std::invalid_argument("cluster sizes must be >= 1");
    for (Index i = 0; i < sizes[static_cast<std::size_t>(k)]; ++i) {
      append(data, centroids[static_cast<std::size_t>(k)] + noise * gaussian_matrix(d1, d2, rng));
      labels.push_back(k);
      ++n;
    }
  }
  return {ObservationSet(n, d1, d2, std::move(data)), LabelVector(std::move(labels))};
}

LabeledData gen_low_rank_mixture(const MixtureSpec& spec, Index n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("mixture sample count must be >= 1");
  Rng rng(seed);
  const Index d1 = spec.means[0].rows();
  const Index d2 = spec.means[0].cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(n * d1 * d2));
  std::vector<int> raw(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    int label = -1;
    for (std::size_t a = 0; a < spec.weights.size(); ++a) {
      acc += spec.weights[a];
      if (spec.weights[a] > 0.0) {
        label = static_cast<int>(a);
        if (u < acc) break;
      }
    }
    raw[static_cast<std::size_t>(i)] = label;
    append(data, spec.means[static_cast<std::size_t>(label)] + spec.noise * gaussian_matrix(d1, d2, rng));
  }
  // Components that drew no samples are dropped; the rest keep their order.
  std::vector<int> present(raw);
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  for (int& v : raw) v = static_cast<int>(std::lower_bound(present.begin(), present.end(), v) - present.begin());
  return {ObservationSet(n, d1, d2, std::move(data)), LabelVector(std::move(raw))};
}

RecoveryData gen_recovery_recipe(const RecoveryRecipe& recipe, std::uint64_t seed) {
  if (recipe.clusters < 1 || recipe.per_cluster < 1) throw std::invalid_argument("recipe sizes must be >= 1");
  Rng rng(seed);
  RecoveryData out;
  for (Index k = 0; k < recipe.clusters; ++k) {
    const auto [u, v] = singular_factors(recipe.d1, recipe.d2, recipe.rank, rng);
    Vec c(recipe.rank);
    for (Index r = 0; r < recipe.rank; ++r) c(r) = rng.gaussian();
    out.means.emplace_back(u * c.asDiagonal() * v.transpose());
  }
  std::vector<double> data;
  std::vector<int> labels;
  for (Index k = 0; k < recipe.clusters; ++k) {
    for (Index i = 0; i < recipe.per_cluster; ++i) {
      append(data, Mat(out.means[static_cast<std::size_t>(k)]) + recipe.noise * gaussian_matrix(recipe.d1, recipe.d2, rng));
      labels.push_back(static_cast<int>(k));
    }
  }
  out.data = {ObservationSet(recipe.clusters * recipe.per_cluster, recipe.d1, recipe.d2, std::move(data)),
              LabelVector(std::move(labels))};
  return out;
}

}  // namespace lrcc
