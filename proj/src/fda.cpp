#include "rfaug/fda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "rfaug/errors.hpp"
#include "rfaug/rng.hpp"

namespace rfaug {
namespace {

double sq_distance(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::vector<std::pair<int, int>> sorted_pairs(std::vector<std::pair<int, int>> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  return pairs;
}

// Top-k indices of `score`, ties to the lowest index, returned ascending.
std::vector<std::size_t> top_k_indices(std::span<const double> score, int k) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

SelectMethod parse_select_method(std::string_view name) {
  if (name == "iss") return SelectMethod::iss;
  if (name == "top_ms") return SelectMethod::top_ms;
  if (name == "top_mean") return SelectMethod::top_mean;
  if (name == "top_var") return SelectMethod::top_var;
  if (name == "random") return SelectMethod::random;
  if (name == "pca") return SelectMethod::pca;
  throw ArgumentError("unknown selection method \"" + std::string(name) + "\"");
}

std::string_view to_string(SelectMethod m) {
  switch (m) {
    case SelectMethod::iss: return "iss";
    case SelectMethod::top_ms: return "top_ms";
    case SelectMethod::top_mean: return "top_mean";
    case SelectMethod::top_var: return "top_var";
    case SelectMethod::random: return "random";
    case SelectMethod::pca: return "pca";
  }
  throw ArgumentError("unknown selection method");
}

std::vector<int> iss_indices(std::span<const double> ms_link, int k) {
  const int f_count = static_cast<int>(ms_link.size());
  if (k < 1 || k > f_count) throw ArgumentError("iss k must satisfy 1 <= k <= F");

  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  const int base = f_count / k;
  const int extra = f_count % k;  // earlier sub-bands one wider
  int start = 0;
  for (int band = 0; band < k; ++band) {
    const int width = base + (band < extra ? 1 : 0);
    int best = start;
    for (int i = start + 1; i < start + width; ++i)
      if (ms_link[static_cast<std::size_t>(i)] > ms_link[static_cast<std::size_t>(best)]) best = i;
    out.push_back(best);
    start += width;
  }
  return out;
}

SelectionResult select_iss(std::span<const double> ms_global, int f_count, int l_count, int k) {
  if (ms_global.size() != static_cast<std::size_t>(f_count) * static_cast<std::size_t>(l_count))
    throw ArgumentError("ms vector length does not equal F*L");
  SelectionResult result;
  result.method = SelectMethod::iss;
  result.k = k;
  std::vector<double> link_ms(static_cast<std::size_t>(f_count));
  for (int l = 0; l < l_count; ++l) {
    for (int f = 0; f < f_count; ++f)
      link_ms[static_cast<std::size_t>(f)] =
          ms_global[static_cast<std::size_t>(f) * static_cast<std::size_t>(l_count) +
                    static_cast<std::size_t>(l)];
    for (int f : iss_indices(link_ms, k)) result.indices.emplace_back(f, l);
  }
  result.indices = sorted_pairs(std::move(result.indices));
  return result;
}

SelectionResult select_baseline(const CsiTensor& csi, std::span<const double> ms_global,
                                SelectMethod method, int k, std::uint64_t seed) {
  const std::size_t count = static_cast<std::size_t>(csi.f_count) * csi.l_count;
  if (k < 1 || static_cast<std::size_t>(k) > count)
    throw ArgumentError("selection k must satisfy 1 <= k <= F*L");

  SelectionResult result;
  result.method = method;
  result.k = k;

  std::vector<std::size_t> chosen;
  switch (method) {
    case SelectMethod::top_ms: {
      if (ms_global.size() != count) throw ArgumentError("ms vector length does not equal F*L");
      chosen = top_k_indices(ms_global, k);
      break;
    }
    case SelectMethod::top_mean:
    case SelectMethod::top_var: {
      std::vector<double> score(count, 0.0);
      for (std::size_t f = 0; f < csi.f_count; ++f) {
        for (std::size_t l = 0; l < csi.l_count; ++l) {
          double mean_abs = 0.0, mean_pow = 0.0, mean_pow2 = 0.0;
          for (std::size_t t = 0; t < csi.t_count; ++t) {
            const double a = std::abs(csi.at(t, f, l));
            mean_abs += a;
            mean_pow += a * a;
            mean_pow2 += a * a * a * a;
          }
          const double n = static_cast<double>(csi.t_count);
          mean_abs /= n;
          mean_pow /= n;
          mean_pow2 /= n;
          score[f * csi.l_count + l] = method == SelectMethod::top_mean
                                           ? mean_abs
                                           : mean_pow2 - mean_pow * mean_pow;
        }
      }
      chosen = top_k_indices(score, k);
      break;
    }
    case SelectMethod::random: {
      std::mt19937_64 rng(seed);
      std::vector<std::size_t> pool(count);
      std::iota(pool.begin(), pool.end(), 0);
      for (int i = 0; i < k; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) +
            static_cast<std::size_t>(uniform_below(rng, count - static_cast<std::size_t>(i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      }
      chosen.assign(pool.begin(), pool.begin() + k);
      std::sort(chosen.begin(), chosen.end());
      break;
    }
    default:
      throw ArgumentError("method \"" + std::string(to_string(method)) +
                          "\" is not a baseline selector");
  }

  for (std::size_t idx : chosen)
    result.indices.emplace_back(static_cast<int>(idx / csi.l_count),
                                static_cast<int>(idx % csi.l_count));
  result.indices = sorted_pairs(std::move(result.indices));
  return result;
}

PcaResult pca_components(std::span<const double> amplitude, std::size_t t_count,
                         std::size_t f_count, int component_count) {
  if (amplitude.size() != t_count * f_count)
    throw ArgumentError("amplitude matrix size does not equal T*F");
  if (t_count < 2) throw ArgumentError("pca needs at least 2 rows");
  if (component_count < 1 || static_cast<std::size_t>(component_count) > f_count)
    throw ArgumentError("component count must satisfy 1 <= i <= F");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(t_count), static_cast<Eigen::Index>(f_count));
  for (std::size_t t = 0; t < t_count; ++t)
    for (std::size_t f = 0; f < f_count; ++f)
      x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f)) = amplitude[t * f_count + f];
  x.rowwise() -= x.colwise().mean();

  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(t_count - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw ArgumentError("pca eigendecomposition failed");

  PcaResult result;
  for (int c = 0; c < component_count; ++c) {
    const Eigen::Index col = static_cast<Eigen::Index>(f_count) - 1 - c;  // ascending -> descending
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    if (v(peak) < 0.0) v = -v;
    const Eigen::VectorXd proj = x * v;
    result.projections.emplace_back(proj.data(), proj.data() + proj.size());
    result.loadings.emplace_back(v.data(), v.data() + v.size());
    result.eigenvalues.push_back(solver.eigenvalues()(col));
  }
  return result;
}

std::vector<std::vector<int>> GroupingResult::members() const {
  std::vector<std::vector<int>> out(centroids.size());
  for (std::size_t i = 0; i < assignment.size(); ++i)
    out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<int>(i));
  return out;
}

GroupingResult kmeans_group(const std::vector<Spectrogram>& specs, std::span<const double> ms,
                            int g_count, std::uint64_t seed) {
  const std::size_t n_points = specs.size();
  if (n_points == 0) throw ArgumentError("kmeans needs at least one spectrogram");
  if (ms.size() != n_points) throw ArgumentError("ms vector length does not match spectrogram count");
  if (g_count < 1 || static_cast<std::size_t>(g_count) > n_points)
    throw ArgumentError("group count must satisfy 1 <= G <= F");

  const std::size_t rows = specs[0].rows();
  const std::size_t cols = specs[0].cols();
  const std::size_t dim = rows * cols;
  std::vector<const double*> points(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    if (specs[i].rows() != rows || specs[i].cols() != cols)
      throw ArgumentError("kmeans inputs must share one shape");
    points[i] = specs[i].values.data();
  }

  const auto g = static_cast<std::size_t>(g_count);
  GroupingResult result;
  result.centroid_rows = rows;
  result.centroid_cols = cols;

  // Farthest-point initialization from a seeded first pick.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(g);
  const std::size_t first = static_cast<std::size_t>(uniform_below(rng, n_points));
  centroids.emplace_back(points[first], points[first] + dim);
  std::vector<double> nearest(n_points, std::numeric_limits<double>::infinity());
  while (centroids.size() < g) {
    const std::vector<double>& latest = centroids.back();
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n_points; ++i) {
      nearest[i] = std::min(nearest[i], sq_distance(points[i], latest.data(), dim));
      if (nearest[i] > far_d) {
        far_d = nearest[i];
        far = i;
      }
    }
    centroids.emplace_back(points[far], points[far] + dim);
  }

  std::vector<int> assignment(n_points, -1);
  std::vector<int> previous(n_points, -2);
  constexpr int kMaxIterations = 100;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    for (std::size_t i = 0; i < n_points; ++i) {
      int best = 0;
      double best_d = sq_distance(points[i], centroids[0].data(), dim);
      for (std::size_t c = 1; c < g; ++c) {
        const double d = sq_distance(points[i], centroids[c].data(), dim);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      assignment[i] = best;
    }

    // Reseed any empty cluster with the point farthest from its centroid,
    // never draining a singleton.
    std::vector<std::size_t> sizes(g, 0);
    for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < g; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n_points;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n_points; ++i) {
        if (sizes[static_cast<std::size_t>(assignment[i])] <= 1) continue;
        const double d =
            sq_distance(points[i], centroids[static_cast<std::size_t>(assignment[i])].data(), dim);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n_points) continue;  // all donors are singletons; unreachable with G <= F
      --sizes[static_cast<std::size_t>(assignment[far])];
      assignment[far] = static_cast<int>(c);
      ++sizes[c];
      centroids[c].assign(points[far], points[far] + dim);
    }

    for (std::size_t c = 0; c < g; ++c) std::fill(centroids[c].begin(), centroids[c].end(), 0.0);
    for (std::size_t i = 0; i < n_points; ++i) {
      double* acc = centroids[static_cast<std::size_t>(assignment[i])].data();
      for (std::size_t d = 0; d < dim; ++d) acc[d] += points[i][d];
    }
    for (std::size_t c = 0; c < g; ++c)
      for (double& v : centroids[c]) v /= static_cast<double>(sizes[c]);

    double inertia = 0.0;
    for (std::size_t i = 0; i < n_points; ++i)
      inertia += sq_distance(points[i], centroids[static_cast<std::size_t>(assignment[i])].data(), dim);
    result.inertia_history.push_back(inertia);
    result.iterations = iter + 1;

    if (assignment == previous) break;
    previous = assignment;
  }

  result.assignment = std::move(assignment);
  result.centroids = std::move(centroids);
  result.group_ms_sum.assign(g, 0.0);
  for (std::size_t i = 0; i < n_points; ++i)
    result.group_ms_sum[static_cast<std::size_t>(result.assignment[i])] += ms[i];
  return result;
}

Spectrogram mrc_combine(const std::vector<const Spectrogram*>& group,
                        const std::vector<std::vector<double>>& weights, bool normalized) {
  if (group.empty()) throw ArgumentError("mrc group is empty");
  if (weights.size() != group.size())
    throw ArgumentError("mrc weight count does not match group size");

  const std::size_t rows = group[0]->rows();
  const std::size_t cols = group[0]->cols();
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i]->rows() != rows || group[i]->cols() != cols)
      throw ArgumentError("mrc group members must share one shape");
    if (weights[i].size() != cols)
      throw ArgumentError("mrc weights must align with spectrogram time bins");
  }

  Spectrogram out;
  out.bin_freqs_hz = group[0]->bin_freqs_hz;
  out.bin_times_s = group[0]->bin_times_s;
  out.values.assign(rows * cols, 0.0);
  for (std::size_t i = 0; i < group.size(); ++i) {
    const double* src = group[i]->values.data();
    const double* w = weights[i].data();
    for (std::size_t b = 0; b < rows; ++b)
      for (std::size_t n = 0; n < cols; ++n) out.values[b * cols + n] += w[n] * src[b * cols + n];
  }

  if (normalized) {
    std::vector<double> w_sum(cols, 0.0);
    for (const auto& w : weights)
      for (std::size_t n = 0; n < cols; ++n) w_sum[n] += w[n];
    for (std::size_t b = 0; b < rows; ++b)
      for (std::size_t n = 0; n < cols; ++n)
        out.values[b * cols + n] = w_sum[n] == 0.0 ? 0.0 : out.values[b * cols + n] / w_sum[n];
  } else {
    const double inv = 1.0 / static_cast<double>(group.size());
    for (double& v : out.values) v *= inv;
  }
  return out;
}

std::vector<int> top_g_groups(const GroupingResult& grouping, int top) {
  const int g = grouping.group_count();
  if (top < 0 || top > g) throw ArgumentError("top must satisfy 0 <= top <= G");
  std::vector<int> ids(static_cast<std::size_t>(g));
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    return grouping.group_ms_sum[static_cast<std::size_t>(a)] >
           grouping.group_ms_sum[static_cast<std::size_t>(b)];
  });
  ids.resize(static_cast<std::size_t>(top));
  return ids;
}

}  // namespace rfaug
