#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rfaug/types.hpp"

namespace rfaug {

enum class SelectMethod { iss, top_ms, top_mean, top_var, random, pca };
SelectMethod parse_select_method(std::string_view name);
std::string_view to_string(SelectMethod m);

struct SelectionResult {
  std::vector<std::pair<int, int>> indices;  // (subcarrier, link), ascending by (link, subcarrier)
  SelectMethod method = SelectMethod::iss;
  int k = 0;
};

// Argmax motion statistic inside each of k uniform contiguous sub-bands of
// one link (earlier sub-bands one wider when F % k != 0; ties to the lowest
// index).
std::vector<int> iss_indices(std::span<const double> ms_link, int k);

// ISS run per link; results unioned, K indices per link.
SelectionResult select_iss(std::span<const double> ms_global, int f_count, int l_count, int k);

// top_ms / top_mean / top_var / random over all (f, l) pairs.
SelectionResult select_baseline(const CsiTensor& csi, std::span<const double> ms_global,
                                SelectMethod method, int k, std::uint64_t seed);

struct PcaResult {
  std::vector<std::vector<double>> projections;  // component series, length T each
  std::vector<std::vector<double>> loadings;     // unit vectors, length F each
  std::vector<double> eigenvalues;               // non-increasing
};

// Subcarrier-wise PCA of a row-major T x F amplitude matrix. Columns are
// demeaned individually; each loading's largest-magnitude entry is made
// positive.
PcaResult pca_components(std::span<const double> amplitude, std::size_t t_count,
                         std::size_t f_count, int component_count);

struct GroupingResult {
  std::vector<int> assignment;                 // spectrogram index -> group
  std::vector<std::vector<double>> centroids;  // flattened spectrogram values
  std::size_t centroid_rows = 0;
  std::size_t centroid_cols = 0;
  std::vector<double> group_ms_sum;
  std::vector<double> inertia_history;  // one entry per iteration, after the update step
  int iterations = 0;

  int group_count() const { return static_cast<int>(centroids.size()); }
  std::vector<std::vector<int>> members() const;
};

// Euclidean k-means over flattened spectrograms with seeded farthest-point
// initialization; runs to an assignment fixpoint or 100 iterations. Empty
// clusters are reseeded with the point farthest from its centroid.
GroupingResult kmeans_group(const std::vector<Spectrogram>& specs, std::span<const double> ms,
                            int g_count, std::uint64_t seed);

// S_g(b,n) = (1/N_g) * sum_f w_f(n) * S_f(b,n). Normalized mode divides by
// sum_f w_f(n) instead of N_g (0 where all weights vanish).
Spectrogram mrc_combine(const std::vector<const Spectrogram*>& group,
                        const std::vector<std::vector<double>>& weights, bool normalized = false);

// Group ids by descending motion-statistic sum, ties to the lowest id.
std::vector<int> top_g_groups(const GroupingResult& grouping, int top);

}  // namespace rfaug
