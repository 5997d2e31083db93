#pragma once

#include <cmath>

#include "gsscene/geometry/knn.hpp"
#include "gsscene/geometry/point_cloud.hpp"

namespace gsscene::geometry {

struct PruneStats {
    double mean_distance = 0.0;
    double std_distance = 0.0;
    double threshold = 0.0;
    std::size_t removed = 0;
};

// Removes stretched points: those whose nearest-neighbor distance exceeds
// mean + 2 * std (population) of all nearest-neighbor distances. One pass, statistics from the input.
inline PointCloud prune_stretched(const PointCloud& cloud, PruneStats* stats = nullptr) {
    if (cloud.size() < 3) return cloud;
    const auto nn = nearest_neighbor_distances(cloud.positions);
    double sum = 0.0;
    for (double d : nn) sum += d;
    const double mean = sum / static_cast<double>(nn.size());
    double var = 0.0;
    for (double d : nn) var += (d - mean) * (d - mean);
    const double sd = std::sqrt(var / static_cast<double>(nn.size()));
    const double threshold = mean + 2.0 * sd;

    PointCloud out;
    out.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (nn[i] > threshold) continue;
        out.push_back(cloud.positions[i], cloud.colors[i], cloud.source_view[i]);
    }
    if (stats) *stats = {mean, sd, threshold, cloud.size() - out.size()};
    return out;
}

}  // namespace gsscene::geometry
