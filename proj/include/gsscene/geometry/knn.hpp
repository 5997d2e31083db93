#pragma once

#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <boost/geometry/strategies/strategies.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "gsscene/image.hpp"
#include "gsscene/parallel.hpp"

namespace gsscene::geometry {

// Exact k-nearest-neighbor distances for every point of a set (excluding the point itself),
// backed by a bulk-loaded R-tree.
class NeighborIndex {
public:
    explicit NeighborIndex(std::span<const Vec3> points) : points_(points) {
        std::vector<Entry> entries;
        entries.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            entries.emplace_back(BoostPoint(points[i].x(), points[i].y(), points[i].z()), i);
        }
        tree_ = Tree(entries.begin(), entries.end());
    }

    // Ascending distances from point `i` to its k nearest other points (fewer if the set is small).
    std::vector<double> neighbor_distances(std::size_t i, std::size_t k) const {
        const Vec3& p = points_[i];
        std::vector<Entry> hits;
        hits.reserve(k + 1);
        tree_.query(boost::geometry::index::nearest(BoostPoint(p.x(), p.y(), p.z()), static_cast<unsigned>(k + 1)),
                    std::back_inserter(hits));
        std::vector<double> d;
        d.reserve(hits.size());
        bool skipped_self = false;
        for (const auto& [bp, idx] : hits) {
            if (!skipped_self && idx == i) {
                skipped_self = true;
                continue;
            }
            d.push_back((points_[idx] - p).norm());
        }
        if (!skipped_self && !d.empty()) {
            // self not returned among equal-distance duplicates: drop the farthest instead
            std::sort(d.begin(), d.end());
            d.pop_back();
        }
        std::sort(d.begin(), d.end());
        if (d.size() > k) d.resize(k);
        return d;
    }

private:
    using BoostPoint = boost::geometry::model::point<double, 3, boost::geometry::cs::cartesian>;
    using Entry = std::pair<BoostPoint, std::size_t>;
    using Tree = boost::geometry::index::rtree<Entry, boost::geometry::index::rstar<16>>;

    std::span<const Vec3> points_;
    Tree tree_;
};

// Distance from each point to its nearest other point; +inf for a single point.
inline std::vector<double> nearest_neighbor_distances(std::span<const Vec3> points) {
    std::vector<double> out(points.size(), std::numeric_limits<double>::infinity());
    if (points.size() < 2) return out;
    const NeighborIndex index(points);
    parallel_for(static_cast<std::ptrdiff_t>(points.size()), [&](std::ptrdiff_t i) {
        const auto d = index.neighbor_distances(static_cast<std::size_t>(i), 1);
        if (!d.empty()) out[static_cast<std::size_t>(i)] = d.front();
    });
    return out;
}

// Mean distance to the k nearest other points; 0 when the point has no neighbors.
inline std::vector<double> mean_neighbor_distances(std::span<const Vec3> points, std::size_t k) {
    std::vector<double> out(points.size(), 0.0);
    if (points.size() < 2) return out;
    const NeighborIndex index(points);
    parallel_for(static_cast<std::ptrdiff_t>(points.size()), [&](std::ptrdiff_t i) {
        const auto d = index.neighbor_distances(static_cast<std::size_t>(i), k);
        double sum = 0.0;
        for (double x : d) sum += x;
        out[static_cast<std::size_t>(i)] = d.empty() ? 0.0 : sum / static_cast<double>(d.size());
    });
    return out;
}

}  // namespace gsscene::geometry
