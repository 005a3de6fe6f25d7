#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ifslab/geometry.hpp"
#include "ifslab/rng.hpp"
#include "ifslab/system.hpp"

namespace ifslab {

// Shared sup-estimation protocol: every sup over the box is replaced by a max
// over a deterministic lattice plus seeded uniform draws. The random draws are
// generated sequentially, so a larger `random_points` with the same seed
// extends the sample instead of reshuffling it.
struct ProbeSet {
    std::vector<Vec> points;                    // lattice first, then random
    std::vector<std::pair<Vec, Vec>> pairs;     // separation >= min_separation
    std::size_t lattice_points = 0;
    double min_separation = 1e-6;
};

inline ProbeSet make_probe_set(const Box& box, std::size_t random_points, std::uint64_t seed,
                               double min_separation = 1e-6, std::size_t lattice_target = 33) {
    ProbeSet set;
    set.min_separation = min_separation;

    set.points = probe_lattice(box, lattice_target);
    set.lattice_points = set.points.size();

    std::size_t d = box.dim();
    auto draw_point = [&box, d](RngStream& rng) {
        Vec x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = box.lo[i] + rng.uniform01() * (box.hi[i] - box.lo[i]);
        return x;
    };

    RngStream point_rng = RngStream::derive(seed, rng_tag::probe, 0);
    for (std::size_t t = 0; t < random_points; ++t) set.points.push_back(draw_point(point_rng));

    // pairs: all lattice pairs, then `random_points` seeded pairs
    for (std::size_t i = 0; i < set.lattice_points; ++i)
        for (std::size_t j = i + 1; j < set.lattice_points; ++j)
            if (distance(set.points[i], set.points[j], Metric::euclidean) >= min_separation)
                set.pairs.emplace_back(set.points[i], set.points[j]);
    RngStream pair_rng = RngStream::derive(seed, rng_tag::probe, 1);
    for (std::size_t t = 0; t < random_points; ++t) {
        Vec a = draw_point(pair_rng);
        Vec b = draw_point(pair_rng);
        if (distance(a, b, Metric::euclidean) >= min_separation) set.pairs.emplace_back(std::move(a), std::move(b));
    }
    return set;
}

}  // namespace ifslab
