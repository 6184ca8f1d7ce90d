#include "dagbo/pareto.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "dagbo/errors.hpp"
#include "dagbo/rng.hpp"

namespace dagbo {

namespace {

void check_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

// Area dominated by a 2-D point set, sorted in place by descending x.
double area_2d(std::vector<std::array<double, 2>>& pts, double r0, double r1) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a[0] != b[0] ? a[0] > b[0] : a[1] > b[1];
    });
    double area = 0.0;
    double ymax = r1;
    for (const auto& p : pts) {
        if (p[1] > ymax) {
            area += (p[0] - r0) * (p[1] - ymax);
            ymax = p[1];
        }
    }
    return area;
}

// Staircase of mutually non-dominated 2-D points, kept sorted by descending x
// (so ascending y), with its dominated area maintained incrementally.
class Staircase {
public:
    Staircase(double r0, double r1) : r0_(r0), r1_(r1) {}

    void insert(double x, double y) {
        // First step with x' <= x; everything before it has larger x.
        auto it = std::lower_bound(steps_.begin(), steps_.end(), x,
                                   [](const auto& s, double v) { return s[0] > v; });
        // A step with x' >= x and y' >= y covers the new point. Steps before
        // `it` have x' > x and ascending y, so only the last of them matters.
        if (it != steps_.begin() && (it - 1)->at(1) >= y) return;
        if (it != steps_.end() && (*it)[0] == x && (*it)[1] >= y) return;
        // Remove steps the new point covers: x' <= x and y' <= y.
        auto last = it;
        while (last != steps_.end() && (*last)[1] <= y) ++last;
        it = steps_.erase(it, last);
        steps_.insert(it, {x, y});
        recompute();
    }

    double area() const { return area_; }

    bool covers(double x, double y) const {
        auto it = std::lower_bound(steps_.begin(), steps_.end(), x,
                                   [](const auto& s, double v) { return s[0] >= v; });
        // `it` is the first step with x' < x; the one before has x' >= x and
        // the largest y among such steps.
        return it != steps_.begin() && (it - 1)->at(1) >= y;
    }

private:
    void recompute() {
        area_ = 0.0;
        double prev = r1_;
        for (const auto& s : steps_) {
            area_ += (s[0] - r0_) * (s[1] - prev);
            prev = s[1];
        }
    }

    double r0_, r1_;
    double area_ = 0.0;
    std::vector<std::array<double, 2>> steps_;
};

double volume_3d(std::vector<std::array<double, 3>>& pts, std::span<const double> r) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        if (a[2] != b[2]) return a[2] > b[2];
        if (a[0] != b[0]) return a[0] > b[0];
        return a[1] > b[1];
    });
    // Points covered by the staircase are dominated by an earlier (higher z)
    // point and add no slab boundary, so the result depends only on the
    // non-dominated subset.
    Staircase stairs(r[0], r[1]);
    double vol = 0.0;
    double z_top = 0.0;
    bool started = false;
    for (const auto& p : pts) {
        if (started && stairs.covers(p[0], p[1])) continue;
        if (started) vol += stairs.area() * (z_top - p[2]);
        stairs.insert(p[0], p[1]);
        z_top = p[2];
        started = true;
    }
    if (started) vol += stairs.area() * (z_top - r[2]);
    return vol;
}

// Hypervolume of points already known to strictly dominate the reference.
double volume_strict(std::span<const double> flat, std::size_t n, std::span<const double> r) {
    const std::size_t k = r.size();
    if (n == 0) return 0.0;
    switch (k) {
        case 1: {
            double best = r[0];
            for (std::size_t i = 0; i < n; ++i) best = std::max(best, flat[i]);
            return best - r[0];
        }
        case 2: {
            std::vector<std::array<double, 2>> pts(n);
            for (std::size_t i = 0; i < n; ++i) pts[i] = {flat[2 * i], flat[2 * i + 1]};
            return area_2d(pts, r[0], r[1]);
        }
        case 3: {
            std::vector<std::array<double, 3>> pts(n);
            for (std::size_t i = 0; i < n; ++i) {
                pts[i] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
            }
            return volume_3d(pts, r);
        }
        default:
            throw UnsupportedDimensionError("exact hypervolume supports K <= 3, got K=" +
                                            std::to_string(k) + "; use hypervolume_mc");
    }
}

bool strictly_above(std::span<const double> p, std::span<const double> r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(p[i] > r[i])) return false;
    }
    return true;
}

}  // namespace

bool weakly_dominates(std::span<const double> a, std::span<const double> b) {
    check_same_dim(a.size(), b.size(), "weakly_dominates");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
    }
    return true;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    check_same_dim(a.size(), b.size(), "dominates");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

ParetoArchive::ParetoArchive(ObjectiveVector reference) : reference_(std::move(reference)) {
    for (double v : reference_) {
        if (!std::isfinite(v)) throw DimensionError("reference point must be finite");
    }
}

bool ParetoArchive::insert(const ObjectiveVector& p) {
    check_same_dim(p.size(), dim(), "ParetoArchive::insert");
    for (double v : p) {
        if (!std::isfinite(v)) throw DimensionError("objective vector must be finite");
    }
    for (const auto& q : points_) {
        if (q == p || dominates(q, p)) return false;
    }
    std::erase_if(points_, [&](const ObjectiveVector& q) { return dominates(p, q); });
    points_.push_back(p);
    return true;
}

bool ParetoArchive::covers(std::span<const double> p) const {
    check_same_dim(p.size(), dim(), "ParetoArchive::covers");
    return std::any_of(points_.begin(), points_.end(),
                       [&](const ObjectiveVector& q) { return weakly_dominates(q, p); });
}

ParetoArchive pareto_front(const std::vector<ObjectiveVector>& points,
                           const ObjectiveVector& reference) {
    if (points.empty()) throw EmptyArchiveError("pareto_front: empty input");
    ParetoArchive archive(reference);
    for (const auto& p : points) archive.insert(p);
    return archive;
}

ParetoArchive pareto_front(const std::vector<ObjectiveVector>& points) {
    if (points.empty()) throw EmptyArchiveError("pareto_front: empty input");
    return pareto_front(points, ObjectiveVector(points.front().size(), 0.0));
}

double hypervolume(std::span<const double> flat, std::span<const double> reference) {
    const std::size_t k = reference.size();
    if (k == 0 || flat.size() % k != 0) {
        throw DimensionError("hypervolume: point buffer is not a multiple of K");
    }
    if (k > 3) {
        throw UnsupportedDimensionError("exact hypervolume supports K <= 3, got K=" +
                                        std::to_string(k) + "; use hypervolume_mc");
    }
    const std::size_t n = flat.size() / k;
    std::vector<double> kept;
    kept.reserve(flat.size());
    for (std::size_t i = 0; i < n; ++i) {
        auto p = flat.subspan(i * k, k);
        if (strictly_above(p, reference)) kept.insert(kept.end(), p.begin(), p.end());
    }
    return volume_strict(kept, kept.size() / k, reference);
}

double hypervolume(const ParetoArchive& archive) {
    std::vector<double> flat;
    flat.reserve(archive.size() * archive.dim());
    for (const auto& p : archive.points()) flat.insert(flat.end(), p.begin(), p.end());
    return hypervolume(flat, archive.reference());
}

double hvi(std::span<const double> candidate, std::span<const double> flat,
           std::span<const double> reference) {
    const std::size_t k = reference.size();
    check_same_dim(candidate.size(), k, "hvi");
    if (k == 0 || flat.size() % k != 0) {
        throw DimensionError("hvi: point buffer is not a multiple of K");
    }
    if (k > 3) {
        throw UnsupportedDimensionError("exact hvi supports K <= 3, got K=" + std::to_string(k));
    }
    if (!strictly_above(candidate, reference)) return 0.0;

    // HVI(c) = vol([r, c]) - HV({min(p, c)}): only the part of the front
    // inside the candidate's box matters.
    const std::size_t n = flat.size() / k;
    std::vector<double> clipped;
    clipped.reserve(flat.size());
    std::array<double, 3> q{};
    for (std::size_t i = 0; i < n; ++i) {
        auto p = flat.subspan(i * k, k);
        bool covers = true;
        bool inside = true;
        for (std::size_t j = 0; j < k; ++j) {
            if (p[j] < candidate[j]) covers = false;
            q[j] = std::min(p[j], candidate[j]);
            if (!(q[j] > reference[j])) inside = false;
        }
        if (covers) return 0.0;
        if (inside) clipped.insert(clipped.end(), q.begin(), q.begin() + k);
    }
    double box = 1.0;
    for (std::size_t j = 0; j < k; ++j) box *= candidate[j] - reference[j];
    const double covered = volume_strict(clipped, clipped.size() / k, reference);
    return std::max(0.0, box - covered);
}

double hvi(std::span<const double> candidate, const ParetoArchive& archive) {
    std::vector<double> flat;
    flat.reserve(archive.size() * archive.dim());
    for (const auto& p : archive.points()) flat.insert(flat.end(), p.begin(), p.end());
    return hvi(candidate, flat, archive.reference());
}

McEstimate hypervolume_mc(const ParetoArchive& archive, std::size_t n_samples,
                          std::uint64_t seed) {
    if (n_samples == 0) throw DimensionError("hypervolume_mc: n_samples must be positive");
    const auto& r = archive.reference();
    const std::size_t k = r.size();
    std::vector<double> hi(r);
    for (const auto& p : archive.points()) {
        for (std::size_t j = 0; j < k; ++j) hi[j] = std::max(hi[j], p[j]);
    }
    double box = 1.0;
    for (std::size_t j = 0; j < k; ++j) box *= hi[j] - r[j];
    if (!(box > 0.0)) return {};

    Rng rng(seed);
    std::vector<double> u(k);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t j = 0; j < k; ++j) u[j] = rng.uniform(r[j], hi[j]);
        if (archive.covers(u)) ++hits;
    }
    const double n = static_cast<double>(n_samples);
    const double frac = static_cast<double>(hits) / n;
    return {box * frac, box * std::sqrt(frac * (1.0 - frac) / n)};
}

}  // namespace dagbo
