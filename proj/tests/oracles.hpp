// Independent reference computations shared by the test suites. Nothing here
// calls into the library routines it is used to check.
#ifndef DAGBO_TESTS_ORACLES_HPP
#define DAGBO_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Point = std::vector<double>;

inline bool dominates(const Point& a, const Point& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

/// O(n^2) maximal-element filter with exact-equality dedupe, sorted.
inline std::vector<Point> nondominated(const std::vector<Point>& pts) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (j != i && dominates(pts[j], pts[i])) dominated = true;
        }
        if (!dominated && std::find(out.begin(), out.end(), pts[i]) == out.end()) {
            out.push_back(pts[i]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Inclusion-exclusion over all nonempty subsets; exponential, small n only.
inline double hypervolume_ie(const std::vector<Point>& pts, const Point& ref) {
    const std::size_t n = pts.size();
    const std::size_t k = ref.size();
    double total = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        double vol = 1.0;
        int bits = 0;
        for (std::size_t j = 0; j < k; ++j) {
            double lo = INFINITY;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (std::size_t{1} << i)) lo = std::min(lo, pts[i][j]);
            }
            vol *= std::max(0.0, lo - ref[j]);
        }
        for (std::size_t i = 0; i < n; ++i) bits += (mask >> i) & 1;
        total += (bits % 2 == 1) ? vol : -vol;
    }
    return total;
}

}  // namespace oracle

#endif  // DAGBO_TESTS_ORACLES_HPP
