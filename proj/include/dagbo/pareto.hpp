#ifndef DAGBO_PARETO_HPP
#define DAGBO_PARETO_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dagbo {

/// A point in objective space. Maximization convention throughout.
using ObjectiveVector = std::vector<double>;

/// a dominates b: a >= b everywhere and a > b somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);

/// a >= b everywhere.
bool weakly_dominates(std::span<const double> a, std::span<const double> b);

/**
 * Set of mutually non-dominated objective vectors plus the reference point
 * that bounds the dominated region from below.
 *
 * Points that do not weakly dominate the reference are kept but clipped to
 * it when measuring volume, so they contribute nothing.
 */
class ParetoArchive {
public:
    explicit ParetoArchive(ObjectiveVector reference);

    std::size_t dim() const { return reference_.size(); }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    const std::vector<ObjectiveVector>& points() const { return points_; }
    const ObjectiveVector& reference() const { return reference_; }

    /// Adds p unless it is dominated by or bitwise equal to a member; evicts
    /// members p dominates. Returns true when p was added.
    bool insert(const ObjectiveVector& p);

    /// True when some member weakly dominates p.
    bool covers(std::span<const double> p) const;

private:
    std::vector<ObjectiveVector> points_;
    ObjectiveVector reference_;
};

/// Maximal elements of `points`, deduplicated by exact equality.
/// Throws EmptyArchiveError on empty input.
ParetoArchive pareto_front(const std::vector<ObjectiveVector>& points,
                           const ObjectiveVector& reference);

/// pareto_front with the reference at the origin.
ParetoArchive pareto_front(const std::vector<ObjectiveVector>& points);

/// Exact hypervolume for K <= 3. Invariant to the order of points (bitwise).
double hypervolume(const ParetoArchive& archive);

/// Exact hypervolume of `n` points stored row-major in `flat` (n*K values).
/// Points need not be mutually non-dominated.
double hypervolume(std::span<const double> flat, std::span<const double> reference);

/// Exact hypervolume improvement of `candidate` over the archive, >= 0.
double hvi(std::span<const double> candidate, const ParetoArchive& archive);

/// hvi over a row-major point set (dominated rows allowed).
double hvi(std::span<const double> candidate, std::span<const double> flat,
           std::span<const double> reference);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo hypervolume over the bounding box [reference, max(points)].
/// Any dimension is supported; serves as an oracle for the exact routines.
McEstimate hypervolume_mc(const ParetoArchive& archive, std::size_t n_samples,
                          std::uint64_t seed);

}  // namespace dagbo

#endif  // DAGBO_PARETO_HPP
