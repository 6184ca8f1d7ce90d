#ifndef DAGBO_DRAW_HPP
#define DAGBO_DRAW_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dagbo {

/// Dense S x M x K array of reals, row-major with K fastest.
class SampleTensor {
public:
    SampleTensor() = default;
    SampleTensor(int samples, int points, int objectives, double fill = 0.0)
        : s_(samples), m_(points), k_(objectives),
          data_(static_cast<std::size_t>(samples) * points * objectives, fill) {}

    int samples() const { return s_; }
    int points() const { return m_; }
    int objectives() const { return k_; }

    double& operator()(int s, int m, int k) { return data_[index(s, m, k)]; }
    double operator()(int s, int m, int k) const { return data_[index(s, m, k)]; }

    /// The K-vector for sample s at point m.
    std::span<const double> vector(int s, int m) const {
        return {data_.data() + index(s, m, 0), static_cast<std::size_t>(k_)};
    }

    const std::vector<double>& data() const { return data_; }
    bool operator==(const SampleTensor&) const = default;

private:
    std::size_t index(int s, int m, int k) const {
        return (static_cast<std::size_t>(s) * m_ + m) * k_ + k;
    }

    int s_ = 0, m_ = 0, k_ = 0;
    std::vector<double> data_;
};

/// Joint posterior draw of the zero-mode indicators (beta) and the
/// continuous values (rho), both S x M x K.
struct JointPosteriorDraw {
    SampleTensor beta;  // entries in {0, 1}
    SampleTensor rho;

    int samples() const { return rho.samples(); }
    int points() const { return rho.points(); }
    int objectives() const { return rho.objectives(); }
    bool operator==(const JointPosteriorDraw&) const = default;
};

}  // namespace dagbo

#endif  // DAGBO_DRAW_HPP
