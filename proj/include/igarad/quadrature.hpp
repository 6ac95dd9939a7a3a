// Gauss-Legendre rules mapped onto knot spans.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace igarad {

/// One-dimensional rule on an interval.
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(points.size()); }
};

/// Gauss-Legendre nodes and weights on [-1,1], Newton iteration on P_n.
inline GaussRule gauss_legendre(int npts)
{
    if (npts < 1)
        throw std::invalid_argument("gauss_legendre: need at least one point");
    GaussRule rule;
    rule.points.resize(static_cast<std::size_t>(npts));
    rule.weights.resize(static_cast<std::size_t>(npts));
    const int half = (npts + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (npts + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= npts; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = npts * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= npts; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = npts * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = -x;
        rule.points[npts - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[npts - 1 - i] = w;
    }
    if (npts % 2 == 1)
        rule.points[half - 1] = 0.0;
    return rule;
}

/// Tensor Gauss-Legendre with a fixed number of points per direction per knot span.
class QuadratureRule {
public:
    explicit QuadratureRule(int points_per_span) : reference_(gauss_legendre(points_per_span)) {}

    /// Default rule for a space of the given order: order + 1 points.
    static QuadratureRule for_order(int order) { return QuadratureRule(order + 1); }

    [[nodiscard]] int points_per_span() const noexcept { return reference_.size(); }
    [[nodiscard]] const GaussRule& reference() const noexcept { return reference_; }

    /// Reference rule affinely mapped onto [a,b].
    [[nodiscard]] GaussRule on_interval(double a, double b) const
    {
        GaussRule r;
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int q = 0; q < reference_.size(); ++q) {
            r.points.push_back(mid + half * reference_.points[q]);
            r.weights.push_back(half * reference_.weights[q]);
        }
        return r;
    }

    /// Exact for polynomials up to this degree on each span.
    [[nodiscard]] int exact_degree() const noexcept { return 2 * points_per_span() - 1; }

private:
    GaussRule reference_;
};

} // namespace igarad
