#include "mdcsim/kernels.hpp"

namespace mdcsim::kernels {

std::size_t nearest_point_scalar(double px, double py,
                                 const double* xs, const double* ys, std::size_t n) {
    std::size_t best = 0;
    double dx = xs[0] - px;
    double dy = ys[0] - py;
    double best_d = dx * dx + dy * dy;
    for (std::size_t i = 1; i < n; ++i) {
        dx = xs[i] - px;
        dy = ys[i] - py;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

double assign_points_scalar(const double* xs, const double* ys, const double* w,
                            std::size_t n,
                            const double* cx, const double* cy, std::size_t k,
                            std::uint32_t* labels) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = nearest_point_scalar(xs[i], ys[i], cx, cy, k);
        labels[i] = static_cast<std::uint32_t>(c);
        const double dx = cx[c] - xs[i];
        const double dy = cy[c] - ys[i];
        inertia += w[i] * (dx * dx + dy * dy);
    }
    return inertia;
}

}  // namespace mdcsim::kernels
