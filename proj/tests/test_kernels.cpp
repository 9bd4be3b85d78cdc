#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include "mdcsim/kernels.hpp"
#include "mdcsim/rng.hpp"

using namespace mdcsim;

namespace {

std::size_t brute_nearest(double px, double py, const std::vector<double>& xs,
                          const std::vector<double>& ys) {
    std::size_t best = 0;
    double best_d = (xs[0] - px) * (xs[0] - px) + (ys[0] - py) * (ys[0] - py);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double d = (xs[i] - px) * (xs[i] - px) + (ys[i] - py) * (ys[i] - py);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("nearest_point: base cases and tie-break") {
    const std::vector<double> xs = {1.0, 0.0};
    const std::vector<double> ys = {0.0, 2.0};
    CHECK(kernels::nearest_point_scalar(0.0, 0.0, xs.data(), ys.data(), 2) == 0);

    // Equidistant candidates resolve to the lowest index.
    const std::vector<double> tx = {0.0, 2.0};
    const std::vector<double> ty = {0.0, 2.0};
    CHECK(kernels::nearest_point_scalar(1.0, 1.0, tx.data(), ty.data(), 2) == 0);

    // Exact duplicates as well.
    const std::vector<double> dx = {5.0, 5.0, 5.0};
    const std::vector<double> dy = {5.0, 5.0, 5.0};
    CHECK(kernels::nearest_point_scalar(4.0, 4.0, dx.data(), dy.data(), 3) == 0);
}

TEST_CASE("nearest_point: dispatch matches scalar reference exactly") {
    rng::Stream rs(123, {1});
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + rs.uniform_index(97);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rs.uniform(-1000.0, 1000.0);
            ys[i] = rs.uniform(-1000.0, 1000.0);
        }
        // Duplicate a few coordinates to force ties.
        if (n > 4) {
            xs[n - 1] = xs[0];
            ys[n - 1] = ys[0];
            xs[n / 2] = xs[1];
            ys[n / 2] = ys[1];
        }
        const double px = rs.uniform(-1000.0, 1000.0);
        const double py = rs.uniform(-1000.0, 1000.0);
        const std::size_t ref = kernels::nearest_point_scalar(px, py, xs.data(), ys.data(), n);
        CHECK(kernels::nearest_point(px, py, xs.data(), ys.data(), n) == ref);
        CHECK(ref == brute_nearest(px, py, xs, ys));
#if defined(MDCSIM_HAVE_AVX2)
        if (std::string(kernels::active_backend()) == "avx2")
            CHECK(kernels::nearest_point_avx2(px, py, xs.data(), ys.data(), n) == ref);
#endif
        // Querying a candidate's own coordinates returns its first occurrence.
        const std::size_t j = rs.uniform_index(n);
        const std::size_t hit = kernels::nearest_point(xs[j], ys[j], xs.data(), ys.data(), n);
        CHECK(xs[hit] == xs[j]);
        CHECK(ys[hit] == ys[j]);
        CHECK(hit <= j);
    }
}

TEST_CASE("assign_points: labels and inertia match a brute-force scan") {
    rng::Stream rs(55, {2});
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rs.uniform_index(60);
        const std::size_t k = 1 + rs.uniform_index(8);
        std::vector<double> xs(n), ys(n), w(n), cx(k), cy(k);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rs.uniform(0.0, 100.0);
            ys[i] = rs.uniform(0.0, 100.0);
            w[i] = rs.uniform(0.0, 5.0);
        }
        for (std::size_t c = 0; c < k; ++c) {
            cx[c] = rs.uniform(0.0, 100.0);
            cy[c] = rs.uniform(0.0, 100.0);
        }
        std::vector<std::uint32_t> labels(n), ref_labels(n);
        const double inertia = kernels::assign_points(xs.data(), ys.data(), w.data(), n,
                                                      cx.data(), cy.data(), k, labels.data());
        double ref_inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = (cx[0] - xs[i]) * (cx[0] - xs[i]) + (cy[0] - ys[i]) * (cy[0] - ys[i]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d =
                    (cx[c] - xs[i]) * (cx[c] - xs[i]) + (cy[c] - ys[i]) * (cy[c] - ys[i]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            ref_labels[i] = static_cast<std::uint32_t>(best);
            ref_inertia += w[i] * best_d;
        }
        CHECK(labels == ref_labels);
        CHECK(inertia == doctest::Approx(ref_inertia).epsilon(1e-12));
        // The scalar reference must agree bitwise with the dispatched path.
        std::vector<std::uint32_t> scalar_labels(n);
        const double scalar_inertia =
            kernels::assign_points_scalar(xs.data(), ys.data(), w.data(), n, cx.data(),
                                          cy.data(), k, scalar_labels.data());
        CHECK(scalar_labels == labels);
        CHECK(scalar_inertia == inertia);
    }
}

TEST_CASE("active_backend reports a known backend") {
    const std::string b = kernels::active_backend();
    CHECK((b == "scalar" || b == "avx2"));
}
