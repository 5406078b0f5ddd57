#include "doctest.h"

#include <cmath>
#include <functional>

#include "thermobem/errors.hpp"
#include "thermobem/geometry.hpp"

using namespace thermobem;

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int depth = 0) {
    const double m = 0.5 * (a + b), h = b - a;
    const double fa = f(a), fm = f(m), fb = f(b);
    const double s1 = h / 6 * (fa + 4 * fm + fb);
    const double fl = f(0.5 * (a + m)), fr = f(0.5 * (m + b));
    const double s2 = h / 12 * (fa + 4 * fl + 2 * fm + 4 * fr + fb);
    if (depth > 30 || std::abs(s2 - s1) < 15 * tol) return s2 + (s2 - s1) / 15;
    return adaptive_simpson(f, a, m, tol / 2, depth + 1) +
           adaptive_simpson(f, m, b, tol / 2, depth + 1);
}

} // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("circle: node count, weights, normals") {
    BoundaryMesh m = make_circle(1.0, 16);
    CHECK(m.size() == 32);
    double sum = 0;
    for (double w : m.weights) sum += w;
    CHECK(sum == doctest::Approx(2 * M_PI).epsilon(1e-13));
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double nn = std::hypot(m.normals[i][0], m.normals[i][1]);
        CHECK(nn == doctest::Approx(1.0).epsilon(1e-13));
        // outward: positive dot with the node direction
        CHECK(m.normals[i][0] * m.nodes[i][0] + m.normals[i][1] * m.nodes[i][1] > 0);
    }
    CHECK_THROWS_AS(make_circle(1.0, 4), BadResolution);
    CHECK_THROWS_AS(make_circle(-1.0, 16), BadResolution);
}

TEST_CASE("ellipse perimeter against the arclength oracle") {
    BoundaryMesh m = make_ellipse(2.0, 1.0, 32);
    double sum = 0;
    for (double w : m.weights) sum += w;
    const double oracle = adaptive_simpson(
        [](double t) {
            return std::hypot(-2.0 * std::sin(t), 1.0 * std::cos(t));
        },
        0, 2 * M_PI, 1e-13);
    CHECK(sum == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("sphere refinement 2: 320 panels, area near 4 pi") {
    BoundaryMesh m = make_sphere(1.0, 2);
    CHECK(m.panels.size() == 320);
    double area = 0;
    for (double w : m.weights) area += w;
    CHECK(std::abs(area - 4 * M_PI) / (4 * M_PI) < 0.01);
    // spherical-triangle weights tile the sphere: the surface-measure defect
    // is at roundoff on every refinement level
    for (int level : {0, 1, 2, 3}) {
        BoundaryMesh s = make_sphere(1.0, level);
        double a = 0;
        for (double w : s.weights) a += w;
        CHECK(std::abs(a - 4 * M_PI) <= 1e-12);
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        double dot = 0;
        for (int c = 0; c < 3; ++c) dot += m.normals[i][c] * m.nodes[i][c];
        CHECK(dot > 0);
    }
}

TEST_CASE("trapezoid rule on the circle is spectral") {
    // analytic periodic integrand: exp(cos t), integral = 2 pi I0(1)
    const double exact = 2 * M_PI * 1.2660658777520083556;
    auto quad_error = [exact](int n) {
        BoundaryMesh m = make_circle(1.0, n);
        double s = 0;
        for (std::size_t i = 0; i < m.size(); ++i) s += m.weights[i] * std::exp(m.nodes[i][0]);
        return std::abs(s - exact);
    };
    const double e8 = quad_error(8);
    const double e16 = quad_error(16);
    CHECK(e16 * 100 < e8);
}

TEST_CASE("Kress rule integrates the periodic log kernel") {
    for (int two_n : {32, 64}) {
        BoundaryMesh m = make_circle(1.0, two_n / 2);
        SingularRule rule = singular_quadrature(m, 3);
        // constant density: the log integral vanishes
        double s = 0;
        for (double w : rule.log_weights) s += w;
        CHECK(std::abs(s) < 1e-12);
        // Fourier mode: int ln(4 sin^2((t-tau)/2)) cos(m tau) dtau = -2 pi cos(m t)/m
        for (int mode : {1, 3, 7}) {
            double acc = 0;
            for (int j = 0; j < two_n; ++j) acc += rule.log_weights[j] * std::cos(mode * m.param_t[j]);
            const double want = -2 * M_PI * std::cos(mode * m.param_t[3]) / mode;
            CHECK(acc == doctest::Approx(want).epsilon(1e-12));
        }
        CHECK(rule.param_weight == doctest::Approx(2 * M_PI / two_n));
    }
}

TEST_CASE("Duffy rule: 1/r over the unit right triangle from a vertex") {
    // exact value sqrt(2) asinh-free closed form: sqrt(2) ln(1+sqrt(2))
    const double exact = std::sqrt(2.0) * std::log(1.0 + std::sqrt(2.0));
    std::vector<Vec3> pts;
    std::vector<double> wts;
    duffy_triangle_rule({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 0}, 16, pts, wts);
    double s = 0;
    for (std::size_t q = 0; q < pts.size(); ++q)
        s += wts[q] / std::hypot(pts[q][0], pts[q][1]);
    CHECK(std::abs(s - exact) < 1e-8);
}

TEST_CASE("prolongation reproduces trigonometric polynomials exactly") {
    BoundaryMesh coarse = make_circle(1.0, 12);
    BoundaryMesh fine = refine_curve(coarse, 4);
    Eigen::MatrixXd p = prolongation_matrix(coarse, fine);
    Eigen::VectorXd v(coarse.size()), want(fine.size());
    for (std::size_t i = 0; i < coarse.size(); ++i)
        v(i) = std::cos(5 * coarse.param_t[i]) + 0.3 * std::sin(2 * coarse.param_t[i]);
    for (std::size_t q = 0; q < fine.size(); ++q)
        want(q) = std::cos(5 * fine.param_t[q]) + 0.3 * std::sin(2 * fine.param_t[q]);
    CHECK((p * v - want).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("mesh json round trip") {
    BoundaryMesh m = make_ellipse(2.0, 1.0, 16);
    BoundaryMesh back = mesh_from_json(mesh_to_json(m));
    CHECK(back.size() == m.size());
    CHECK(back.nodes[5][0] == doctest::Approx(m.nodes[5][0]).epsilon(1e-15));
    BoundaryMesh s = mesh_from_json(mesh_to_json(make_sphere(0.5, 1)));
    CHECK(s.panels.size() == 80);
}

TEST_SUITE_END();
