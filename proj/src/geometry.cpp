#include "thermobem/geometry.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "thermobem/errors.hpp"
#include "json.hpp"

namespace thermobem {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void curve_point(const BoundaryMesh& m, double t, Vec3& x, Vec3& nrm, Vec3& tang,
                 double& sp) {
    const double a = m.shape == "circle" ? m.radius : m.semi_a;
    const double b = m.shape == "circle" ? m.radius : m.semi_b;
    const double ct = std::cos(t), st = std::sin(t);
    x = {a * ct, b * st, 0.0};
    const double dx = -a * st, dy = b * ct;
    sp = std::hypot(dx, dy);
    tang = {dx / sp, dy / sp, 0.0};
    nrm = {dy / sp, -dx / sp, 0.0};
}

void fill_curve(BoundaryMesh& m, int two_n) {
    m.nodes.resize(two_n);
    m.normals.resize(two_n);
    m.weights.resize(two_n);
    m.param_t.resize(two_n);
    m.speed.resize(two_n);
    m.tangents.resize(two_n);
    const double h = kTwoPi / two_n;
    for (int i = 0; i < two_n; ++i) {
        const double t = h * i;
        m.param_t[i] = t;
        curve_point(m, t, m.nodes[i], m.normals[i], m.tangents[i], m.speed[i]);
        m.weights[i] = h * m.speed[i];
    }
}

Vec3 cross(const Vec3& u, const Vec3& v) {
    return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 sub(const Vec3& u, const Vec3& v) { return {u[0] - v[0], u[1] - v[1], u[2] - v[2]}; }

Vec3 scale_to_sphere(const Vec3& v, double radius) {
    const double n = norm3(v);
    return {v[0] * radius / n, v[1] * radius / n, v[2] * radius / n};
}

} // namespace

double BoundaryMesh::local_spacing(std::size_t i) const {
    if (dim == 2) return kTwoPi / static_cast<double>(size()) * speed[i];
    return std::sqrt(weights[i]);
}

double BoundaryMesh::diameter() const {
    if (shape == "circle" || shape == "sphere") return 2.0 * radius;
    return 2.0 * std::max(semi_a, semi_b);
}

BoundaryMesh make_circle(double radius, int n) {
    if (n < 8) throw BadResolution("circle needs N >= 8");
    if (!(radius > 0)) throw BadResolution("circle needs positive radius");
    BoundaryMesh m;
    m.dim = 2;
    m.shape = "circle";
    m.radius = radius;
    m.resolution = n;
    fill_curve(m, 2 * n);
    std::ostringstream id;
    id << "circle:R=" << radius << ":N=" << n;
    m.id = id.str();
    return m;
}

BoundaryMesh make_ellipse(double semi_a, double semi_b, int n) {
    if (n < 8) throw BadResolution("ellipse needs N >= 8");
    if (!(semi_a > 0) || !(semi_b > 0)) throw BadResolution("ellipse needs positive semi-axes");
    BoundaryMesh m;
    m.dim = 2;
    m.shape = "ellipse";
    m.semi_a = semi_a;
    m.semi_b = semi_b;
    m.resolution = n;
    fill_curve(m, 2 * n);
    std::ostringstream id;
    id << "ellipse:a=" << semi_a << ":b=" << semi_b << ":N=" << n;
    m.id = id.str();
    return m;
}

BoundaryMesh refine_curve(const BoundaryMesh& mesh, int factor) {
    if (mesh.dim != 2) throw DomainError("refine_curve applies to 2D meshes");
    BoundaryMesh fine = mesh;
    fill_curve(fine, static_cast<int>(mesh.size()) * factor);
    return fine;
}

BoundaryMesh make_sphere(double radius, int refinement) {
    if (!(radius > 0)) throw BadResolution("sphere needs positive radius");
    if (refinement < 0 || refinement > 6) throw BadResolution("sphere refinement must be 0..6");
    BoundaryMesh m;
    m.dim = 3;
    m.shape = "sphere";
    m.radius = radius;
    m.resolution = refinement;

    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : verts) v = scale_to_sphere(v, radius);
    std::vector<std::array<int, 3>> tris = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int level = 0; level < refinement; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int i, int j) {
            auto key = std::minmax(i, j);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 p = {(verts[i][0] + verts[j][0]) / 2, (verts[i][1] + verts[j][1]) / 2,
                      (verts[i][2] + verts[j][2]) / 2};
            verts.push_back(scale_to_sphere(p, radius));
            int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(tris.size() * 4);
        for (const auto& t : tris) {
            int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }

    m.vertices = verts;
    m.panels = tris;
    m.nodes.resize(tris.size());
    m.normals.resize(tris.size());
    m.weights.resize(tris.size());
    for (std::size_t p = 0; p < tris.size(); ++p) {
        const Vec3 &a = verts[tris[p][0]], &b = verts[tris[p][1]], &c = verts[tris[p][2]];
        Vec3 cen = {(a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3, (a[2] + b[2] + c[2]) / 3};
        // node on the sphere, radial normal, exact spherical-triangle area
        m.nodes[p] = scale_to_sphere(cen, radius);
        const double cn = norm3(cen);
        m.normals[p] = {cen[0] / cn, cen[1] / cn, cen[2] / cn};
        const double triple = a[0] * (b[1] * c[2] - b[2] * c[1]) -
                              a[1] * (b[0] * c[2] - b[2] * c[0]) +
                              a[2] * (b[0] * c[1] - b[1] * c[0]);
        auto dot = [](const Vec3& u, const Vec3& v) {
            return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        };
        const double r3 = radius * radius * radius;
        const double denom =
            r3 + radius * (dot(a, b) + dot(b, c) + dot(a, c));
        const double omega = 2.0 * std::atan2(std::abs(triple), denom);
        m.weights[p] = omega * radius * radius;
    }
    std::ostringstream id;
    id << "sphere:R=" << radius << ":L=" << refinement;
    m.id = id.str();
    return m;
}

Eigen::MatrixXd prolongation_matrix(const BoundaryMesh& coarse, const BoundaryMesh& fine) {
    const int mc = static_cast<int>(coarse.size());
    const int mf = static_cast<int>(fine.size());
    Eigen::MatrixXd p(mf, mc);
    auto cardinal = [mc](double theta) {
        double w = std::remainder(theta, kTwoPi);
        if (std::abs(w) < 1e-14) return 1.0;
        if (mc % 2 == 0)
            return std::sin(mc * w / 2.0) / std::tan(w / 2.0) / mc;
        return std::sin(mc * w / 2.0) / std::sin(w / 2.0) / mc;
    };
    for (int q = 0; q < mf; ++q)
        for (int j = 0; j < mc; ++j)
            p(q, j) = cardinal(fine.param_t[q] - coarse.param_t[j]);
    return p;
}

std::vector<double> kress_log_weights(int two_n) {
    const int nh = two_n / 2;
    std::vector<double> r(two_n);
    for (int dlt = 0; dlt < two_n; ++dlt) {
        const double t = M_PI * dlt / nh;
        double acc = 0;
        for (int mq = 1; mq < nh; ++mq) acc += std::cos(mq * t) / mq;
        r[dlt] = -kTwoPi / nh * acc - M_PI / (nh * nh) * std::cos(nh * t);
    }
    return r;
}

void duffy_triangle_rule(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& sing,
                         int order, std::vector<Vec3>& pts, std::vector<double>& wts) {
    // Gauss-Legendre nodes on (0,1)
    std::vector<double> gx(order), gw(order);
    {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
        for (int i = 1; i < order; ++i) {
            double v = i / std::sqrt(4.0 * i * i - 1.0);
            J(i, i - 1) = J(i - 1, i) = v;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        for (int i = 0; i < order; ++i) {
            gx[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
            gw[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        }
    }
    pts.clear();
    wts.clear();
    const Vec3 corners[3] = {a, b, c};
    for (int e = 0; e < 3; ++e) {
        const Vec3 &va = corners[e], &vb = corners[(e + 1) % 3];
        // skip degenerate sub-triangles when sing sits on a vertex/edge
        Vec3 u = sub(va, sing), v = sub(vb, sing);
        double twice_area = norm3(cross(u, v));
        if (twice_area < 1e-30) continue;
        // p(s,t) = sing + s*((1-t)*u + t*v), jacobian = s * twice_area
        for (int i = 0; i < order; ++i)
            for (int j = 0; j < order; ++j) {
                const double s = gx[i], t = gx[j];
                Vec3 p = {sing[0] + s * ((1 - t) * u[0] + t * v[0]),
                          sing[1] + s * ((1 - t) * u[1] + t * v[1]),
                          sing[2] + s * ((1 - t) * u[2] + t * v[2])};
                pts.push_back(p);
                wts.push_back(gw[i] * gw[j] * s * twice_area);
            }
    }
}

SingularRule singular_quadrature(const BoundaryMesh& mesh, std::size_t target) {
    SingularRule rule;
    if (mesh.dim == 2) {
        const int m = static_cast<int>(mesh.size());
        static thread_local std::vector<double> cache;
        static thread_local int cache_m = -1;
        if (cache_m != m) {
            cache = kress_log_weights(m);
            cache_m = m;
        }
        rule.log_weights.resize(m);
        for (int j = 0; j < m; ++j)
            rule.log_weights[j] = cache[((static_cast<int>(target) - j) % m + m) % m];
        rule.param_weight = kTwoPi / m;
    } else {
        const auto& t = mesh.panels[target];
        const Vec3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
        // cluster at the in-plane centroid; the node sits slightly off-plane
        const Vec3 cen = {(a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3,
                          (a[2] + b[2] + c[2]) / 3};
        duffy_triangle_rule(a, b, c, cen, 8, rule.points, rule.weights);
    }
    return rule;
}

BoundaryMesh mesh_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const std::string shape = j.at("shape").get<std::string>();
    const auto& params = j.at("params");
    if (shape == "circle")
        return make_circle(params.at("radius").get<double>(), params.at("n").get<int>());
    if (shape == "ellipse")
        return make_ellipse(params.at("a").get<double>(), params.at("b").get<double>(),
                            params.at("n").get<int>());
    if (shape == "sphere")
        return make_sphere(params.at("radius").get<double>(), params.at("n").get<int>());
    throw BadResolution("unknown mesh shape \"" + shape + "\"");
}

std::string mesh_to_json(const BoundaryMesh& m) {
    nlohmann::json j;
    j["shape"] = m.shape;
    if (m.shape == "circle" || m.shape == "sphere") {
        j["params"] = {{"radius", m.radius}, {"n", m.resolution}};
    } else {
        j["params"] = {{"a", m.semi_a}, {"b", m.semi_b}, {"n", m.resolution}};
    }
    auto coords = [&](const std::vector<Vec3>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : v) {
            if (m.dim == 2)
                arr.push_back({p[0], p[1]});
            else
                arr.push_back({p[0], p[1], p[2]});
        }
        return arr;
    };
    j["nodes"] = coords(m.nodes);
    j["normals"] = coords(m.normals);
    j["weights"] = m.weights;
    if (m.dim == 3) {
        j["vertices"] = coords(m.vertices);
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : m.panels) arr.push_back({p[0], p[1], p[2]});
        j["panels"] = arr;
    }
    return j.dump();
}

} // namespace thermobem
