#include "potkit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace potkit {

namespace {

GaussRule build_rule(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    // Newton iteration on Legendre roots, symmetric pairs.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_rule(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
    const GaussRule& r = gauss_rule(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0;
    for (int i = 0; i < n; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
    return s * half;
}

double integrate_panels(const std::function<double(double)>& f,
                        const std::vector<double>& breaks, int n) {
    double s = 0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i) s += integrate_gl(f, breaks[i], breaks[i + 1], n);
    return s;
}

std::vector<double> geometric_breaks(double a, double b, double toward, int count, double ratio) {
    std::vector<double> br;
    br.reserve(count + 1);
    const double len = b - a;
    if (toward == a) {
        br.push_back(b);
        double t = len;
        for (int i = 1; i < count; ++i) {
            t *= ratio;
            br.push_back(a + t);
        }
        br.push_back(a);
        std::reverse(br.begin(), br.end());
    } else {
        br.push_back(a);
        double t = len;
        for (int i = 1; i < count; ++i) {
            t *= ratio;
            br.push_back(b - t);
        }
        br.push_back(b);
    }
    return br;
}

namespace {

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double whole,
                    double rel_tol, double scale, int depth, int max_depth) {
    const double m = 0.5 * (a + b);
    const double left = integrate_gl(f, a, m, 8);
    const double right = integrate_gl(f, m, b, 8);
    const double err = std::abs(left + right - whole);
    if (depth >= max_depth || err <= rel_tol * std::max(scale, std::abs(left + right)))
        return left + right;
    return adaptive_rec(f, a, m, left, rel_tol, scale, depth + 1, max_depth) +
           adaptive_rec(f, m, b, right, rel_tol, scale, depth + 1, max_depth);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth) {
    if (!(b > a)) return 0.0;
    const double whole = integrate_gl(f, a, b, 8);
    return adaptive_rec(f, a, b, whole, rel_tol * 0.1, std::abs(whole), 0, max_depth);
}

}  // namespace potkit
