#include "tq/inversion.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace tq {

std::vector<double> euler_invert_vector(const std::function<std::vector<Complex>(Complex)>& f, double t,
                                        int digits) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InputError("inversion time must be positive");
    if (digits < 2 || digits > 12) throw InputError("inversion precision must be between 2 and 12 digits");
    const double a = digits * std::numbers::ln10;
    const int n = digits;
    const int m = 2 * digits;
    const double scale = std::exp(a / 2.0) / t;

    // running partial sums s_k of the alternating series, componentwise
    std::vector<double> sum;
    std::vector<double> euler;
    double weight = std::ldexp(1.0, -m);  // binomial weight of s_{n + j}
    for (int k = 0; k <= n + m; ++k) {
        const std::vector<Complex> v = f(Complex(a / (2.0 * t), k * std::numbers::pi / t));
        if (k == 0) {
            sum.assign(v.size(), 0.0);
            euler.assign(v.size(), 0.0);
        } else if (v.size() != sum.size()) {
            throw InputError("transform changed length between nodes");
        }
        const double sign = k == 0 ? 0.5 : (k % 2 == 0 ? 1.0 : -1.0);
        for (std::size_t i = 0; i < v.size(); ++i) sum[i] += sign * v[i].real();
        if (k >= n) {
            for (std::size_t i = 0; i < v.size(); ++i) euler[i] += weight * sum[i];
            const int j = k - n;
            weight *= static_cast<double>(m - j) / (j + 1);
        }
    }
    for (auto& x : euler) x *= scale;
    return euler;
}

double euler_invert(const TransformEvaluator& f, double t, int digits) {
    return euler_invert_vector([&](Complex s) { return std::vector<Complex>{f(s)}; }, t, digits).front();
}

} // namespace tq
