#include "sea/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sea/error.hpp"

namespace sea {

Tensor normalized_laplacian(const Graph& g) {
    const int n = g.num_nodes();
    std::vector<double> dinv_sqrt(n, 0.0);
    for (int u = 0; u < n; ++u)
        if (g.degree(u) > 0) dinv_sqrt[u] = 1.0 / std::sqrt(g.degree(u));

    Tensor lap({static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
    for (int u = 0; u < n; ++u) {
        lap.at(u, u) = 1.0;
        for (int v : g.neighbors(u))
            lap.at(u, v) = -dinv_sqrt[u] * dinv_sqrt[v];
    }
    return lap;
}

Spectrum eigendecompose_symmetric(const Tensor& m, double tol, int max_sweeps) {
    require(m.shape().size() == 2 && m.rows() == m.cols(),
            "eigendecompose: matrix must be square, got ", m.shape_str());
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            require(std::abs(m.at(i, j) - m.at(j, i)) <= 1e-12,
                    "eigendecompose: matrix not symmetric at (", i, ",", j, ")");

    Tensor a = m.detach();
    Tensor vec({n, n});
    for (std::size_t i = 0; i < n; ++i) vec.at(i, i) = 1.0;

    auto max_offdiag = [&] {
        double mx = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                mx = std::max(mx, std::abs(a.at(p, q)));
        return mx;
    };

    int sweep = 0;
    while (n > 1 && max_offdiag() > tol) {
        require(sweep < max_sweeps,
                "eigendecompose: no convergence after ", max_sweeps,
                " sweeps (off-diagonal residual ", max_offdiag(), ")");
        ++sweep;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::abs(apq) <= tol) continue;
                const double app = a.at(p, p);
                const double aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vec.at(k, p);
                    const double vkq = vec.at(k, q);
                    vec.at(k, p) = c * vkp - s * vkq;
                    vec.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    // Ascending eigenvalue order with eigenvector columns following.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a.at(x, x) < a.at(y, y);
    });

    Spectrum sp;
    sp.eigenvalues.resize(n);
    sp.eigenvectors = Tensor({n, n});
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        sp.eigenvalues[col] = a.at(src, src);
        // Sign convention: the first component of largest magnitude is
        // positive.
        std::size_t argmax = 0;
        double best = -1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double mag = std::abs(vec.at(k, src));
            if (mag > best) {
                best = mag;
                argmax = k;
            }
        }
        const double flip = vec.at(argmax, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k)
            sp.eigenvectors.at(k, col) = flip * vec.at(k, src);
    }
    return sp;
}

Tensor lpe(const Graph& g, int lpe_dim, bool skip_trivial) {
    require(lpe_dim >= 1, "lpe: lpe_dim must be >= 1, got ", lpe_dim);
    const std::size_t n = g.num_nodes();
    Spectrum sp = eigendecompose_symmetric(normalized_laplacian(g));

    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < n && cols.size() < static_cast<std::size_t>(lpe_dim); ++c) {
        if (skip_trivial && sp.eigenvalues[c] < 1e-8) continue;
        cols.push_back(c);
    }

    Tensor out({n, static_cast<std::size_t>(lpe_dim)});
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t u = 0; u < n; ++u)
            out.at(u, j) = sp.eigenvectors.at(u, cols[j]);
    return out;
}

}  // namespace sea
