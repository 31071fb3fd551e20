#pragma once

#include "sea/graph.hpp"
#include "sea/tensor.hpp"

namespace sea {

// Eigendecomposition of a symmetric matrix: eigenvalues ascending,
// eigenvectors as orthonormal columns aligned with them. Each column's sign
// is normalized so its first largest-magnitude component is positive.
struct Spectrum {
    std::vector<double> eigenvalues;
    Tensor eigenvectors;  // (n, n), column i pairs with eigenvalues[i]
};

// Symmetric-normalized Laplacian I - D^{-1/2} A D^{-1/2} as a dense matrix.
// Degree-0 nodes get a unit diagonal row.
Tensor normalized_laplacian(const Graph& g);

// Cyclic Jacobi rotations; rotation threshold `tol`, budget `max_sweeps`
// sweeps. Throws with the residual if the off-diagonal mass does not drop
// below the threshold within the budget.
Spectrum eigendecompose_symmetric(const Tensor& m, double tol = 1e-12,
                                  int max_sweeps = 100);

// Per-node coordinates from the lpe_dim smallest eigenvectors of the
// normalized Laplacian, zero-padded when the graph has fewer nodes.
// skip_trivial excludes (near-)zero eigenvalues first.
Tensor lpe(const Graph& g, int lpe_dim, bool skip_trivial = false);

}  // namespace sea
