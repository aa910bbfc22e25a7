#ifndef SEGFORGE_TENSOR_HPP
#define SEGFORGE_TENSOR_HPP

#include <cstddef>
#include <vector>

#include "segforge/errors.hpp"

namespace segforge {

// Dense (batch, channels, nx, ny, nz) activation/weight carrier. Spatial
// linearization is x-fastest, matching Volume; channel stride is nx*ny*nz.
// All activations compute in double so analytic gradients can be sanity
// checked against finite differences at tight tolerances.
struct Tensor5 {
    int b = 0, c = 0, nx = 0, ny = 0, nz = 0;
    std::vector<double> v;

    Tensor5() = default;
    Tensor5(int b_, int c_, int nx_, int ny_, int nz_, double fill = 0.0)
        : b(b_), c(c_), nx(nx_), ny(ny_), nz(nz_),
          v(static_cast<std::size_t>(b_) * c_ * nx_ * ny_ * nz_, fill) {}

    std::size_t spatial() const { return static_cast<std::size_t>(nx) * ny * nz; }
    std::size_t size() const { return v.size(); }

    std::size_t idx(int bb, int cc, int i, int j, int k) const {
        return (static_cast<std::size_t>(bb) * c + cc) * spatial() +
               static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * k);
    }

    double* plane(int bb, int cc) { return v.data() + (static_cast<std::size_t>(bb) * c + cc) * spatial(); }
    const double* plane(int bb, int cc) const {
        return v.data() + (static_cast<std::size_t>(bb) * c + cc) * spatial();
    }

    bool same_shape(const Tensor5& o) const {
        return b == o.b && c == o.c && nx == o.nx && ny == o.ny && nz == o.nz;
    }
};

inline Tensor5 zeros_like(const Tensor5& t) { return Tensor5(t.b, t.c, t.nx, t.ny, t.nz); }

} // namespace segforge

#endif
