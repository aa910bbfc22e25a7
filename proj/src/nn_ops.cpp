#include "segforge/nn_ops.hpp"

#include <algorithm>
#include <cmath>

namespace segforge {

namespace {

struct Range {
    int lo, hi; // [lo, hi)
};

// output positions o with 0 <= o + d < n (stride 1)
inline Range tap_range(int n, int d) {
    return {std::max(0, -d), std::min(n, n - d)};
}

// output positions o with 0 <= 2o + d < n (stride 2)
inline Range tap_range_s2(int on, int d, int n) {
    int lo = d < 0 ? (1 - d) / 2 : 0; // smallest o with 2o+d >= 0
    int hi = std::min(on, (n - 1 - d) / 2 + 1);
    return {lo, std::max(lo, hi)};
}

void check_conv_args(const Tensor5& x, std::span<const double> w, std::span<const double> bias,
                     int cout, int k, int stride) {
    if (k % 2 != 1 || k < 1) throw InvalidConfig("conv kernel size must be odd");
    if (stride != 1 && stride != 2) throw InvalidConfig("conv stride must be 1 or 2");
    if (stride == 2 && (x.nx % 2 || x.ny % 2 || x.nz % 2))
        throw ShapeMismatch("stride-2 conv requires even spatial dims");
    std::size_t want = static_cast<std::size_t>(cout) * x.c * k * k * k;
    if (w.size() != want || bias.size() != static_cast<std::size_t>(cout))
        throw LengthMismatch("conv parameter block size mismatch");
}

} // namespace

Tensor5 conv3d_forward(const Tensor5& x, std::span<const double> w, std::span<const double> bias,
                       int cout, int k, int stride) {
    check_conv_args(x, w, bias, cout, k, stride);
    const int pad = k / 2;
    const int onx = x.nx / stride, ony = x.ny / stride, onz = x.nz / stride;
    Tensor5 y(x.b, cout, onx, ony, onz);

    for (int b = 0; b < x.b; ++b) {
        for (int co = 0; co < cout; ++co) {
            double* yp = y.plane(b, co);
            std::fill(yp, yp + y.spatial(), bias[static_cast<std::size_t>(co)]);
            for (int ci = 0; ci < x.c; ++ci) {
                const double* xp = x.plane(b, ci);
                const double* wk = w.data() + (static_cast<std::size_t>(co) * x.c + ci) * k * k * k;
                for (int kz = 0; kz < k; ++kz) {
                    const int dz = kz - pad;
                    for (int ky = 0; ky < k; ++ky) {
                        const int dy = ky - pad;
                        for (int kx = 0; kx < k; ++kx) {
                            const int dx = kx - pad;
                            const double wv = wk[(kz * k + ky) * k + kx];
                            if (wv == 0.0) continue;
                            if (stride == 1) {
                                Range rz = tap_range(x.nz, dz), ry = tap_range(x.ny, dy), rx = tap_range(x.nx, dx);
                                for (int z = rz.lo; z < rz.hi; ++z) {
                                    for (int yy = ry.lo; yy < ry.hi; ++yy) {
                                        double* yrow = yp + (static_cast<std::size_t>(z) * ony + yy) * onx;
                                        const double* xrow =
                                            xp + (static_cast<std::size_t>(z + dz) * x.ny + (yy + dy)) * x.nx + dx;
                                        for (int xx = rx.lo; xx < rx.hi; ++xx) yrow[xx] += wv * xrow[xx];
                                    }
                                }
                            } else {
                                Range rz = tap_range_s2(onz, dz, x.nz), ry = tap_range_s2(ony, dy, x.ny),
                                      rx = tap_range_s2(onx, dx, x.nx);
                                for (int z = rz.lo; z < rz.hi; ++z) {
                                    for (int yy = ry.lo; yy < ry.hi; ++yy) {
                                        double* yrow = yp + (static_cast<std::size_t>(z) * ony + yy) * onx;
                                        const double* xrow =
                                            xp + (static_cast<std::size_t>(2 * z + dz) * x.ny + (2 * yy + dy)) * x.nx + dx;
                                        for (int xx = rx.lo; xx < rx.hi; ++xx) yrow[xx] += wv * xrow[2 * xx];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

void conv3d_backward(const Tensor5& x, std::span<const double> w, const Tensor5& gy,
                     int cout, int k, int stride,
                     Tensor5& gx, std::span<double> gw, std::span<double> gb) {
    check_conv_args(x, w, std::span<const double>(gb.data(), gb.size()), cout, k, stride);
    const int pad = k / 2;
    const int onx = gy.nx, ony = gy.ny, onz = gy.nz;
    gx = zeros_like(x);

    for (int b = 0; b < x.b; ++b) {
        for (int co = 0; co < cout; ++co) {
            const double* gyp = gy.plane(b, co);
            double acc = 0;
            for (std::size_t i = 0; i < gy.spatial(); ++i) acc += gyp[i];
            gb[static_cast<std::size_t>(co)] += acc;

            for (int ci = 0; ci < x.c; ++ci) {
                const double* xp = x.plane(b, ci);
                double* gxp = gx.plane(b, ci);
                const std::size_t wbase = (static_cast<std::size_t>(co) * x.c + ci) * k * k * k;
                const double* wk = w.data() + wbase;
                for (int kz = 0; kz < k; ++kz) {
                    const int dz = kz - pad;
                    for (int ky = 0; ky < k; ++ky) {
                        const int dy = ky - pad;
                        for (int kx = 0; kx < k; ++kx) {
                            const int dx = kx - pad;
                            const double wv = wk[(kz * k + ky) * k + kx];
                            double wacc = 0;
                            if (stride == 1) {
                                Range rz = tap_range(x.nz, dz), ry = tap_range(x.ny, dy), rx = tap_range(x.nx, dx);
                                for (int z = rz.lo; z < rz.hi; ++z) {
                                    for (int yy = ry.lo; yy < ry.hi; ++yy) {
                                        const double* gyrow = gyp + (static_cast<std::size_t>(z) * ony + yy) * onx;
                                        const std::size_t xoff =
                                            (static_cast<std::size_t>(z + dz) * x.ny + (yy + dy)) * x.nx + dx;
                                        const double* xrow = xp + xoff;
                                        double* gxrow = gxp + xoff;
                                        for (int xx = rx.lo; xx < rx.hi; ++xx) {
                                            wacc += gyrow[xx] * xrow[xx];
                                            gxrow[xx] += wv * gyrow[xx];
                                        }
                                    }
                                }
                            } else {
                                Range rz = tap_range_s2(onz, dz, x.nz), ry = tap_range_s2(ony, dy, x.ny),
                                      rx = tap_range_s2(onx, dx, x.nx);
                                for (int z = rz.lo; z < rz.hi; ++z) {
                                    for (int yy = ry.lo; yy < ry.hi; ++yy) {
                                        const double* gyrow = gyp + (static_cast<std::size_t>(z) * ony + yy) * onx;
                                        const std::size_t xoff =
                                            (static_cast<std::size_t>(2 * z + dz) * x.ny + (2 * yy + dy)) * x.nx + dx;
                                        const double* xrow = xp + xoff;
                                        double* gxrow = gxp + xoff;
                                        for (int xx = rx.lo; xx < rx.hi; ++xx) {
                                            wacc += gyrow[xx] * xrow[2 * xx];
                                            gxrow[2 * xx] += wv * gyrow[xx];
                                        }
                                    }
                                }
                            }
                            gw[wbase + static_cast<std::size_t>((kz * k + ky) * k + kx)] += wacc;
                        }
                    }
                }
            }
        }
    }
}

Tensor5 inorm_forward(const Tensor5& x, std::span<const double> gamma, std::span<const double> beta,
                      InormCache& cache) {
    if (gamma.size() != static_cast<std::size_t>(x.c) || beta.size() != static_cast<std::size_t>(x.c))
        throw LengthMismatch("instance norm parameter size mismatch");
    const std::size_t n = x.spatial();
    Tensor5 y = zeros_like(x);
    cache.mean.assign(static_cast<std::size_t>(x.b) * x.c, 0.0);
    cache.istd.assign(static_cast<std::size_t>(x.b) * x.c, 0.0);
    for (int b = 0; b < x.b; ++b) {
        for (int c = 0; c < x.c; ++c) {
            const double* xp = x.plane(b, c);
            double* yp = y.plane(b, c);
            double mu = 0;
            for (std::size_t i = 0; i < n; ++i) mu += xp[i];
            mu /= static_cast<double>(n);
            double var = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = xp[i] - mu;
                var += d * d;
            }
            var /= static_cast<double>(n);
            double istd = 1.0 / std::sqrt(var + kInormEps);
            cache.mean[static_cast<std::size_t>(b) * x.c + c] = mu;
            cache.istd[static_cast<std::size_t>(b) * x.c + c] = istd;
            const double g = gamma[static_cast<std::size_t>(c)], be = beta[static_cast<std::size_t>(c)];
            for (std::size_t i = 0; i < n; ++i) yp[i] = g * (xp[i] - mu) * istd + be;
        }
    }
    return y;
}

void inorm_backward(const Tensor5& x, std::span<const double> gamma, const InormCache& cache,
                    const Tensor5& gy, Tensor5& gx, std::span<double> ggamma, std::span<double> gbeta) {
    const std::size_t n = x.spatial();
    const double dn = static_cast<double>(n);
    gx = zeros_like(x);
    for (int b = 0; b < x.b; ++b) {
        for (int c = 0; c < x.c; ++c) {
            const double* xp = x.plane(b, c);
            const double* gyp = gy.plane(b, c);
            double* gxp = gx.plane(b, c);
            const double mu = cache.mean[static_cast<std::size_t>(b) * x.c + c];
            const double istd = cache.istd[static_cast<std::size_t>(b) * x.c + c];
            double sum_gy = 0, sum_gy_xhat = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double xhat = (xp[i] - mu) * istd;
                sum_gy += gyp[i];
                sum_gy_xhat += gyp[i] * xhat;
            }
            ggamma[static_cast<std::size_t>(c)] += sum_gy_xhat;
            gbeta[static_cast<std::size_t>(c)] += sum_gy;
            const double g = gamma[static_cast<std::size_t>(c)];
            const double a = g * istd / dn;
            for (std::size_t i = 0; i < n; ++i) {
                double xhat = (xp[i] - mu) * istd;
                gxp[i] = a * (dn * gyp[i] - sum_gy - xhat * sum_gy_xhat);
            }
        }
    }
}

Tensor5 relu_forward(const Tensor5& x) {
    Tensor5 y = x;
    for (double& v : y.v)
        if (v < 0) v = 0;
    return y;
}

void relu_backward(const Tensor5& x, const Tensor5& gy, Tensor5& gx) {
    gx = zeros_like(x);
    for (std::size_t i = 0; i < x.v.size(); ++i) gx.v[i] = x.v[i] > 0 ? gy.v[i] : 0.0;
}

Tensor5 maxpool2_forward(const Tensor5& x, std::vector<std::uint32_t>& argmax) {
    if (x.nx % 2 || x.ny % 2 || x.nz % 2) throw ShapeMismatch("maxpool2 requires even spatial dims");
    Tensor5 y(x.b, x.c, x.nx / 2, x.ny / 2, x.nz / 2);
    argmax.assign(y.size(), 0);
    std::size_t o = 0;
    for (int b = 0; b < x.b; ++b) {
        for (int c = 0; c < x.c; ++c) {
            for (int k = 0; k < y.nz; ++k) {
                for (int j = 0; j < y.ny; ++j) {
                    for (int i = 0; i < y.nx; ++i, ++o) {
                        double best = -1e300;
                        std::size_t best_idx = 0;
                        for (int dz = 0; dz < 2; ++dz)
                            for (int dy = 0; dy < 2; ++dy)
                                for (int dx = 0; dx < 2; ++dx) {
                                    std::size_t xi = x.idx(b, c, 2 * i + dx, 2 * j + dy, 2 * k + dz);
                                    if (x.v[xi] > best) {
                                        best = x.v[xi];
                                        best_idx = xi;
                                    }
                                }
                        y.v[o] = best;
                        argmax[o] = static_cast<std::uint32_t>(best_idx);
                    }
                }
            }
        }
    }
    return y;
}

void maxpool2_backward(const Tensor5& x, const std::vector<std::uint32_t>& argmax, const Tensor5& gy,
                       Tensor5& gx) {
    gx = zeros_like(x);
    for (std::size_t o = 0; o < gy.size(); ++o) gx.v[argmax[o]] += gy.v[o];
}

Tensor5 upsample2_forward(const Tensor5& x) {
    Tensor5 y(x.b, x.c, 2 * x.nx, 2 * x.ny, 2 * x.nz);
    for (int b = 0; b < x.b; ++b)
        for (int c = 0; c < x.c; ++c) {
            const double* xp = x.plane(b, c);
            double* yp = y.plane(b, c);
            for (int k = 0; k < y.nz; ++k)
                for (int j = 0; j < y.ny; ++j) {
                    const double* xrow = xp + (static_cast<std::size_t>(k / 2) * x.ny + j / 2) * x.nx;
                    double* yrow = yp + (static_cast<std::size_t>(k) * y.ny + j) * y.nx;
                    for (int i = 0; i < y.nx; ++i) yrow[i] = xrow[i / 2];
                }
        }
    return y;
}

void upsample2_backward(const Tensor5& gy, Tensor5& gx) {
    gx = Tensor5(gy.b, gy.c, gy.nx / 2, gy.ny / 2, gy.nz / 2);
    for (int b = 0; b < gy.b; ++b)
        for (int c = 0; c < gy.c; ++c) {
            const double* gyp = gy.plane(b, c);
            double* gxp = gx.plane(b, c);
            for (int k = 0; k < gy.nz; ++k)
                for (int j = 0; j < gy.ny; ++j) {
                    const double* gyrow = gyp + (static_cast<std::size_t>(k) * gy.ny + j) * gy.nx;
                    double* gxrow = gxp + (static_cast<std::size_t>(k / 2) * gx.ny + j / 2) * gx.nx;
                    for (int i = 0; i < gy.nx; ++i) gxrow[i / 2] += gyrow[i];
                }
        }
    return;
}

Tensor5 concat_forward(const Tensor5& a, const Tensor5& b) {
    if (a.b != b.b || a.nx != b.nx || a.ny != b.ny || a.nz != b.nz)
        throw ShapeMismatch("concat inputs differ in batch or spatial dims");
    Tensor5 y(a.b, a.c + b.c, a.nx, a.ny, a.nz);
    const std::size_t n = a.spatial();
    for (int bb = 0; bb < a.b; ++bb) {
        for (int c = 0; c < a.c; ++c)
            std::copy_n(a.plane(bb, c), n, y.plane(bb, c));
        for (int c = 0; c < b.c; ++c)
            std::copy_n(b.plane(bb, c), n, y.plane(bb, a.c + c));
    }
    return y;
}

void concat_backward(const Tensor5& gy, Tensor5& ga, Tensor5& gb) {
    const std::size_t n = gy.spatial();
    for (int bb = 0; bb < gy.b; ++bb) {
        for (int c = 0; c < ga.c; ++c)
            std::copy_n(gy.plane(bb, c), n, ga.plane(bb, c));
        for (int c = 0; c < gb.c; ++c)
            std::copy_n(gy.plane(bb, ga.c + c), n, gb.plane(bb, c));
    }
}

Tensor5 softmax_channels(const Tensor5& logits) {
    Tensor5 p = zeros_like(logits);
    const std::size_t n = logits.spatial();
    for (int b = 0; b < logits.b; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            double mx = -1e300;
            for (int c = 0; c < logits.c; ++c) mx = std::max(mx, logits.plane(b, c)[i]);
            double sum = 0;
            for (int c = 0; c < logits.c; ++c) {
                double e = std::exp(logits.plane(b, c)[i] - mx);
                p.plane(b, c)[i] = e;
                sum += e;
            }
            double inv = 1.0 / sum;
            for (int c = 0; c < logits.c; ++c) p.plane(b, c)[i] *= inv;
        }
    }
    return p;
}

LossTerms ce_dice_loss(const Tensor5& logits, std::span<const std::uint8_t> target, Tensor5& glogits) {
    const int C = logits.c;
    const std::size_t n = logits.spatial();
    const std::size_t total = static_cast<std::size_t>(logits.b) * n;
    if (target.size() != total) throw ShapeMismatch("target length does not match logits");
    for (std::uint8_t t : target)
        if (t >= C) throw ShapeMismatch("target label " + std::to_string(t) + " >= num_classes");

    Tensor5 p = softmax_channels(logits);

    LossTerms terms;
    // cross entropy, mean over voxels
    for (int b = 0; b < logits.b; ++b) {
        const std::uint8_t* t = target.data() + static_cast<std::size_t>(b) * n;
        for (std::size_t i = 0; i < n; ++i)
            terms.cross_entropy -= std::log(std::max(p.plane(b, t[i])[i], 1e-300));
    }
    terms.cross_entropy /= static_cast<double>(total);

    // soft dice per foreground class, pooled over the batch
    std::vector<double> inter(static_cast<std::size_t>(C), 0.0), denom(static_cast<std::size_t>(C), 0.0);
    for (int b = 0; b < logits.b; ++b) {
        const std::uint8_t* t = target.data() + static_cast<std::size_t>(b) * n;
        for (int c = 1; c < C; ++c) {
            const double* pc = p.plane(b, c);
            double a = 0, d = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double tc = t[i] == c ? 1.0 : 0.0;
                a += pc[i] * tc;
                d += pc[i] + tc;
            }
            inter[static_cast<std::size_t>(c)] += a;
            denom[static_cast<std::size_t>(c)] += d;
        }
    }
    double mean_dice = 0;
    if (C > 1) {
        for (int c = 1; c < C; ++c)
            mean_dice += (2 * inter[static_cast<std::size_t>(c)] + kDiceSmooth) /
                         (denom[static_cast<std::size_t>(c)] + kDiceSmooth);
        mean_dice /= static_cast<double>(C - 1);
        terms.dice = 1.0 - mean_dice;
    }
    terms.total = terms.cross_entropy + terms.dice;

    // gradient wrt probabilities from the dice term: for class c,
    // d(dice_c)/dp_cv = (2*t_cv*(denom+s) - (2*inter+s)) / (denom+s)^2
    glogits = zeros_like(logits);
    const double inv_total = 1.0 / static_cast<double>(total);
    const double fg = C > 1 ? 1.0 / static_cast<double>(C - 1) : 0.0;
    std::vector<double> gp(static_cast<std::size_t>(C), 0.0);
    for (int b = 0; b < logits.b; ++b) {
        const std::uint8_t* t = target.data() + static_cast<std::size_t>(b) * n;
        for (std::size_t i = 0; i < n; ++i) {
            // dice gradient wrt p for this voxel
            for (int c = 1; c < C; ++c) {
                double ds = denom[static_cast<std::size_t>(c)] + kDiceSmooth;
                double num = 2 * inter[static_cast<std::size_t>(c)] + kDiceSmooth;
                double tc = t[i] == c ? 1.0 : 0.0;
                gp[static_cast<std::size_t>(c)] = -fg * (2 * tc * ds - num) / (ds * ds);
            }
            gp[0] = 0.0;
            // chain through softmax: dL/dz_k = p_k * (gp_k - sum_j gp_j p_j)
            double dot = 0;
            for (int c = 1; c < C; ++c) dot += gp[static_cast<std::size_t>(c)] * p.plane(b, c)[i];
            for (int c = 0; c < C; ++c) {
                double pc = p.plane(b, c)[i];
                double g = pc * (gp[static_cast<std::size_t>(c)] - dot);
                // cross-entropy contribution (softmax already folded in)
                g += (pc - (t[i] == c ? 1.0 : 0.0)) * inv_total;
                glogits.plane(b, c)[i] = g;
            }
        }
    }
    return terms;
}

} // namespace segforge
