// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "ldm3d/core/error.hpp"
#include "ldm3d/simd/kernels.hpp"

namespace ldm3d::nn {

namespace {

const simd::KernelTable& K() { return simd::kernels(); }

size_t sz(int64_t v) { return static_cast<size_t>(v); }

void require_same(const Var& a, const Var& b, const char* op) {
    LDM3D_REQUIRE(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                                              shape_str(b.shape()));
}

Node& parent(Node& self, size_t i) { return *self.parents[i]; }

// g += src
void accumulate(Node& p, const Tensor& src) {
    Tensor& g = p.grad_buffer();
    K().add(g.data(), src.data(), g.data(), sz(g.numel()));
}

template <class F>
Var unary(const Var& x, F&& f, std::function<void(Node&)> bw) {
    Tensor out(x.shape());
    const Tensor& in = x.value();
    for (int64_t i = 0; i < in.numel(); ++i) out[i] = f(in[i]);
    return Var::make(std::move(out), {x}, std::move(bw));
}

}  // namespace

Var add(const Var& a, const Var& b) {
    require_same(a, b, "add");
    Tensor out(a.shape());
    K().add(a.value().data(), b.value().data(), out.data(), sz(out.numel()));
    return Var::make(std::move(out), {a, b}, [](Node& self) {
        for (size_t i = 0; i < 2; ++i)
            if (parent(self, i).requires_grad) accumulate(parent(self, i), self.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    require_same(a, b, "sub");
    Tensor out(a.shape());
    K().scale(-1.0, b.value().data(), out.data(), sz(out.numel()));
    K().add(a.value().data(), out.data(), out.data(), sz(out.numel()));
    return Var::make(std::move(out), {a, b}, [](Node& self) {
        if (parent(self, 0).requires_grad) accumulate(parent(self, 0), self.grad);
        if (parent(self, 1).requires_grad) {
            Tensor& g = parent(self, 1).grad_buffer();
            K().axpy(-1.0, self.grad.data(), g.data(), sz(g.numel()));
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same(a, b, "mul");
    Tensor out(a.shape());
    K().mul(a.value().data(), b.value().data(), out.data(), sz(out.numel()));
    return Var::make(std::move(out), {a, b}, [](Node& self) {
        for (size_t i = 0; i < 2; ++i) {
            Node& p = parent(self, i);
            if (!p.requires_grad) continue;
            Tensor tmp(self.grad.shape());
            K().mul(self.grad.data(), parent(self, 1 - i).value.data(), tmp.data(), sz(tmp.numel()));
            accumulate(p, tmp);
        }
    });
}

Var scale(const Var& a, real s) {
    Tensor out(a.shape());
    K().scale(s, a.value().data(), out.data(), sz(out.numel()));
    return Var::make(std::move(out), {a}, [s](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        K().axpy(s, self.grad.data(), g.data(), sz(g.numel()));
    });
}

Var add_scalar(const Var& a, real s) {
    Tensor out = a.value();
    for (auto& v : out.values()) v += s;
    return Var::make(std::move(out), {a}, [](Node& self) { accumulate(parent(self, 0), self.grad); });
}

Var add_channel_bias(const Var& x, const Var& bias) {
    const int64_t c = x.shape().at(0);
    LDM3D_REQUIRE(bias.value().numel() == c, "add_channel_bias: bias size must equal channel count");
    const int64_t plane = x.value().numel() / c;
    Tensor out = x.value();
    for (int64_t ch = 0; ch < c; ++ch) {
        const real bv = bias.value()[ch];
        real* p = out.data() + ch * plane;
        for (int64_t i = 0; i < plane; ++i) p[i] += bv;
    }
    return Var::make(std::move(out), {x, bias}, [c, plane](Node& self) {
        if (parent(self, 0).requires_grad) accumulate(parent(self, 0), self.grad);
        if (parent(self, 1).requires_grad) {
            Tensor& g = parent(self, 1).grad_buffer();
            for (int64_t ch = 0; ch < c; ++ch) g[ch] += K().sum(self.grad.data() + ch * plane, sz(plane));
        }
    });
}

Var silu(const Var& x) {
    return unary(x, [](real v) { return v / (1.0 + std::exp(-v)); }, [](Node& self) {
        Node& p = parent(self, 0);
        Tensor& g = p.grad_buffer();
        for (int64_t i = 0; i < g.numel(); ++i) {
            const real v = p.value[i];
            const real s = 1.0 / (1.0 + std::exp(-v));
            g[i] += self.grad[i] * s * (1.0 + v * (1.0 - s));
        }
    });
}

Var tanh(const Var& x) {
    return unary(x, [](real v) { return std::tanh(v); }, [](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
    });
}

Var exp(const Var& x) {
    return unary(x, [](real v) { return std::exp(v); }, [](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * self.value[i];
    });
}

Var abs(const Var& x) {
    return unary(x, [](real v) { return std::abs(v); }, [](Node& self) {
        Node& p = parent(self, 0);
        Tensor& g = p.grad_buffer();
        for (int64_t i = 0; i < g.numel(); ++i) {
            const real v = p.value[i];
            g[i] += self.grad[i] * (v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0));
        }
    });
}

Var square(const Var& x) {
    return unary(x, [](real v) { return v * v; }, [](Node& self) {
        Node& p = parent(self, 0);
        Tensor& g = p.grad_buffer();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += 2.0 * p.value[i] * self.grad[i];
    });
}

Var clamp(const Var& x, real lo, real hi) {
    return unary(x, [lo, hi](real v) { return std::clamp(v, lo, hi); }, [lo, hi](Node& self) {
        Node& p = parent(self, 0);
        Tensor& g = p.grad_buffer();
        for (int64_t i = 0; i < g.numel(); ++i)
            if (p.value[i] > lo && p.value[i] < hi) g[i] += self.grad[i];
    });
}

Var sum(const Var& x) {
    Tensor out = Tensor::scalar(K().sum(x.value().data(), sz(x.value().numel())));
    return Var::make(std::move(out), {x}, [](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        const real d = self.grad[0];
        for (auto& v : g.values()) v += d;
    });
}

Var mean(const Var& x) {
    const auto n = static_cast<real>(x.value().numel());
    LDM3D_REQUIRE(n > 0, "mean of empty tensor");
    return scale(sum(x), 1.0 / n);
}

Var mse(const Var& a, const Var& b) { return mean(square(sub(a, b))); }

Var reshape(const Var& x, Shape shape) {
    Tensor out = x.value().reshaped(std::move(shape));
    return Var::make(std::move(out), {x}, [](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        K().add(g.data(), self.grad.data(), g.data(), sz(g.numel()));
    });
}

Var transpose(const Var& x) {
    LDM3D_REQUIRE(x.value().rank() == 2, "transpose needs a 2-D tensor");
    const int64_t r = x.shape()[0], c = x.shape()[1];
    Tensor out(Shape{c, r});
    const real* in = x.value().data();
    for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
    return Var::make(std::move(out), {x}, [r, c](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        for (int64_t i = 0; i < r; ++i)
            for (int64_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
    });
}

Var concat_channels(const Var& a, const Var& b) {
    Tensor out = Tensor::concat_channels(a.value(), b.value());
    const int64_t na = a.value().numel();
    return Var::make(std::move(out), {a, b}, [na](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) {
            Tensor& g = pa.grad_buffer();
            K().add(g.data(), self.grad.data(), g.data(), sz(na));
        }
        if (pb.requires_grad) {
            Tensor& g = pb.grad_buffer();
            K().add(g.data(), self.grad.data() + na, g.data(), sz(g.numel()));
        }
    });
}

Var slice_channels(const Var& x, int64_t begin, int64_t end) {
    Tensor out = x.value().channel_slice(begin, end);
    const int64_t plane = x.value().numel() / x.shape()[0];
    return Var::make(std::move(out), {x}, [begin, plane](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        real* dst = g.data() + begin * plane;
        K().add(dst, self.grad.data(), dst, sz(self.grad.numel()));
    });
}

Var linear(const Var& x, const Var& w, const Var& b) {
    LDM3D_REQUIRE(x.value().rank() == 2 && w.value().rank() == 2 && x.shape()[1] == w.shape()[1],
                  "linear: expected x N x D and w O x D, got " + shape_str(x.shape()) + ", " + shape_str(w.shape()));
    const int64_t n = x.shape()[0], d = x.shape()[1], o = w.shape()[0];
    Tensor out(Shape{n, o});
    if (b.defined()) {
        LDM3D_REQUIRE(b.value().numel() == o, "linear: bias size mismatch");
        for (int64_t i = 0; i < n; ++i) std::copy_n(b.value().data(), o, out.data() + i * o);
    }
    K().gemm_nt(sz(n), sz(o), sz(d), x.value().data(), sz(d), w.value().data(), sz(d), out.data(), sz(o));
    std::vector<Var> parents{x, w};
    if (b.defined()) parents.push_back(b);
    return Var::make(std::move(out), std::move(parents), [n, d, o](Node& self) {
        Node& px = parent(self, 0);
        Node& pw = parent(self, 1);
        const real* dy = self.grad.data();
        if (px.requires_grad)
            K().gemm_nn(sz(n), sz(d), sz(o), dy, sz(o), pw.value.data(), sz(d), px.grad_buffer().data(), sz(d));
        if (pw.requires_grad)
            K().gemm_tn(sz(o), sz(d), sz(n), dy, sz(o), px.value.data(), sz(d), pw.grad_buffer().data(), sz(d));
        if (self.parents.size() > 2 && parent(self, 2).requires_grad) {
            Tensor& gb = parent(self, 2).grad_buffer();
            for (int64_t i = 0; i < n; ++i) K().add(gb.data(), dy + i * o, gb.data(), sz(o));
        }
    });
}

Var matmul(const Var& a, const Var& b) {
    LDM3D_REQUIRE(a.value().rank() == 2 && b.value().rank() == 2 && a.shape()[1] == b.shape()[0],
                  "matmul: inner dimensions differ");
    const int64_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    Tensor out(Shape{m, n});
    K().gemm_nn(sz(m), sz(n), sz(k), a.value().data(), sz(k), b.value().data(), sz(n), out.data(), sz(n));
    return Var::make(std::move(out), {a, b}, [m, k, n](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        const real* dy = self.grad.data();
        if (pa.requires_grad)
            K().gemm_nt(sz(m), sz(k), sz(n), dy, sz(n), pb.value.data(), sz(n), pa.grad_buffer().data(), sz(k));
        if (pb.requires_grad)
            K().gemm_tn(sz(k), sz(n), sz(m), pa.value.data(), sz(k), dy, sz(n), pb.grad_buffer().data(), sz(n));
    });
}

Var matmul_nt(const Var& a, const Var& b) {
    LDM3D_REQUIRE(a.value().rank() == 2 && b.value().rank() == 2 && a.shape()[1] == b.shape()[1],
                  "matmul_nt: inner dimensions differ");
    const int64_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
    Tensor out(Shape{m, n});
    K().gemm_nt(sz(m), sz(n), sz(k), a.value().data(), sz(k), b.value().data(), sz(k), out.data(), sz(n));
    return Var::make(std::move(out), {a, b}, [m, k, n](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        const real* dy = self.grad.data();
        if (pa.requires_grad)
            K().gemm_nn(sz(m), sz(k), sz(n), dy, sz(n), pb.value.data(), sz(k), pa.grad_buffer().data(), sz(k));
        if (pb.requires_grad)
            K().gemm_tn(sz(n), sz(k), sz(m), dy, sz(n), pa.value.data(), sz(k), pb.grad_buffer().data(), sz(k));
    });
}

Var softmax_rows(const Var& x) {
    LDM3D_REQUIRE(x.value().rank() == 2, "softmax_rows needs a 2-D tensor");
    const int64_t r = x.shape()[0], c = x.shape()[1];
    Tensor out(x.shape());
    for (int64_t i = 0; i < r; ++i) {
        const real* in = x.value().data() + i * c;
        real* o = out.data() + i * c;
        const real mx = *std::max_element(in, in + c);
        real s = 0;
        for (int64_t j = 0; j < c; ++j) s += (o[j] = std::exp(in[j] - mx));
        for (int64_t j = 0; j < c; ++j) o[j] /= s;
    }
    return Var::make(std::move(out), {x}, [r, c](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        for (int64_t i = 0; i < r; ++i) {
            const real* y = self.value.data() + i * c;
            const real* dy = self.grad.data() + i * c;
            const real dotv = K().dot(y, dy, sz(c));
            for (int64_t j = 0; j < c; ++j) g[i * c + j] += y[j] * (dy[j] - dotv);
        }
    });
}

namespace {

struct ConvGeom {
    int64_t c, h, w, o, k, stride, pad, ho, wo;
    int64_t ckk() const { return c * k * k; }
};

// Columns for output rows [y0, y1): (C*k*k) x ((y1 - y0) * Wo).
void im2col(const real* x, const ConvGeom& g, int64_t y0, int64_t y1, real* col) {
    const int64_t p = (y1 - y0) * g.wo;
    for (int64_t ch = 0; ch < g.c; ++ch)
        for (int64_t ky = 0; ky < g.k; ++ky)
            for (int64_t kx = 0; kx < g.k; ++kx) {
                real* row = col + ((ch * g.k + ky) * g.k + kx) * p;
                for (int64_t oy = y0; oy < y1; ++oy) {
                    const int64_t iy = oy * g.stride - g.pad + ky;
                    real* dst = row + (oy - y0) * g.wo;
                    if (iy < 0 || iy >= g.h) {
                        std::fill_n(dst, g.wo, 0.0);
                        continue;
                    }
                    const real* src = x + (ch * g.h + iy) * g.w;
                    for (int64_t ox = 0; ox < g.wo; ++ox) {
                        const int64_t ix = ox * g.stride - g.pad + kx;
                        dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0;
                    }
                }
            }
}

void col2im(const real* col, const ConvGeom& g, int64_t y0, int64_t y1, real* dx) {
    const int64_t p = (y1 - y0) * g.wo;
    for (int64_t ch = 0; ch < g.c; ++ch)
        for (int64_t ky = 0; ky < g.k; ++ky)
            for (int64_t kx = 0; kx < g.k; ++kx) {
                const real* row = col + ((ch * g.k + ky) * g.k + kx) * p;
                for (int64_t oy = y0; oy < y1; ++oy) {
                    const int64_t iy = oy * g.stride - g.pad + ky;
                    if (iy < 0 || iy >= g.h) continue;
                    const real* src = row + (oy - y0) * g.wo;
                    real* dst = dx + (ch * g.h + iy) * g.w;
                    for (int64_t ox = 0; ox < g.wo; ++ox) {
                        const int64_t ix = ox * g.stride - g.pad + kx;
                        if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
                    }
                }
            }
}

// Output rows per im2col tile, bounding the column buffer to ~2M values.
int64_t tile_rows(const ConvGeom& g) {
    const int64_t per_row = std::max<int64_t>(1, g.ckk() * g.wo);
    return std::clamp<int64_t>((int64_t{1} << 21) / per_row, 1, g.ho);
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    LDM3D_REQUIRE(xv.rank() == 3 && wv.rank() == 4, "conv2d: expected x C x H x W and w O x C x k x k");
    LDM3D_REQUIRE(wv.dim(1) == xv.dim(0), "conv2d: input has " + std::to_string(xv.dim(0)) +
                                              " channels, weight expects " + std::to_string(wv.dim(1)));
    LDM3D_REQUIRE(wv.dim(2) == wv.dim(3) && stride >= 1 && pad >= 0, "conv2d: bad kernel/stride/pad");
    ConvGeom g{xv.dim(0), xv.dim(1), xv.dim(2), wv.dim(0), wv.dim(2), stride, pad, 0, 0};
    g.ho = (g.h + 2 * pad - g.k) / stride + 1;
    g.wo = (g.w + 2 * pad - g.k) / stride + 1;
    LDM3D_REQUIRE(g.ho > 0 && g.wo > 0, "conv2d: kernel larger than padded input");

    const int64_t plane = g.ho * g.wo;
    Tensor out(Shape{g.o, g.ho, g.wo});
    if (b.defined()) {
        LDM3D_REQUIRE(b.value().numel() == g.o, "conv2d: bias size mismatch");
        for (int64_t oc = 0; oc < g.o; ++oc) std::fill_n(out.data() + oc * plane, plane, b.value()[oc]);
    }
    const int64_t rows = tile_rows(g);
    std::vector<real> col(sz(g.ckk() * rows * g.wo));
    std::vector<real> tile_out;
    for (int64_t y0 = 0; y0 < g.ho; y0 += rows) {
        const int64_t y1 = std::min(g.ho, y0 + rows);
        const int64_t p = (y1 - y0) * g.wo;
        im2col(xv.data(), g, y0, y1, col.data());
        if (y0 == 0 && y1 == g.ho) {
            K().gemm_nn(sz(g.o), sz(p), sz(g.ckk()), wv.data(), sz(g.ckk()), col.data(), sz(p), out.data(), sz(p));
        } else {
            // Output rows of a tile are strided by the full plane.
            K().gemm_nn(sz(g.o), sz(p), sz(g.ckk()), wv.data(), sz(g.ckk()), col.data(), sz(p),
                        out.data() + y0 * g.wo, sz(plane));
        }
    }

    std::vector<Var> parents{x, w};
    if (b.defined()) parents.push_back(b);
    return Var::make(std::move(out), std::move(parents), [g, rows, plane](Node& self) {
        Node& px = parent(self, 0);
        Node& pw = parent(self, 1);
        const real* dy = self.grad.data();
        if (self.parents.size() > 2 && parent(self, 2).requires_grad) {
            Tensor& gb = parent(self, 2).grad_buffer();
            for (int64_t oc = 0; oc < g.o; ++oc) gb[oc] += K().sum(dy + oc * plane, sz(plane));
        }
        std::vector<real> wt;
        if (px.requires_grad) {
            wt.resize(sz(g.ckk() * g.o));
            for (int64_t oc = 0; oc < g.o; ++oc)
                for (int64_t j = 0; j < g.ckk(); ++j) wt[sz(j * g.o + oc)] = pw.value[oc * g.ckk() + j];
        }
        std::vector<real> col(sz(g.ckk() * rows * g.wo));
        std::vector<real> dyt;
        for (int64_t y0 = 0; y0 < g.ho; y0 += rows) {
            const int64_t y1 = std::min(g.ho, y0 + rows);
            const int64_t p = (y1 - y0) * g.wo;
            // Gather this tile's output gradient contiguously.
            const real* dtile = dy;
            if (!(y0 == 0 && y1 == g.ho)) {
                dyt.resize(sz(g.o * p));
                for (int64_t oc = 0; oc < g.o; ++oc)
                    std::copy_n(dy + oc * plane + y0 * g.wo, p, dyt.data() + oc * p);
                dtile = dyt.data();
            }
            if (pw.requires_grad) {
                im2col(px.value.data(), g, y0, y1, col.data());
                K().gemm_nt(sz(g.o), sz(g.ckk()), sz(p), dtile, sz(p), col.data(), sz(p), pw.grad_buffer().data(),
                            sz(g.ckk()));
            }
            if (px.requires_grad) {
                std::fill_n(col.data(), g.ckk() * p, 0.0);
                K().gemm_nn(sz(g.ckk()), sz(p), sz(g.o), wt.data(), sz(g.o), dtile, sz(p), col.data(), sz(p));
                col2im(col.data(), g, y0, y1, px.grad_buffer().data());
            }
        }
    });
}

Var group_norm(const Var& x, int groups, const Var& gamma, const Var& beta, real eps) {
    const Tensor& xv = x.value();
    const int64_t c = xv.dim(0);
    LDM3D_REQUIRE(groups > 0 && c % groups == 0, "group_norm: channels must divide into groups");
    LDM3D_REQUIRE(gamma.value().numel() == c && beta.value().numel() == c, "group_norm: affine size mismatch");
    const int64_t plane = xv.numel() / c;
    const int64_t cpg = c / groups;
    const int64_t gsize = cpg * plane;

    Tensor out(xv.shape());
    Tensor xhat(xv.shape());
    std::vector<real> inv_std(sz(groups));
    for (int64_t gi = 0; gi < groups; ++gi) {
        const real* src = xv.data() + gi * gsize;
        const real mu = K().sum(src, sz(gsize)) / static_cast<real>(gsize);
        real var = 0;
        for (int64_t i = 0; i < gsize; ++i) var += (src[i] - mu) * (src[i] - mu);
        var /= static_cast<real>(gsize);
        const real is = 1.0 / std::sqrt(var + eps);
        inv_std[sz(gi)] = is;
        for (int64_t i = 0; i < gsize; ++i) xhat[gi * gsize + i] = (src[i] - mu) * is;
    }
    for (int64_t ch = 0; ch < c; ++ch) {
        const real ga = gamma.value()[ch], be = beta.value()[ch];
        for (int64_t i = 0; i < plane; ++i) out[ch * plane + i] = ga * xhat[ch * plane + i] + be;
    }
    return Var::make(std::move(out), {x, gamma, beta},
                     [c, plane, cpg, gsize, groups, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
                         Node& px = parent(self, 0);
                         Node& pg = parent(self, 1);
                         Node& pb = parent(self, 2);
                         const real* dy = self.grad.data();
                         if (pb.requires_grad || pg.requires_grad) {
                             for (int64_t ch = 0; ch < c; ++ch) {
                                 const real* d = dy + ch * plane;
                                 if (pb.requires_grad) pb.grad_buffer()[ch] += K().sum(d, sz(plane));
                                 if (pg.requires_grad) pg.grad_buffer()[ch] += K().dot(d, xhat.data() + ch * plane, sz(plane));
                             }
                         }
                         if (!px.requires_grad) return;
                         Tensor& gx = px.grad_buffer();
                         std::vector<real> dxhat(sz(gsize));
                         for (int64_t gi = 0; gi < groups; ++gi) {
                             real m1 = 0, m2 = 0;
                             for (int64_t i = 0; i < gsize; ++i) {
                                 const int64_t idx = gi * gsize + i;
                                 const int64_t ch = idx / plane;
                                 dxhat[sz(i)] = dy[idx] * pg.value[ch];
                                 m1 += dxhat[sz(i)];
                                 m2 += dxhat[sz(i)] * xhat[idx];
                             }
                             m1 /= static_cast<real>(gsize);
                             m2 /= static_cast<real>(gsize);
                             const real is = inv_std[sz(gi)];
                             for (int64_t i = 0; i < gsize; ++i) {
                                 const int64_t idx = gi * gsize + i;
                                 gx[idx] += is * (dxhat[sz(i)] - m1 - xhat[idx] * m2);
                             }
                         }
                         (void)cpg;
                     });
}

Var upsample_nearest2x(const Var& x) {
    const Tensor& xv = x.value();
    LDM3D_REQUIRE(xv.rank() == 3, "upsample_nearest2x needs C x H x W");
    const int64_t c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    Tensor out(Shape{c, 2 * h, 2 * w});
    for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t y = 0; y < 2 * h; ++y)
            for (int64_t xx = 0; xx < 2 * w; ++xx) out.at(ch, y, xx) = xv.at(ch, y / 2, xx / 2);
    return Var::make(std::move(out), {x}, [c, h, w](Node& self) {
        Tensor& g = parent(self, 0).grad_buffer();
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t y = 0; y < 2 * h; ++y)
                for (int64_t xx = 0; xx < 2 * w; ++xx) g.at(ch, y / 2, xx / 2) += self.grad.at(ch, y, xx);
    });
}

}  // namespace ldm3d::nn
