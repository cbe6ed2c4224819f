// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/rng.hpp"

namespace ldm3d::eval {

real psnr(const Tensor& a, const Tensor& b, real peak) {
    LDM3D_REQUIRE(a.shape() == b.shape(), "psnr: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    LDM3D_REQUIRE(a.numel() > 0 && peak > 0, "psnr: empty input or nonpositive peak");
    real se = 0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const real d = a[i] - b[i];
        se += d * d;
    }
    if (se == 0) return std::numeric_limits<real>::infinity();
    return 10.0 * std::log10(peak * peak / (se / static_cast<real>(a.numel())));
}

namespace {

// Valid-mode separable filter of one channel plane.
std::vector<real> filter_valid(const real* src, int64_t h, int64_t w, const std::vector<real>& k) {
    const auto n = static_cast<int64_t>(k.size());
    const int64_t oh = h - n + 1, ow = w - n + 1;
    std::vector<real> tmp(static_cast<size_t>(h * ow), 0.0), out(static_cast<size_t>(oh * ow), 0.0);
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < ow; ++x) {
            real acc = 0;
            for (int64_t i = 0; i < n; ++i) acc += k[static_cast<size_t>(i)] * src[y * w + x + i];
            tmp[static_cast<size_t>(y * ow + x)] = acc;
        }
    for (int64_t y = 0; y < oh; ++y)
        for (int64_t x = 0; x < ow; ++x) {
            real acc = 0;
            for (int64_t i = 0; i < n; ++i) acc += k[static_cast<size_t>(i)] * tmp[static_cast<size_t>((y + i) * ow + x)];
            out[static_cast<size_t>(y * ow + x)] = acc;
        }
    return out;
}

}  // namespace

real ssim(const Tensor& a, const Tensor& b, const SsimOptions& o) {
    LDM3D_REQUIRE(a.shape() == b.shape(), "ssim: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    LDM3D_REQUIRE(a.rank() == 3, "ssim expects C x H x W");
    LDM3D_REQUIRE(o.window >= 1 && o.sigma > 0 && o.data_range > 0, "ssim: bad options");
    const int64_t c = a.channels(), h = a.height(), w = a.width();
    if (o.window > h || o.window > w)
        throw DataError("ssim: window " + std::to_string(o.window) + " is larger than the image " + shape_str(a.shape()));

    std::vector<real> k(static_cast<size_t>(o.window));
    real ksum = 0;
    const real mid = static_cast<real>(o.window - 1) / 2.0;
    for (int i = 0; i < o.window; ++i) {
        const real d = static_cast<real>(i) - mid;
        k[static_cast<size_t>(i)] = std::exp(-0.5 * d * d / (o.sigma * o.sigma));
        ksum += k[static_cast<size_t>(i)];
    }
    for (auto& v : k) v /= ksum;

    const real c1 = (o.k1 * o.data_range) * (o.k1 * o.data_range);
    const real c2 = (o.k2 * o.data_range) * (o.k2 * o.data_range);
    const int64_t plane = h * w;
    real total = 0;
    std::vector<real> xx(static_cast<size_t>(plane)), yy(xx.size()), xy(xx.size());
    for (int64_t ch = 0; ch < c; ++ch) {
        const real* x = a.data() + ch * plane;
        const real* y = b.data() + ch * plane;
        for (int64_t i = 0; i < plane; ++i) {
            xx[static_cast<size_t>(i)] = x[i] * x[i];
            yy[static_cast<size_t>(i)] = y[i] * y[i];
            xy[static_cast<size_t>(i)] = x[i] * y[i];
        }
        const auto mx = filter_valid(x, h, w, k), my = filter_valid(y, h, w, k);
        const auto sxx = filter_valid(xx.data(), h, w, k), syy = filter_valid(yy.data(), h, w, k);
        const auto sxy = filter_valid(xy.data(), h, w, k);
        real acc = 0;
        for (size_t i = 0; i < mx.size(); ++i) {
            const real vx = sxx[i] - mx[i] * mx[i];
            const real vy = syy[i] - my[i] * my[i];
            const real cov = sxy[i] - mx[i] * my[i];
            acc += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        total += acc / static_cast<real>(mx.size());
    }
    return total / static_cast<real>(c);
}

FeatureStats feature_stats(const Eigen::MatrixXd& f) {
    if (f.rows() < 2) throw DataError("feature statistics need at least two samples");
    FeatureStats s;
    s.mu = f.colwise().mean().transpose();
    const Eigen::MatrixXd centered = f.rowwise() - s.mu.transpose();
    s.sigma = centered.transpose() * centered / static_cast<real>(f.rows() - 1);
    return s;
}

namespace {

// Eigenvalues of a symmetric PSD matrix with round-off negatives clipped.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> psd_eigen(const Eigen::MatrixXd& m, const char* what) {
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw NumericError(std::string("eigendecomposition failed for ") + what);
    const real tol = 1e-6 * std::max<real>(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -tol)
        throw NumericError(std::string(what) + " is not positive semidefinite (eigenvalue " +
                           std::to_string(es.eigenvalues().minCoeff()) + ")");
    return es;
}

}  // namespace

real frechet_distance(const FeatureStats& s1, const FeatureStats& s2) {
    const auto d = s1.mu.size();
    if (s2.mu.size() != d || s1.sigma.rows() != d || s1.sigma.cols() != d || s2.sigma.rows() != d ||
        s2.sigma.cols() != d)
        throw DataError("frechet_distance: feature dimensions do not match");
    if (!s1.mu.allFinite() || !s2.mu.allFinite() || !s1.sigma.allFinite() || !s2.sigma.allFinite())
        throw NumericError("frechet_distance: non-finite statistics");

    auto e1 = psd_eigen(s1.sigma, "sigma1");
    const Eigen::VectorXd r1 = e1.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd sqrt1 = e1.eigenvectors() * r1.asDiagonal() * e1.eigenvectors().transpose();
    auto em = psd_eigen(sqrt1 * s2.sigma * sqrt1, "sigma1^1/2 sigma2 sigma1^1/2");
    const real tr_root = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    const real dist = (s1.mu - s2.mu).squaredNorm() + s1.sigma.trace() + s2.sigma.trace() - 2.0 * tr_root;
    return std::max<real>(dist, 0.0);
}

MeanStd inception_score(const Eigen::MatrixXd& probs, int splits) {
    const auto n = probs.rows();
    if (n < 1 || probs.cols() < 1) throw DataError("inception_score: empty probability matrix");
    if (splits < 1 || splits > n) throw ConfigError("inception_score: splits must be in [1, N]");
    for (Eigen::Index i = 0; i < n; ++i) {
        if ((probs.row(i).array() < 0).any() || !probs.row(i).allFinite())
            throw DataError("inception_score: negative or non-finite probability in row " + std::to_string(i));
        if (std::abs(probs.row(i).sum() - 1.0) > 1e-6)
            throw DataError("inception_score: row " + std::to_string(i) + " does not sum to 1");
    }
    std::vector<real> scores;
    for (int s = 0; s < splits; ++s) {
        const Eigen::Index lo = n * s / splits, hi = n * (s + 1) / splits;
        const Eigen::MatrixXd part = probs.middleRows(lo, hi - lo);
        const Eigen::RowVectorXd py = part.colwise().mean();
        real kl = 0;
        for (Eigen::Index i = 0; i < part.rows(); ++i)
            for (Eigen::Index k = 0; k < part.cols(); ++k) {
                const real p = part(i, k);
                if (p > 0) kl += p * (std::log(p) - std::log(py(k)));
            }
        scores.push_back(std::exp(kl / static_cast<real>(part.rows())));
    }
    MeanStd r;
    for (real v : scores) r.mean += v;
    r.mean /= static_cast<real>(scores.size());
    for (real v : scores) r.std += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(r.std / static_cast<real>(scores.size()));
    return r;
}

real clip_similarity(const Eigen::VectorXd& image_emb, const Eigen::VectorXd& text_emb) {
    if (image_emb.size() != text_emb.size()) throw DataError("clip_similarity: embedding sizes differ");
    const real na = image_emb.norm(), nb = text_emb.norm();
    if (!(na > 0) || !(nb > 0)) throw DataError("clip_similarity: zero embedding");
    return 100.0 * image_emb.dot(text_emb) / (na * nb);
}

ScaleShift fit_scale_shift(const std::vector<real>& pred, const std::vector<real>& ref) {
    if (pred.size() != ref.size()) throw DataError("fit_scale_shift: size mismatch");
    if (pred.size() < 2) throw DataError("fit_scale_shift: need at least two points");
    // Normal equations [Spp Sp; Sp n] [s t]^T = [Spr Sr]^T.
    const auto n = static_cast<real>(pred.size());
    real sp = 0, sr = 0, spp = 0, spr = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        sp += pred[i];
        sr += ref[i];
        spp += pred[i] * pred[i];
        spr += pred[i] * ref[i];
    }
    const real det = n * spp - sp * sp;
    if (!(det > 1e-12 * std::max<real>(1.0, n * spp)))
        throw NumericError("fit_scale_shift: prediction is constant, scale is not identifiable");
    ScaleShift r;
    r.scale = (n * spr - sp * sr) / det;
    r.shift = (spp * sr - sp * spr) / det;
    return r;
}

MareResult mare(const Tensor& pred, const Tensor& ref, int n_points, uint64_t seed, real eps) {
    LDM3D_REQUIRE(pred.shape() == ref.shape(), "mare: shape mismatch " + shape_str(pred.shape()) + " vs " +
                                                   shape_str(ref.shape()));
    LDM3D_REQUIRE(pred.rank() == 3 && pred.channels() == 1, "mare expects 1 x H x W");
    if (n_points < 2) throw ConfigError("mare: n_points must be >= 2");
    if (!(eps > 0)) throw ConfigError("mare: eps must be positive");
    Rng rng(seed);
    std::vector<real> p(static_cast<size_t>(n_points)), r(p.size());
    const auto n = static_cast<uint64_t>(pred.numel());
    for (size_t i = 0; i < p.size(); ++i) {
        const auto k = static_cast<int64_t>(rng.below(n));
        p[i] = pred[k];
        r[i] = ref[k];
    }
    const ScaleShift st = fit_scale_shift(p, r);
    real acc = 0;
    for (int64_t i = 0; i < pred.numel(); ++i)
        acc += std::abs(st.scale * pred[i] + st.shift - ref[i]) / std::max(std::abs(ref[i]), eps);
    return {acc / static_cast<real>(pred.numel()), st.scale, st.shift};
}

real percentile(std::vector<real> v, real q) {
    if (v.empty()) throw DataError("percentile of an empty set");
    if (!(q >= 0 && q <= 100)) throw ConfigError("percentile must be in [0, 100]");
    std::sort(v.begin(), v.end());
    const real pos = q / 100.0 * static_cast<real>(v.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<real>(lo)) * (v[hi] - v[lo]);
}

namespace {

MeanStd mean_std(const std::vector<real>& v) {
    MeanStd r;
    for (real x : v) r.mean += x;
    r.mean /= static_cast<real>(v.size());
    for (real x : v) r.std += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(r.std / static_cast<real>(v.size()));
    return r;
}

}  // namespace

AggregateStats aggregate_depth_eval(const std::vector<real>& per_sample, real q) {
    if (per_sample.empty()) throw DataError("aggregate_depth_eval: no samples");
    AggregateStats a;
    const auto all = mean_std(per_sample);
    a.mean = all.mean;
    a.std = all.std;
    a.threshold = percentile(per_sample, q);
    std::vector<real> kept;
    for (real v : per_sample)
        if (v <= a.threshold) kept.push_back(v);
    const auto f = mean_std(kept);
    a.filtered_mean = f.mean;
    a.filtered_std = f.std;
    a.kept = static_cast<int64_t>(kept.size());
    return a;
}

}  // namespace ldm3d::eval
