// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/json_util.hpp"
#include "ldm3d/core/rng.hpp"
#include "ldm3d/data/manifest.hpp"

namespace ldm3d::eval {

Tensor to_disparity(const Tensor& depth) {
    Tensor d = depth;
    for (auto& v : d.values()) v = 0.5 * (v + 1.0);
    return d;
}

DepthEvalReport evaluate_depth(const std::vector<Tensor>& pred, const std::vector<Tensor>& ref,
                               const std::vector<std::string>& ids, int n_points, uint64_t seed, real pct, real eps) {
    if (pred.size() != ref.size() || pred.size() != ids.size()) throw DataError("evaluate_depth: input sizes differ");
    if (pred.empty()) throw DataError("evaluate_depth: no samples");
    DepthEvalReport r;
    r.ids = ids;
    r.percentile = pct;
    r.n_points = n_points;
    r.seed = seed;
    for (size_t i = 0; i < pred.size(); ++i) {
        const MareResult m = mare(pred[i], ref[i], n_points, derive_seed(seed, ids[i]), eps);
        if (!std::isfinite(m.scale)) throw NumericError("non-finite depth scale for sample '" + ids[i] + "'");
        r.per_sample_mare.push_back(m.value);
        r.scale.push_back(m.scale);
        r.shift.push_back(m.shift);
    }
    const AggregateStats a = aggregate_depth_eval(r.per_sample_mare, pct);
    r.mare_mean = a.mean;
    r.mare_std = a.std;
    r.mare_filtered_mean = a.filtered_mean;
    r.mare_filtered_std = a.filtered_std;
    return r;
}

nlohmann::json to_json(const DepthEvalReport& r) {
    nlohmann::json per = nlohmann::json::array();
    for (size_t i = 0; i < r.ids.size(); ++i)
        per.push_back({{"id", r.ids[i]}, {"mare", r.per_sample_mare[i]}, {"scale", r.scale[i]}, {"shift", r.shift[i]}});
    return {{"per_sample", per},
            {"mare_mean", r.mare_mean},
            {"mare_std", r.mare_std},
            {"mare_filtered_mean", r.mare_filtered_mean},
            {"mare_filtered_std", r.mare_filtered_std},
            {"percentile", r.percentile},
            {"n_points", r.n_points},
            {"seed", r.seed}};
}

void EvalConfig::validate() const {
    for (const auto& m : metrics)
        if (std::find(kAllMetrics.begin(), kAllMetrics.end(), m) == kAllMetrics.end())
            throw ConfigError("unknown metric '" + m + "'");
    if (!(percentile > 0 && percentile <= 100)) throw ConfigError("percentile must be in (0, 100]");
    if (n_points < 2) throw ConfigError("n_points must be >= 2");
    if (is_splits < 1) throw ConfigError("is_splits must be >= 1");
    if (!(mare_eps > 0)) throw ConfigError("mare_eps must be positive");
    if (ssim_window < 1) throw ConfigError("ssim_window must be >= 1");
}

nlohmann::json to_json(const EvalConfig& c) {
    return {{"metrics", c.metrics},   {"percentile", c.percentile}, {"n_points", c.n_points},
            {"seed", c.seed},         {"is_splits", c.is_splits},   {"mare_eps", c.mare_eps},
            {"ssim_window", c.ssim_window}};
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
    const std::string where = "evaluate config";
    reject_unknown_keys(j, {"metrics", "percentile", "n_points", "seed", "is_splits", "mare_eps", "ssim_window"}, where);
    EvalConfig c;
    c.metrics = get_or(j, "metrics", c.metrics, where);
    c.percentile = get_or(j, "percentile", c.percentile, where);
    c.n_points = get_or(j, "n_points", c.n_points, where);
    c.seed = get_or(j, "seed", c.seed, where);
    c.is_splits = get_or(j, "is_splits", c.is_splits, where);
    c.mare_eps = get_or(j, "mare_eps", c.mare_eps, where);
    c.ssim_window = get_or(j, "ssim_window", c.ssim_window, where);
    c.validate();
    return c;
}

Providers default_providers() {
    return {std::make_shared<ProjectionFeatures>(), std::make_shared<ProjectionClassifier>(),
            std::make_shared<ProjectionImageText>()};
}

namespace {

nlohmann::json number(real v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : v > 0 ? "inf" : "-inf";
}

nlohmann::json summary(const std::vector<real>& v) {
    real mean = 0;
    for (real x : v) mean += x;
    mean /= static_cast<real>(v.size());
    real var = 0;
    if (std::isfinite(mean)) {
        for (real x : v) var += (x - mean) * (x - mean);
        var /= static_cast<real>(v.size());
    }
    return {{"value", number(mean)}, {"std", number(std::sqrt(var))}, {"n", v.size()}};
}

bool wants(const EvalConfig& c, const char* m) {
    return std::find(c.metrics.begin(), c.metrics.end(), m) != c.metrics.end();
}

std::map<std::string, const ManifestEntry*> by_id(const DatasetManifest& m) {
    std::map<std::string, const ManifestEntry*> out;
    for (const auto& e : m.entries) out[e.id] = &e;
    return out;
}

}  // namespace

nlohmann::json evaluate_run(const std::filesystem::path& generated_manifest,
                            const std::filesystem::path& reference_manifest, const EvalConfig& cfg,
                            const Providers& providers) {
    cfg.validate();
    const DatasetManifest gen = read_manifest(generated_manifest);
    const DatasetManifest ref = read_manifest(reference_manifest);
    check_unique_ids(gen);
    check_unique_ids(ref);
    const auto gmap = by_id(gen), rmap = by_id(ref);
    if (gmap.empty()) throw DataError("generated manifest has no entries");
    for (const auto& [id, e] : gmap)
        if (!rmap.count(id)) throw DataError("id '" + id + "' is missing from the reference manifest");
    for (const auto& [id, e] : rmap)
        if (!gmap.count(id)) throw DataError("id '" + id + "' is missing from the generated manifest");

    // std::map iteration gives a fixed, id-sorted order.
    std::vector<std::string> ids;
    std::vector<RgbdSample> g, r;
    for (const auto& [id, e] : gmap) {
        ids.push_back(id);
        g.push_back(load_entry(gen, *e));
        r.push_back(load_entry(ref, *rmap.at(id)));
    }
    const size_t n = ids.size();

    nlohmann::json metrics = nlohmann::json::object();
    const bool paired = gen.height == ref.height && gen.width == ref.width;
    if (wants(cfg, "psnr") || wants(cfg, "ssim") || wants(cfg, "mare")) {
        if (!paired)
            throw DataError("paired metrics need equal resolutions, got " + std::to_string(gen.height) + "x" +
                            std::to_string(gen.width) + " vs " + std::to_string(ref.height) + "x" +
                            std::to_string(ref.width));
    }
    if (wants(cfg, "psnr")) {
        std::vector<real> v;
        for (size_t i = 0; i < n; ++i) v.push_back(psnr(g[i].rgb, r[i].rgb, 2.0));
        metrics["psnr"] = summary(v);
    }
    if (wants(cfg, "ssim")) {
        SsimOptions so;
        so.window = cfg.ssim_window;
        std::vector<real> v;
        for (size_t i = 0; i < n; ++i) v.push_back(ssim(g[i].rgb, r[i].rgb, so));
        metrics["ssim"] = summary(v);
    }
    if (wants(cfg, "fid")) {
        if (n < 2) {
            metrics["fid"] = {{"skipped", "needs at least two samples"}};
        } else {
            const auto dim = providers.features->features(g[0].rgb).size();
            Eigen::MatrixXd fg(static_cast<Eigen::Index>(n), dim), fr(static_cast<Eigen::Index>(n), dim);
            for (size_t i = 0; i < n; ++i) {
                fg.row(static_cast<Eigen::Index>(i)) = providers.features->features(g[i].rgb).transpose();
                fr.row(static_cast<Eigen::Index>(i)) = providers.features->features(r[i].rgb).transpose();
            }
            metrics["fid"] = {{"value", number(frechet_distance(feature_stats(fg), feature_stats(fr)))},
                              {"n", n},
                              {"provider", providers.features->id()}};
        }
    }
    if (wants(cfg, "is")) {
        const auto k = providers.classifier->probs(g[0].rgb).size();
        Eigen::MatrixXd p(static_cast<Eigen::Index>(n), k);
        for (size_t i = 0; i < n; ++i)
            p.row(static_cast<Eigen::Index>(i)) = providers.classifier->probs(g[i].rgb).transpose();
        const int splits = std::min<int>(cfg.is_splits, static_cast<int>(n));
        const MeanStd s = inception_score(p, splits);
        metrics["is"] = {{"value", number(s.mean)},
                         {"std", number(s.std)},
                         {"n", n},
                         {"splits", splits},
                         {"provider", providers.classifier->id()}};
    }
    if (wants(cfg, "clip")) {
        std::vector<real> v;
        for (size_t i = 0; i < n; ++i)
            v.push_back(clip_similarity(providers.image_text->image(g[i].rgb), providers.image_text->text(g[i].caption)));
        metrics["clip"] = summary(v);
        metrics["clip"]["provider"] = providers.image_text->id();
    }
    nlohmann::json report = {{"format", "ldm3d-eval-report"},
                             {"version", 1},
                             {"generated", generated_manifest.filename().string()},
                             {"reference", reference_manifest.filename().string()},
                             {"n_samples", n},
                             {"seed", cfg.seed},
                             {"config", to_json(cfg)},
                             {"metrics", metrics}};
    if (wants(cfg, "mare")) {
        std::vector<Tensor> pd, rd;
        for (size_t i = 0; i < n; ++i) {
            pd.push_back(to_disparity(g[i].depth));
            rd.push_back(to_disparity(r[i].depth));
        }
        const DepthEvalReport d = evaluate_depth(pd, rd, ids, cfg.n_points, cfg.seed, cfg.percentile, cfg.mare_eps);
        report["metrics"]["mare"] = {{"value", d.mare_mean},
                                     {"std", d.mare_std},
                                     {"filtered_value", d.mare_filtered_mean},
                                     {"filtered_std", d.mare_filtered_std},
                                     {"n", n}};
        report["depth"] = to_json(d);
    }
    return report;
}

std::string dump_report(const nlohmann::json& report) { return report.dump(2) + "\n"; }

}  // namespace ldm3d::eval
