// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>

#include "ldm3d/cli/commands.hpp"
#include "ldm3d/core/error.hpp"
#include "ldm3d/core/json_util.hpp"

namespace ldm3d::cli {

fs::path default_output_dir(const std::string& command) {
    const char* root = std::getenv(kOutputRootEnv);
    return fs::path(root && *root ? root : "ldm3d-out") / command;
}

namespace {

fs::path path_or(const nlohmann::json& j, const char* key, const std::string& where) {
    return fs::path(get_or<std::string>(j, key, "", where));
}

fs::path output_dir_or_default(const nlohmann::json& j, const std::string& command) {
    fs::path p = path_or(j, "output_dir", command + " config");
    return p.empty() ? default_output_dir(command) : p;
}

void require_path(const fs::path& p, const char* key, const std::string& where) {
    if (p.empty()) throw ConfigError(where + ": '" + key + "' is required");
}

void check_depth_lr(const std::string& s) {
    if (s != "d" && s != "o" && s != "b") throw ConfigError("depth_lr must be one of d, o, b; got '" + s + "'");
}

void check_estimator(const std::string& s) {
    if (s != "luminance" && s != "none")
        throw ConfigError("depth_estimator must be 'luminance' or 'none', got '" + s + "'");
}

nlohmann::json to_json(const ScheduleConfig& s) {
    return {{"T", s.T}, {"beta_min", s.beta_min}, {"beta_max", s.beta_max}};
}

ScheduleConfig schedule_from_json(const nlohmann::json& j) {
    const std::string where = "schedule config";
    reject_unknown_keys(j, {"T", "beta_min", "beta_max"}, where);
    ScheduleConfig s;
    s.T = get_or(j, "T", s.T, where);
    s.beta_min = get_or(j, "beta_min", s.beta_min, where);
    s.beta_max = get_or(j, "beta_max", s.beta_max, where);
    if (s.T < 1 || !(s.beta_min > 0) || !(s.beta_min <= s.beta_max) || !(s.beta_max < 1))
        throw ConfigError("schedule needs T >= 1 and 0 < beta_min <= beta_max < 1");
    return s;
}

}  // namespace

PreparePanoConfig prepare_pano_config_from_json(const nlohmann::json& j) {
    const std::string where = "prepare-pano config";
    reject_unknown_keys(j,
                        {"seed", "output_dir", "hdr_dir", "augmentations", "height", "exposure",
                         "exposure_jitter_stops", "gamma", "split", "depth_estimator"},
                        where);
    PreparePanoConfig c;
    c.seed = get_or(j, "seed", c.seed, where);
    c.output_dir = output_dir_or_default(j, "prepare-pano");
    c.hdr_dir = path_or(j, "hdr_dir", where);
    require_path(c.hdr_dir, "hdr_dir", where);
    c.augmentations = get_or(j, "augmentations", c.augmentations, where);
    c.height = get_or(j, "height", c.height, where);
    c.exposure = get_or(j, "exposure", c.exposure, where);
    c.exposure_jitter_stops = get_or(j, "exposure_jitter_stops", c.exposure_jitter_stops, where);
    c.gamma = get_or(j, "gamma", c.gamma, where);
    c.split = get_or(j, "split", c.split, where);
    c.depth_estimator = get_or(j, "depth_estimator", c.depth_estimator, where);
    if (c.augmentations < 1) throw ConfigError("augmentations must be >= 1");
    if (c.height < 8 || c.height % 8 != 0) throw ConfigError("height must be a positive multiple of 8");
    if (!(c.exposure > 0) || !(c.gamma > 0) || !(c.exposure_jitter_stops >= 0))
        throw ConfigError("exposure and gamma must be positive, jitter nonnegative");
    if (c.split != "train" && c.split != "val") throw ConfigError("split must be 'train' or 'val'");
    if (c.depth_estimator != "luminance") throw ConfigError("prepare-pano needs a depth estimator ('luminance')");
    return c;
}

nlohmann::json to_json(const PreparePanoConfig& c) {
    return {{"seed", c.seed},
            {"output_dir", c.output_dir.string()},
            {"hdr_dir", c.hdr_dir.string()},
            {"augmentations", c.augmentations},
            {"height", c.height},
            {"exposure", c.exposure},
            {"exposure_jitter_stops", c.exposure_jitter_stops},
            {"gamma", c.gamma},
            {"split", c.split},
            {"depth_estimator", c.depth_estimator}};
}

DegradeConfig degrade_config_from_json(const nlohmann::json& j) {
    const std::string where = "degrade config";
    reject_unknown_keys(j, {"seed", "output_dir", "manifest", "recipe"}, where);
    DegradeConfig c;
    c.seed = get_or(j, "seed", c.seed, where);
    c.output_dir = output_dir_or_default(j, "degrade");
    c.manifest = path_or(j, "manifest", where);
    require_path(c.manifest, "manifest", where);
    nlohmann::json r = j.value("recipe", nlohmann::json::object());
    // The recipe seed defaults to the run seed.
    if (r.is_object() && !r.contains("seed")) r["seed"] = c.seed;
    c.recipe = sr::recipe_from_json(r);
    return c;
}

nlohmann::json to_json(const DegradeConfig& c) {
    return {{"seed", c.seed},
            {"output_dir", c.output_dir.string()},
            {"manifest", c.manifest.string()},
            {"recipe", sr::to_json(c.recipe)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    const std::string where = "train config";
    TrainConfig c;
    c.kind = get_or<std::string>(j, "kind", "", where);
    const bool is_ae = c.kind == "ae";
    const bool is_pano = c.kind == "diffusion-pano";
    const bool is_sr = c.kind == "diffusion-sr";
    if (!is_ae && !is_pano && !is_sr)
        throw ConfigError("train kind must be ae, diffusion-pano or diffusion-sr; got '" + c.kind + "'");
    if (is_ae)
        reject_unknown_keys(j, {"kind", "seed", "output_dir", "manifest", "steps", "batch_size", "lr", "ae", "resume"},
                            where);
    else if (is_pano)
        reject_unknown_keys(j,
                            {"kind", "seed", "output_dir", "manifest", "steps", "batch_size", "lr", "uncond_prob",
                             "denoiser", "schedule", "ae_checkpoint", "resume"},
                            where);
    else
        reject_unknown_keys(j,
                            {"kind", "seed", "output_dir", "manifest", "lr_manifest", "depth_lr", "depth_estimator",
                             "steps", "batch_size", "lr", "uncond_prob", "denoiser", "schedule", "ae_checkpoint",
                             "resume"},
                            where);

    c.seed = get_or(j, "seed", c.seed, where);
    c.output_dir = output_dir_or_default(j, "train");
    c.manifest = path_or(j, "manifest", where);
    require_path(c.manifest, "manifest", where);
    c.steps = get_or<int64_t>(j, "steps", is_ae ? 2000 : 3000, where);
    c.batch_size = get_or<int64_t>(j, "batch_size", is_ae ? 2 : 8, where);
    c.lr = get_or<real>(j, "lr", is_ae ? 2e-3 : 1e-3, where);
    c.resume = path_or(j, "resume", where);
    if (c.steps < 0 || c.batch_size < 1 || !(c.lr > 0)) throw ConfigError("train needs steps >= 0, batch_size >= 1, lr > 0");

    if (is_ae) {
        c.ae = ae::ae_config_from_json(j.value("ae", nlohmann::json::object()));
        return c;
    }
    c.uncond_prob = get_or(j, "uncond_prob", c.uncond_prob, where);
    if (!(c.uncond_prob >= 0 && c.uncond_prob <= 1)) throw ConfigError("uncond_prob must be in [0, 1]");
    nlohmann::json d = j.value("denoiser", nlohmann::json::object());
    if (d.is_object() && !d.contains("in_channels")) d["in_channels"] = is_sr ? 8 : 4;
    c.denoiser = diffusion::denoiser_config_from_json(d);
    if (is_sr && c.denoiser.in_channels != 8)
        throw ConfigError("diffusion-sr needs an 8-channel denoiser, config has in_channels=" +
                          std::to_string(c.denoiser.in_channels));
    if (is_pano && c.denoiser.in_channels != 4)
        throw ConfigError("diffusion-pano needs a 4-channel denoiser, config has in_channels=" +
                          std::to_string(c.denoiser.in_channels));
    c.schedule = schedule_from_json(j.value("schedule", nlohmann::json::object()));
    c.ae_checkpoint = path_or(j, "ae_checkpoint", where);
    require_path(c.ae_checkpoint, "ae_checkpoint", where);
    if (is_sr) {
        c.lr_manifest = path_or(j, "lr_manifest", where);
        require_path(c.lr_manifest, "lr_manifest", where);
        c.depth_lr = get_or(j, "depth_lr", c.depth_lr, where);
        check_depth_lr(c.depth_lr);
        c.depth_estimator = get_or(j, "depth_estimator", c.depth_estimator, where);
        check_estimator(c.depth_estimator);
    }
    return c;
}

nlohmann::json to_json(const TrainConfig& c) {
    nlohmann::json j = {{"kind", c.kind},
                        {"seed", c.seed},
                        {"output_dir", c.output_dir.string()},
                        {"manifest", c.manifest.string()},
                        {"steps", c.steps},
                        {"batch_size", c.batch_size},
                        {"lr", c.lr},
                        {"resume", c.resume.string()}};
    if (c.kind == "ae") {
        j["ae"] = ae::to_json(c.ae);
        return j;
    }
    j["uncond_prob"] = c.uncond_prob;
    j["denoiser"] = diffusion::to_json(c.denoiser);
    j["schedule"] = to_json(c.schedule);
    j["ae_checkpoint"] = c.ae_checkpoint.string();
    if (c.kind == "diffusion-sr") {
        j["lr_manifest"] = c.lr_manifest.string();
        j["depth_lr"] = c.depth_lr;
        j["depth_estimator"] = c.depth_estimator;
    }
    return j;
}

SamplePanoConfig sample_pano_config_from_json(const nlohmann::json& j) {
    const std::string where = "sample-pano config";
    reject_unknown_keys(j,
                        {"seed", "output_dir", "prompt", "num_samples", "latent_height", "ae_checkpoint",
                         "unet_checkpoint", "sampler", "trace"},
                        where);
    SamplePanoConfig c;
    c.seed = get_or(j, "seed", c.seed, where);
    c.output_dir = output_dir_or_default(j, "sample-pano");
    c.prompt = get_or(j, "prompt", c.prompt, where);
    c.num_samples = get_or(j, "num_samples", c.num_samples, where);
    c.latent_height = get_or(j, "latent_height", c.latent_height, where);
    c.ae_checkpoint = path_or(j, "ae_checkpoint", where);
    c.unet_checkpoint = path_or(j, "unet_checkpoint", where);
    require_path(c.ae_checkpoint, "ae_checkpoint", where);
    require_path(c.unet_checkpoint, "unet_checkpoint", where);
    c.sampler = diffusion::sampler_config_from_json(j.value("sampler", nlohmann::json::object()));
    c.trace = get_or(j, "trace", c.trace, where);
    if (c.num_samples < 1) throw ConfigError("num_samples must be >= 1");
    if (c.latent_height < 2 || c.latent_height % 2 != 0) throw ConfigError("latent_height must be even and >= 2");
    return c;
}

nlohmann::json to_json(const SamplePanoConfig& c) {
    return {{"seed", c.seed},
            {"output_dir", c.output_dir.string()},
            {"prompt", c.prompt},
            {"num_samples", c.num_samples},
            {"latent_height", c.latent_height},
            {"ae_checkpoint", c.ae_checkpoint.string()},
            {"unet_checkpoint", c.unet_checkpoint.string()},
            {"sampler", diffusion::to_json(c.sampler)},
            {"trace", c.trace}};
}

UpscaleConfig upscale_config_from_json(const nlohmann::json& j) {
    const std::string where = "upscale config";
    reject_unknown_keys(j,
                        {"seed", "output_dir", "lr_manifest", "hr_manifest", "depth_lr", "depth_estimator",
                         "ae_checkpoint", "unet_checkpoint", "sampler"},
                        where);
    UpscaleConfig c;
    c.seed = get_or(j, "seed", c.seed, where);
    c.output_dir = output_dir_or_default(j, "upscale");
    c.lr_manifest = path_or(j, "lr_manifest", where);
    require_path(c.lr_manifest, "lr_manifest", where);
    c.hr_manifest = path_or(j, "hr_manifest", where);
    c.depth_lr = get_or(j, "depth_lr", c.depth_lr, where);
    check_depth_lr(c.depth_lr);
    c.depth_estimator = get_or(j, "depth_estimator", c.depth_estimator, where);
    check_estimator(c.depth_estimator);
    if (c.depth_lr == "o" && c.hr_manifest.empty())
        throw ConfigError("depth_lr 'o' uses the original HR depth and needs hr_manifest");
    if (c.depth_lr == "d" && c.depth_estimator == "none")
        throw ConfigError("depth_lr 'd' requires a depth estimator provider");
    c.ae_checkpoint = path_or(j, "ae_checkpoint", where);
    c.unet_checkpoint = path_or(j, "unet_checkpoint", where);
    require_path(c.ae_checkpoint, "ae_checkpoint", where);
    require_path(c.unet_checkpoint, "unet_checkpoint", where);
    c.sampler = diffusion::sampler_config_from_json(j.value("sampler", nlohmann::json::object()));
    return c;
}

nlohmann::json to_json(const UpscaleConfig& c) {
    return {{"seed", c.seed},
            {"output_dir", c.output_dir.string()},
            {"lr_manifest", c.lr_manifest.string()},
            {"hr_manifest", c.hr_manifest.string()},
            {"depth_lr", c.depth_lr},
            {"depth_estimator", c.depth_estimator},
            {"ae_checkpoint", c.ae_checkpoint.string()},
            {"unet_checkpoint", c.unet_checkpoint.string()},
            {"sampler", diffusion::to_json(c.sampler)}};
}

EvaluateConfig evaluate_config_from_json(const nlohmann::json& j) {
    const std::string where = "evaluate config";
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    nlohmann::json rest = j;
    EvaluateConfig c;
    c.output_dir = output_dir_or_default(j, "evaluate");
    c.generated = path_or(j, "generated", where);
    c.reference = path_or(j, "reference", where);
    require_path(c.generated, "generated", where);
    require_path(c.reference, "reference", where);
    for (const char* k : {"output_dir", "generated", "reference"}) rest.erase(k);
    c.eval = eval::eval_config_from_json(rest);
    return c;
}

nlohmann::json to_json(const EvaluateConfig& c) {
    nlohmann::json j = eval::to_json(c.eval);
    j["output_dir"] = c.output_dir.string();
    j["generated"] = c.generated.string();
    j["reference"] = c.reference.string();
    return j;
}

}  // namespace ldm3d::cli
