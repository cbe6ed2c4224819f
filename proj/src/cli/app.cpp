// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "ldm3d/cli/commands.hpp"
#include "ldm3d/core/error.hpp"

namespace ldm3d::cli {

namespace {

enum class ValueKind { Str, Int, Real, Bool, List };

// A flag that overrides one key (JSON pointer) of the config file.
struct Override {
    CLI::Option* opt = nullptr;
    std::string pointer;
    ValueKind kind = ValueKind::Str;
    std::shared_ptr<std::string> text = std::make_shared<std::string>();
    std::shared_ptr<bool> flag = std::make_shared<bool>(false);
};

struct Subcommand {
    CLI::App* app = nullptr;
    std::shared_ptr<std::string> config_path = std::make_shared<std::string>();
    std::vector<Override> overrides;

    void add(const std::string& name, const std::string& pointer, ValueKind kind, const std::string& help) {
        Override o;
        o.pointer = pointer;
        o.kind = kind;
        o.opt = kind == ValueKind::Bool ? app->add_flag(name, *o.flag, help) : app->add_option(name, *o.text, help);
        overrides.push_back(std::move(o));
    }
};

nlohmann::json parse_value(const Override& o) {
    const std::string& s = *o.text;
    const std::string name = o.opt->get_name();
    try {
        switch (o.kind) {
            case ValueKind::Str: return s;
            case ValueKind::Bool: return *o.flag;
            case ValueKind::Int: {
                size_t used = 0;
                const long long v = std::stoll(s, &used);
                if (used != s.size()) break;
                return v;
            }
            case ValueKind::Real: {
                size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) break;
                return v;
            }
            case ValueKind::List: {
                nlohmann::json arr = nlohmann::json::array();
                std::string item;
                std::stringstream ss(s);
                while (std::getline(ss, item, ','))
                    if (!item.empty()) arr.push_back(item);
                return arr;
            }
        }
    } catch (const std::logic_error&) {
    }
    throw ConfigError("invalid value '" + s + "' for " + name);
}

nlohmann::json read_config_file(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
    return j;
}

nlohmann::json merged_config(const Subcommand& sc) {
    nlohmann::json j = read_config_file(*sc.config_path);
    for (const auto& o : sc.overrides) {
        if (o.opt->count() == 0) continue;
        j[nlohmann::json::json_pointer(o.pointer)] = parse_value(o);
    }
    return j;
}

Subcommand make_subcommand(CLI::App& app, const std::string& name, const std::string& help) {
    Subcommand sc;
    sc.app = app.add_subcommand(name, help);
    sc.app->add_option("--config", *sc.config_path, "JSON config file; flags override its keys");
    sc.add("--seed", "/seed", ValueKind::Int, "root seed");
    sc.add("--out", "/output_dir", ValueKind::Str, "output directory");
    return sc;
}

void add_sampler_flags(Subcommand& sc) {
    sc.add("--sampler", "/sampler/kind", ValueKind::Str, "ddim or ddpm");
    sc.add("--steps", "/sampler/steps", ValueKind::Int, "DDIM steps");
    sc.add("--eta", "/sampler/eta", ValueKind::Real, "DDIM eta");
    sc.add("--guidance", "/sampler/guidance_scale", ValueKind::Real, "classifier-free guidance scale");
}

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Config: return kExitConfig;
        case ErrorKind::Data: return kExitData;
        case ErrorKind::Numeric: return kExitNumeric;
        case ErrorKind::Contract: return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"RGBD latent diffusion toolkit: panorama generation and x4 RGBD super-resolution"};
    app.require_subcommand(1);

    Subcommand prep = make_subcommand(app, "prepare-pano", "tone-map, roll and caption HDR panoramas");
    prep.add("--hdr-dir", "/hdr_dir", ValueKind::Str, "directory of .pfm panoramas");
    prep.add("--augmentations", "/augmentations", ValueKind::Int, "augmented copies per HDR");
    prep.add("--height", "/height", ValueKind::Int, "output height (width = 2 x height)");
    prep.add("--exposure", "/exposure", ValueKind::Real, "base exposure");
    prep.add("--gamma", "/gamma", ValueKind::Real, "tone-map gamma");
    prep.add("--split", "/split", ValueKind::Str, "train or val");

    Subcommand deg = make_subcommand(app, "degrade", "BSR-degrade an HR manifest to x1/4 LR pairs");
    deg.add("--manifest", "/manifest", ValueKind::Str, "HR manifest");

    Subcommand train = make_subcommand(app, "train", "train the autoencoder or a denoiser");
    train.add("--kind", "/kind", ValueKind::Str, "ae, diffusion-pano or diffusion-sr");
    train.add("--manifest", "/manifest", ValueKind::Str, "training manifest (HR for diffusion-sr)");
    train.add("--lr-manifest", "/lr_manifest", ValueKind::Str, "LR manifest from 'degrade' (diffusion-sr)");
    train.add("--depth-lr", "/depth_lr", ValueKind::Str, "LR depth strategy: d, o or b (diffusion-sr)");
    train.add("--steps", "/steps", ValueKind::Int, "optimizer steps");
    train.add("--batch-size", "/batch_size", ValueKind::Int, "minibatch size");
    train.add("--lr", "/lr", ValueKind::Real, "learning rate");
    train.add("--ae-checkpoint", "/ae_checkpoint", ValueKind::Str, "trained autoencoder (diffusion kinds)");
    train.add("--resume", "/resume", ValueKind::Str, "checkpoint to continue from");
    train.add("--in-channels", "/denoiser/in_channels", ValueKind::Int, "denoiser input channels");
    train.add("--base-width", "/denoiser/base_width", ValueKind::Int, "denoiser base width");

    Subcommand sample = make_subcommand(app, "sample-pano", "generate RGBD panoramas from a prompt");
    sample.add("--prompt", "/prompt", ValueKind::Str, "text prompt");
    sample.add("--num-samples", "/num_samples", ValueKind::Int, "panoramas to generate");
    sample.add("--latent-height", "/latent_height", ValueKind::Int, "latent height (output is 8x)");
    sample.add("--ae-checkpoint", "/ae_checkpoint", ValueKind::Str, "autoencoder checkpoint");
    sample.add("--unet-checkpoint", "/unet_checkpoint", ValueKind::Str, "4-channel denoiser checkpoint");
    sample.add("--trace", "/trace", ValueKind::Bool, "write per-step latents");
    add_sampler_flags(sample);

    Subcommand up = make_subcommand(app, "upscale", "x4 RGBD super-resolution of an LR manifest");
    up.add("--lr-manifest", "/lr_manifest", ValueKind::Str, "LR manifest");
    up.add("--hr-manifest", "/hr_manifest", ValueKind::Str, "HR manifest (needed for --depth-lr o)");
    up.add("--depth-lr", "/depth_lr", ValueKind::Str, "LR depth strategy: d, o or b");
    up.add("--depth-estimator", "/depth_estimator", ValueKind::Str, "luminance or none");
    up.add("--ae-checkpoint", "/ae_checkpoint", ValueKind::Str, "autoencoder checkpoint");
    up.add("--unet-checkpoint", "/unet_checkpoint", ValueKind::Str, "8-channel denoiser checkpoint");
    add_sampler_flags(up);

    Subcommand ev = make_subcommand(app, "evaluate", "compare a generated manifest with a reference");
    ev.add("--generated", "/generated", ValueKind::Str, "generated manifest");
    ev.add("--reference", "/reference", ValueKind::Str, "reference manifest");
    ev.add("--metrics", "/metrics", ValueKind::List, "comma list of psnr,ssim,fid,is,clip,mare");
    ev.add("--percentile", "/percentile", ValueKind::Real, "MARE outlier percentile");
    ev.add("--n-points", "/n_points", ValueKind::Int, "points for the scale-shift fit");
    ev.add("--is-splits", "/is_splits", ValueKind::Int, "inception score splits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        fs::path out;
        if (prep.app->parsed()) {
            out = cmd_prepare_pano(prepare_pano_config_from_json(merged_config(prep)));
        } else if (deg.app->parsed()) {
            out = cmd_degrade(degrade_config_from_json(merged_config(deg)));
        } else if (train.app->parsed()) {
            out = cmd_train(train_config_from_json(merged_config(train)));
        } else if (sample.app->parsed()) {
            out = cmd_sample_pano(sample_pano_config_from_json(merged_config(sample)));
        } else if (up.app->parsed()) {
            out = cmd_upscale(upscale_config_from_json(merged_config(up)));
        } else if (ev.app->parsed()) {
            out = cmd_evaluate(evaluate_config_from_json(merged_config(ev)));
            std::cout << "report: " << out.string() << "\n";
            return kExitOk;
        }
        std::cout << "wrote " << out.string() << "\n";
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ldm3d::cli
