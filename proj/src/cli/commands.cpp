// Copyright (C) 2026 The ldm3d-vr authors
// SPDX-License-Identifier: Apache-2.0

#include "ldm3d/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ldm3d/core/error.hpp"
#include "ldm3d/core/rng.hpp"
#include "ldm3d/data/image_io.hpp"
#include "ldm3d/data/manifest.hpp"
#include "ldm3d/diffusion/trainer.hpp"
#include "ldm3d/pano/pano.hpp"
#include "ldm3d/sr/pipeline.hpp"

namespace ldm3d::cli {

namespace {

constexpr const char* kCheckpointName = "checkpoint.ckpt";
constexpr const char* kManifestName = "manifest.jsonl";

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    f << s;
    if (!f) throw DataError("write failed for " + p.string());
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

// Creates output_dir and records the resolved config there. Called only
// after the config has been fully validated.
void begin_outputs(const fs::path& dir, const nlohmann::json& resolved) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    write_json(dir / kResolvedConfigName, resolved);
}

std::shared_ptr<const sr::DepthEstimator> make_estimator(const std::string& name) {
    if (name == "luminance") return std::make_shared<sr::LuminanceDepthEstimator>();
    return nullptr;
}

ae::KlAutoencoder load_ae(const fs::path& p) {
    if (!fs::exists(p)) throw DataError("autoencoder checkpoint not found: " + p.string());
    return ae::KlAutoencoder::load(p);
}

struct LoadedUNet {
    diffusion::UNet unet;
    diffusion::NoiseSchedule sched;
};

LoadedUNet load_unet(const fs::path& p) {
    if (!fs::exists(p)) throw DataError("denoiser checkpoint not found: " + p.string());
    const nn::Checkpoint ck = nn::load_checkpoint(p);
    auto it = ck.tensors.find("schedule.betas");
    if (it == ck.tensors.end()) throw DataError("denoiser checkpoint has no noise schedule: " + p.string());
    return {diffusion::UNet::from_checkpoint(ck),
            diffusion::schedule_from_betas(std::vector<real>(it->second.values().begin(), it->second.values().end()))};
}

std::map<std::string, Tensor> optimizer_tensors(const nn::Checkpoint& ck) {
    std::map<std::string, Tensor> out;
    for (const auto& [name, t] : ck.tensors)
        if (name.rfind("optim.", 0) == 0) out[name.substr(6)] = t;
    return out;
}

void add_optimizer_tensors(nn::Checkpoint& ck, const std::map<std::string, Tensor>& state) {
    for (const auto& [name, t] : state) ck.tensors["optim." + name] = t;
}

std::string caption_for(const fs::path& hdr) {
    fs::path side = hdr;
    side.replace_extension(".txt");
    if (fs::exists(side)) {
        std::ifstream f(side);
        std::string line;
        std::getline(f, line);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) return line;
    }
    std::string s = hdr.stem().string();
    std::replace(s.begin(), s.end(), '_', ' ');
    std::replace(s.begin(), s.end(), '-', ' ');
    return s;
}

std::string index_name(const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%03d", prefix, i);
    return buf;
}

// Conditioning depth at HR size for one LR sample. B upsamples the stored
// LR depth, O needs the HR sample, D runs the estimator on the LR RGB.
Tensor conditioning_depth(const std::string& strategy, const RgbdSample& lr, const RgbdSample* hr,
                          const std::shared_ptr<const sr::DepthEstimator>& estimator) {
    const int64_t H = lr.height() * sr::kScaleFactor, W = lr.width() * sr::kScaleFactor;
    if (strategy == "b") {
        Tensor d = sr::resize(lr.depth, H, W, sr::Interp::Bicubic);
        for (auto& v : d.values()) v = std::clamp(v, -1.0, 1.0);
        return d;
    }
    if (strategy == "o") {
        if (!hr) throw ConfigError("depth_lr 'o' needs the HR depth");
        if (hr->height() != H || hr->width() != W) throw DataError("HR sample '" + hr->id + "' is not 4x its LR pair");
        return hr->depth;
    }
    sr::DepthLrStrategy st{sr::DepthLrKind::D, estimator};
    st.validate();
    return sr::resize(estimator->estimate(lr.rgb), H, W, sr::Interp::Bicubic);
}

// Anything encoded by the autoencoder must tile into 8x8 blocks.
void require_ae_resolution(int64_t h, int64_t w, const std::string& what) {
    if (h % kAeDownsample != 0 || w % kAeDownsample != 0)
        throw DataError(what + " resolution " + std::to_string(h) + "x" + std::to_string(w) +
                        " is not divisible by 8");
}

std::map<std::string, RgbdSample> samples_by_id(const DatasetManifest& m) {
    std::map<std::string, RgbdSample> out;
    for (auto& s : load_all(m)) out.emplace(s.id, std::move(s));
    return out;
}

}  // namespace

fs::path cmd_prepare_pano(const PreparePanoConfig& c) {
    if (!fs::is_directory(c.hdr_dir)) throw DataError("HDR directory not found: " + c.hdr_dir.string());
    std::vector<fs::path> hdrs;
    for (const auto& e : fs::directory_iterator(c.hdr_dir))
        if (e.is_regular_file() && e.path().extension() == ".pfm") hdrs.push_back(e.path());
    std::sort(hdrs.begin(), hdrs.end());
    if (hdrs.empty()) throw DataError("no .pfm HDR images in " + c.hdr_dir.string());

    begin_outputs(c.output_dir, to_json(c));
    fs::create_directories(c.output_dir / "rgb");
    fs::create_directories(c.output_dir / "depth");
    const auto estimator = make_estimator(c.depth_estimator);
    DatasetManifest m;
    m.height = c.height;
    m.width = 2 * c.height;
    m.split = c.split == "val" ? Split::Val : Split::Train;
    std::string log;
    for (const auto& path : hdrs) {
        const Tensor hdr = sr::resize(pano::hdr_from_raster(io::read_pfm(path)), m.height, m.width, sr::Interp::Bilinear);
        const std::string raw = caption_for(path);
        for (int k = 0; k < c.augmentations; ++k) {
            const std::string id = path.stem().string() + "_a" + std::to_string(k);
            Rng rng(derive_seed(c.seed, id));
            const real exposure = c.exposure * std::exp2(rng.uniform(-c.exposure_jitter_stops, c.exposure_jitter_stops));
            const real fraction = rng.uniform();
            pano::Panorama p;
            p.rgbd.rgb = pano::tonemap_hdr(hdr, exposure, c.gamma);
            p.rgbd.depth = estimator->estimate(p.rgbd.rgb);
            p.rgbd.id = id;
            p.rgbd.caption = pano::make_pano_caption(raw, derive_seed(c.seed, id));
            p = pano::roll_pano(p, fraction);
            const fs::path rgb_path = c.output_dir / "rgb" / (id + ".png");
            const fs::path depth_path = c.output_dir / "depth" / (id + ".png");
            save_rgbd(p.rgbd, rgb_path, depth_path);
            m.entries.push_back({id, rgb_path, depth_path, p.rgbd.caption});
            log += nlohmann::json{{"id", id},
                                  {"source", path.filename().string()},
                                  {"exposure", exposure},
                                  {"gamma", c.gamma},
                                  {"roll_fraction", fraction},
                                  {"roll_shift", pano::roll_shift(m.width, fraction)},
                                  {"caption", p.rgbd.caption}}
                       .dump() +
                   "\n";
        }
    }
    write_text(c.output_dir / "augment_log.jsonl", log);
    const fs::path out = c.output_dir / kManifestName;
    write_manifest(out, m);
    return out;
}

fs::path cmd_degrade(const DegradeConfig& c) {
    const DatasetManifest hr = read_manifest(c.manifest);
    check_unique_ids(hr);
    if (hr.height % sr::kScaleFactor != 0 || hr.width % sr::kScaleFactor != 0)
        throw DataError("HR resolution must be divisible by 4");
    begin_outputs(c.output_dir, to_json(c));
    fs::create_directories(c.output_dir / "rgb");
    fs::create_directories(c.output_dir / "depth");
    DatasetManifest lr;
    lr.height = hr.height / sr::kScaleFactor;
    lr.width = hr.width / sr::kScaleFactor;
    lr.split = hr.split;
    std::string log;
    for (const auto& e : hr.entries) {
        const RgbdSample s = load_entry(hr, e);
        sr::DegradationRecipe r = c.recipe;
        r.seed = derive_seed(c.recipe.seed, e.id);
        sr::DegradationDraw draw;
        RgbdSample out;
        out.id = e.id;
        out.caption = e.caption;
        out.rgb = sr::bsr_degrade(s.rgb, r, &draw);
        out.depth = sr::resize(s.depth, lr.height, lr.width, sr::Interp::Bicubic);
        for (auto& v : out.depth.values()) v = std::clamp(v, -1.0, 1.0);
        const fs::path rgb_path = c.output_dir / "rgb" / (e.id + ".png");
        const fs::path depth_path = c.output_dir / "depth" / (e.id + ".png");
        save_rgbd(out, rgb_path, depth_path);
        lr.entries.push_back({e.id, rgb_path, depth_path, e.caption});
        nlohmann::json line = to_json(draw);
        line["id"] = e.id;
        line["seed"] = r.seed;
        log += line.dump() + "\n";
    }
    write_text(c.output_dir / "degrade_log.jsonl", log);
    const fs::path out = c.output_dir / kManifestName;
    write_manifest(out, lr);
    return out;
}

namespace {

fs::path train_ae_cmd(const TrainConfig& c) {
    const DatasetManifest m = read_manifest(c.manifest);
    check_unique_ids(m);
    require_ae_resolution(m.height, m.width, "training manifest");
    const auto samples = load_all(m);
    if (samples.empty()) throw DataError("training manifest has no entries");

    std::optional<nn::Checkpoint> resume;
    if (!c.resume.empty()) resume = nn::load_checkpoint(c.resume);
    ae::KlAutoencoder model = resume ? ae::KlAutoencoder::from_checkpoint(*resume)
                                     : ae::KlAutoencoder(c.ae, derive_seed(c.seed, "init"));
    if (resume) {
        ae::AeConfig a = model.config(), b = c.ae;
        a.latent_scale = b.latent_scale = 1.0;
        if (ae::to_json(a) != ae::to_json(b)) throw ConfigError("resume checkpoint's autoencoder config differs from the run config");
    }
    const int64_t start = resume ? resume->step : 0;
    const auto opt_state = resume ? optimizer_tensors(*resume) : std::map<std::string, Tensor>{};

    begin_outputs(c.output_dir, to_json(c));
    ae::AeTrainOptions o;
    o.steps = c.steps;
    o.batch_size = c.batch_size;
    o.lr = c.lr;
    o.seed = c.seed;
    std::string log;
    o.on_step = [&](int64_t step, const ae::AeLossValues& v) {
        log += nlohmann::json{{"step", step}, {"total", v.total}, {"recon_rgb", v.recon_rgb},
                              {"recon_depth", v.recon_depth}, {"kl", v.kl}}
                   .dump() +
               "\n";
    };
    const auto r = ae::train_ae(model, samples, o, resume ? &opt_state : nullptr, start);
    model.config().latent_scale = ae::calibrate_latent_scale(model, samples);
    nn::Checkpoint ck = model.to_checkpoint();
    ck.step = r.final_step;
    add_optimizer_tensors(ck, r.optimizer_state);
    write_text(c.output_dir / "loss_log.jsonl", log);
    const fs::path out = c.output_dir / kCheckpointName;
    nn::save_checkpoint(out, ck);
    return out;
}

fs::path train_diffusion_cmd(const TrainConfig& c) {
    const ae::KlAutoencoder ae_model = load_ae(c.ae_checkpoint);
    const DatasetManifest m = read_manifest(c.manifest);
    check_unique_ids(m);
    require_ae_resolution(m.height, m.width, "training manifest");
    const auto hr = samples_by_id(m);
    if (hr.empty()) throw DataError("training manifest has no entries");
    const bool is_sr = c.kind == "diffusion-sr";

    std::map<std::string, RgbdSample> lr;
    if (is_sr) {
        const DatasetManifest lm = read_manifest(c.lr_manifest);
        check_unique_ids(lm);
        if (lm.height * sr::kScaleFactor != m.height || lm.width * sr::kScaleFactor != m.width)
            throw DataError("LR manifest resolution must be a quarter of the HR manifest's");
        lr = samples_by_id(lm);
        for (const auto& [id, s] : hr)
            if (!lr.count(id)) throw DataError("sample '" + id + "' has no LR pair");
    }
    const auto estimator = make_estimator(c.depth_estimator);
    const real scale = ae_model.config().latent_scale;
    std::vector<diffusion::DiffusionExample> examples;
    for (const auto& [id, s] : hr) {
        Tensor z = ae_model.encode(merge_channels(s)).mean;
        for (auto& v : z.values()) v *= scale;
        diffusion::DiffusionExample ex{std::move(z), s.caption, std::nullopt};
        if (is_sr) {
            const RgbdSample& l = lr.at(id);
            ex.extra = sr::prepare_lr_latent(l.rgb, conditioning_depth(c.depth_lr, l, &s, estimator), ae_model);
        }
        examples.push_back(std::move(ex));
    }

    std::optional<nn::Checkpoint> resume;
    if (!c.resume.empty()) resume = nn::load_checkpoint(c.resume);
    diffusion::UNet model = resume ? diffusion::UNet::from_checkpoint(*resume)
                                   : diffusion::UNet(c.denoiser, derive_seed(c.seed, "init"));
    if (resume && diffusion::to_json(model.config()) != diffusion::to_json(c.denoiser))
        throw ConfigError("resume checkpoint's denoiser config differs from the run config");
    const int64_t start = resume ? resume->step : 0;
    const auto opt_state = resume ? optimizer_tensors(*resume) : std::map<std::string, Tensor>{};
    const auto sched = diffusion::make_schedule(c.schedule.T, c.schedule.beta_min, c.schedule.beta_max);
    const diffusion::HashTextEncoder text(c.denoiser.context_dim);

    begin_outputs(c.output_dir, to_json(c));
    diffusion::DiffusionTrainOptions o;
    o.steps = c.steps;
    o.batch_size = c.batch_size;
    o.lr = c.lr;
    o.seed = c.seed;
    o.uncond_prob = c.uncond_prob;
    std::string log;
    o.on_step = [&](int64_t step, real loss) { log += nlohmann::json{{"step", step}, {"loss", loss}}.dump() + "\n"; };
    const auto r = diffusion::train_diffusion(model, examples, text, sched, o, resume ? &opt_state : nullptr, start);
    nn::Checkpoint ck = model.to_checkpoint();
    ck.step = r.final_step;
    add_optimizer_tensors(ck, r.optimizer_state);
    ck.tensors["schedule.betas"] = Tensor(Shape{sched.T}, sched.betas);
    write_text(c.output_dir / "loss_log.jsonl", log);
    const fs::path out = c.output_dir / kCheckpointName;
    nn::save_checkpoint(out, ck);
    return out;
}

}  // namespace

fs::path cmd_train(const TrainConfig& c) {
    if (c.kind == "ae") return train_ae_cmd(c);
    return train_diffusion_cmd(c);
}

fs::path cmd_sample_pano(const SamplePanoConfig& c) {
    const ae::KlAutoencoder ae_model = load_ae(c.ae_checkpoint);
    const LoadedUNet net = load_unet(c.unet_checkpoint);
    if (net.unet.in_channels() != 4)
        throw ConfigError("sample-pano needs a 4-channel denoiser, checkpoint has " +
                          std::to_string(net.unet.in_channels()));
    const diffusion::HashTextEncoder text(net.unet.config().context_dim);
    const pano::PanoModels models{ae_model, net.unet, text, net.sched};

    begin_outputs(c.output_dir, to_json(c));
    DatasetManifest m;
    m.height = c.latent_height * kAeDownsample;
    m.width = 2 * m.height;
    m.split = Split::Val;
    for (int i = 0; i < c.num_samples; ++i) {
        const std::string id = index_name("pano", i);
        const uint64_t seed = derive_seed(c.seed, static_cast<uint64_t>(i));
        diffusion::TraceFn trace;
        if (c.trace) {
            const fs::path dir = c.output_dir / ("trace_" + id);
            fs::create_directories(dir);
            trace = [dir](int index, int t, const Tensor& z) {
                nn::Checkpoint ck;
                ck.kind = "latent-trace";
                ck.step = t;
                ck.tensors["z"] = z;
                nn::save_checkpoint(dir / (index_name("step", index) + ".ckpt"), ck);
            };
        }
        pano::Panorama p = pano::sample_pano(c.prompt, c.latent_height, models, c.sampler, seed, trace);
        p.rgbd.id = id;
        const fs::path rgb_path = c.output_dir / (id + "_rgb.png");
        const fs::path depth_path = c.output_dir / (id + "_depth.png");
        save_rgbd(p.rgbd, rgb_path, depth_path);
        m.entries.push_back({id, rgb_path, depth_path, c.prompt});
        write_json(c.output_dir / (id + "_meta.json"), {{"id", id},
                                                       {"prompt", c.prompt},
                                                       {"seed", seed},
                                                       {"sampler", diffusion::to_json(c.sampler)},
                                                       {"steps", c.sampler.kind == "ddpm" ? net.sched.T : c.sampler.steps},
                                                       {"guidance_scale", c.sampler.guidance_scale},
                                                       {"height", p.height()},
                                                       {"width", p.width()},
                                                       {"text_encoder", text.id()}});
    }
    const fs::path out = c.output_dir / kManifestName;
    write_manifest(out, m);
    return out;
}

fs::path cmd_upscale(const UpscaleConfig& c) {
    const DatasetManifest lm = read_manifest(c.lr_manifest);
    check_unique_ids(lm);
    std::map<std::string, RgbdSample> hr;
    if (c.depth_lr == "o") {
        const DatasetManifest hm = read_manifest(c.hr_manifest);
        check_unique_ids(hm);
        hr = samples_by_id(hm);
    }
    const ae::KlAutoencoder ae_model = load_ae(c.ae_checkpoint);
    const LoadedUNet net = load_unet(c.unet_checkpoint);
    if (net.unet.in_channels() != 8)
        throw ConfigError("upscale needs an 8-channel denoiser, checkpoint has " +
                          std::to_string(net.unet.in_channels()));
    const diffusion::HashTextEncoder text(net.unet.config().context_dim);
    const auto estimator = make_estimator(c.depth_estimator);
    const sr::UpscaleModels models{ae_model, net.unet, text, net.sched};

    begin_outputs(c.output_dir, to_json(c));
    DatasetManifest m;
    m.height = lm.height * sr::kScaleFactor;
    m.width = lm.width * sr::kScaleFactor;
    m.split = lm.split;
    require_ae_resolution(m.height, m.width, "upscaled output");
    std::string strategy = c.depth_lr;
    std::transform(strategy.begin(), strategy.end(), strategy.begin(), ::toupper);
    for (const auto& e : lm.entries) {
        const RgbdSample l = load_entry(lm, e);
        const RgbdSample* h = nullptr;
        if (c.depth_lr == "o") {
            auto it = hr.find(e.id);
            if (it == hr.end()) throw DataError("sample '" + e.id + "' is missing from the HR manifest");
            h = &it->second;
        }
        const uint64_t seed = derive_seed(c.seed, e.id);
        RgbdSample out = sr::upscale(l.rgb, conditioning_depth(c.depth_lr, l, h, estimator), e.caption, models,
                                     c.sampler, seed);
        out.id = e.id;
        const fs::path rgb_path = c.output_dir / (e.id + "_rgb.png");
        const fs::path depth_path = c.output_dir / (e.id + "_depth.png");
        save_rgbd(out, rgb_path, depth_path);
        m.entries.push_back({e.id, rgb_path, depth_path, e.caption});
        write_json(c.output_dir / (e.id + "_meta.json"), {{"id", e.id},
                                                         {"strategy", strategy},
                                                         {"seed", seed},
                                                         {"caption", e.caption},
                                                         {"sampler", diffusion::to_json(c.sampler)},
                                                         {"lr_size", {l.height(), l.width()}},
                                                         {"hr_size", {out.height(), out.width()}}});
    }
    const fs::path out = c.output_dir / kManifestName;
    write_manifest(out, m);
    return out;
}

fs::path cmd_evaluate(const EvaluateConfig& c) {
    const nlohmann::json report = eval::evaluate_run(c.generated, c.reference, c.eval, eval::default_providers());
    begin_outputs(c.output_dir, to_json(c));
    const fs::path out = c.output_dir / "report.json";
    write_text(out, eval::dump_report(report));
    return out;
}

}  // namespace ldm3d::cli
