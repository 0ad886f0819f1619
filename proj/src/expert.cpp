#include "sacf/expert.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sacf/parallel.hpp"

using nlohmann::json;

namespace sacf {

std::string to_string(ExpertKind k) {
    return k == ExpertKind::Aware ? "aware" : "agnostic";
}

ExpertKind expert_kind_from_string(const std::string& s) {
    if (s == "aware") return ExpertKind::Aware;
    if (s == "agnostic") return ExpertKind::Agnostic;
    throw std::invalid_argument("unknown expert kind: " + s);
}

void AugConfig::validate() const {
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("AugConfig: beta must be in [0,1]");
    if (blur_kernel < 1 || blur_kernel % 2 == 0)
        throw std::invalid_argument("AugConfig: blur_kernel must be odd and >= 1");
    if (keep_radius < 0) throw std::invalid_argument("AugConfig: keep_radius must be >= 0");
}

std::string ExpertParams::to_json() const {
    json j;
    j["kind"] = to_string(kind);
    j["w"] = w;
    j["b"] = b;
    j["meta"] = {{"grid_h", meta.grid_h},         {"grid_w", meta.grid_w},
                 {"feature_dim", meta.feature_dim}, {"seed", meta.seed},
                 {"epochs", meta.epochs},         {"learning_rate", meta.learning_rate}};
    return j.dump(2);
}

ExpertParams ExpertParams::from_json(const std::string& text) {
    const json j = json::parse(text);
    ExpertParams p;
    p.kind = expert_kind_from_string(j.at("kind").get<std::string>());
    p.w = j.at("w").get<std::vector<double>>();
    p.b = j.at("b").get<double>();
    const auto& m = j.at("meta");
    p.meta.grid_h = m.at("grid_h").get<int>();
    p.meta.grid_w = m.at("grid_w").get<int>();
    p.meta.feature_dim = m.at("feature_dim").get<int>();
    p.meta.seed = m.at("seed").get<std::uint64_t>();
    p.meta.epochs = m.at("epochs").get<int>();
    p.meta.learning_rate = m.at("learning_rate").get<double>();
    if (static_cast<int>(p.w.size()) != p.meta.feature_dim)
        throw std::runtime_error("ExpertParams: weight length does not match feature_dim");
    return p;
}

Grid predict_logits(const ExpertParams& params, const SceneFeatures& features) {
    if (static_cast<int>(params.w.size()) != features.feature_dim)
        throw std::invalid_argument("predict: feature_dim mismatch");
    Grid out(features.grid_h, features.grid_w);
    const int F = features.feature_dim;
    for (int i = 0; i < features.grid_h; ++i) {
        for (int j = 0; j < features.grid_w; ++j) {
            const float* f = features.cell(i, j);
            double z = params.b;
            for (int c = 0; c < F; ++c) z += params.w[c] * f[c];
            out.at(i, j) = z;
        }
    }
    return out;
}

Heatmap predict_heatmap(const ExpertParams& params, const SceneFeatures& features) {
    Heatmap out = predict_logits(params, features);
    for (double& v : out.v) v = sigmoid(v);
    return out;
}

SceneFeatures aug_social(const SceneFeatures& features, const std::vector<BBox>& faces,
                         const std::optional<Point>& keep_center, const AugConfig& cfg) {
    cfg.validate();
    const int H = features.grid_h;
    const int W = features.grid_w;

    std::vector<char> keep(static_cast<std::size_t>(H) * W, 0);
    CellIndex kc{};
    if (keep_center) {
        kc.col = static_cast<int>(std::floor(keep_center->x / kCellPx));
        kc.row = static_cast<int>(std::floor(keep_center->y / kCellPx));
    }
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            const Point c{(j + 0.5) * kCellPx, (i + 0.5) * kCellPx};
            bool k = point_in_union(c, faces);
            if (!k && keep_center) {
                const double di = i - kc.row;
                const double dj = j - kc.col;
                k = di * di + dj * dj <= static_cast<double>(cfg.keep_radius) * cfg.keep_radius;
            }
            keep[static_cast<std::size_t>(i) * W + j] = k ? 1 : 0;
        }
    }

    SceneFeatures out = features;
    std::vector<double> att(static_cast<std::size_t>(H) * W);
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            const bool k = keep[static_cast<std::size_t>(i) * W + j];
            const double scale = k ? 1.0 : cfg.beta;
            if (!k) {
                out.at(i, j, SceneFeatures::kObjectMask) =
                    static_cast<float>(features.at(i, j, SceneFeatures::kObjectMask) * cfg.beta);
                out.at(i, j, SceneFeatures::kPnfMask) =
                    static_cast<float>(features.at(i, j, SceneFeatures::kPnfMask) * cfg.beta);
            }
            att[static_cast<std::size_t>(i) * W + j] =
                features.at(i, j, SceneFeatures::kGazeAlignment) * scale;
        }
    }

    const int r = cfg.blur_kernel / 2;
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            if (keep[static_cast<std::size_t>(i) * W + j]) continue;
            double sum = 0.0;
            int count = 0;
            for (int di = -r; di <= r; ++di) {
                for (int dj = -r; dj <= r; ++dj) {
                    const int ii = i + di;
                    const int jj = j + dj;
                    if (ii < 0 || ii >= H || jj < 0 || jj >= W) continue;
                    sum += att[static_cast<std::size_t>(ii) * W + jj];
                    ++count;
                }
            }
            out.at(i, j, SceneFeatures::kGazeAlignment) = static_cast<float>(sum / count);
        }
    }
    return out;
}

namespace {

double clamp_prob(double p) { return std::clamp(p, kBceEps, 1.0 - kBceEps); }

}  // namespace

TrainedExpert train_expert(const std::vector<const Annotation*>& train, ExpertKind kind,
                           const ExpertHyper& hyper, const AugConfig& aug, int threads) {
    if (train.empty()) throw std::invalid_argument("train_expert: empty training split");
    aug.validate();

    const Annotation& first = *train.front();
    if (!first.features) throw std::invalid_argument("train_expert: annotations lack features");
    const int H = first.features->grid_h;
    const int W = first.features->grid_w;
    const int F = first.features->feature_dim;
    const int N = static_cast<int>(train.size());

    // Per-frame training inputs are fixed across epochs; build them once.
    std::vector<SceneFeatures> aug_store;
    std::vector<const SceneFeatures*> feats(N);
    std::vector<Heatmap> gts(N);
    if (kind == ExpertKind::Aware) aug_store.resize(N);
    for (const Annotation* a : train) {
        if (!a->features)
            throw std::invalid_argument("train_expert: frame '" + a->frame_id + "' lacks features");
        if (a->target_category == Category::Noninclusive)
            throw std::invalid_argument("train_expert: Noninclusive frame '" + a->frame_id +
                                        "' must be filtered before training");
    }
    parallel_for(N, threads, [&](int n) {
        const Annotation& a = *train[n];
        const Point tc = pixel_to_cell(a.target_point);
        gts[n] = gaussian_gt_heatmap(tc.x, tc.y, hyper.heatmap_sigma, H, W);
        if (kind == ExpertKind::Aware) {
            aug_store[n] = aug_social(*a.features, a.adult_faces, a.target_point, aug);
            feats[n] = &aug_store[n];
        } else {
            feats[n] = &*a.features;
        }
    });

    // Init: zero weights, bias at the logit of the mean ground-truth value.
    double gt_mean = 0.0;
    for (const auto& g : gts)
        for (double v : g.v) gt_mean += v;
    gt_mean /= static_cast<double>(N) * H * W;
    ExpertParams params;
    params.kind = kind;
    params.w.assign(F, 0.0);
    params.b = std::log(clamp_prob(gt_mean) / (1.0 - clamp_prob(gt_mean)));
    params.meta = {H, W, F, hyper.seed, hyper.epochs, hyper.learning_rate};

    const int batch = (hyper.batch_size <= 0 || hyper.batch_size > N) ? N : hyper.batch_size;
    const double cell_norm = 1.0 / (static_cast<double>(H) * W);

    std::vector<double> frame_loss(N);
    std::vector<std::vector<double>> frame_grad(N, std::vector<double>(F + 1));

    auto sweep = [&](int lo, int hi, bool apply) -> double {
        const int M = hi - lo;
        parallel_for(M, threads, [&](int k) {
            const int n = lo + k;
            const SceneFeatures& f = *feats[n];
            const Heatmap& gt = gts[n];
            double loss = 0.0;
            std::vector<double>& g = frame_grad[n];
            std::fill(g.begin(), g.end(), 0.0);
            for (int i = 0; i < H; ++i) {
                for (int j = 0; j < W; ++j) {
                    const float* fc = f.cell(i, j);
                    double z = params.b;
                    for (int c = 0; c < F; ++c) z += params.w[c] * fc[c];
                    const double p = sigmoid(z);
                    const double pc = clamp_prob(p);
                    const double gv = gt.at(i, j);
                    loss -= gv * std::log(pc) + (1.0 - gv) * std::log(1.0 - pc);
                    const double dz = (p - gv) * cell_norm;
                    for (int c = 0; c < F; ++c) g[c] += dz * fc[c];
                    g[F] += dz;
                }
            }
            frame_loss[n] = loss * cell_norm;
        });
        // Fixed-order reduction keeps results identical for any thread count.
        double total = 0.0;
        std::vector<double> grad(F + 1, 0.0);
        for (int n = lo; n < hi; ++n) {
            total += frame_loss[n];
            for (int c = 0; c <= F; ++c) grad[c] += frame_grad[n][c];
        }
        if (apply) {
            const double scale = hyper.learning_rate / M;
            for (int c = 0; c < F; ++c) params.w[c] -= scale * grad[c];
            params.b -= scale * grad[F];
        }
        return total / M;
    };

    // epoch_losses[e] is the loss after e update epochs; the sweep inside the
    // loop reports the pre-update value, so one closing sweep gives the final.
    TrainedExpert out;
    for (int e = 0; e < hyper.epochs; ++e) {
        double epoch_loss = 0.0;
        for (int lo = 0; lo < N; lo += batch) {
            const int hi = std::min(N, lo + batch);
            epoch_loss += sweep(lo, hi, true) * (hi - lo);
        }
        epoch_loss /= N;
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train_expert: non-finite loss at epoch " +
                                     std::to_string(e + 1));
        out.epoch_losses.push_back(epoch_loss);
    }
    out.epoch_losses.push_back(sweep(0, N, false));
    if (hyper.epochs > 0 && hyper.learning_rate > 0.0 &&
        out.epoch_losses.back() >= out.epoch_losses.front())
        throw std::runtime_error("train_expert: training failed to reduce the loss");

    out.params = std::move(params);
    return out;
}

}  // namespace sacf
