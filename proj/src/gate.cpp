#include "sacf/gate.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sacf/heatmap.hpp"

using nlohmann::json;

namespace sacf {

std::string GateParams::to_json() const {
    json j;
    j["v"] = v;
    j["c"] = c;
    j["meta"] = {{"seed", meta.seed},
                 {"epochs", meta.epochs},
                 {"learning_rate", meta.learning_rate},
                 {"class_weight", meta.class_weight}};
    return j.dump(2);
}

GateParams GateParams::from_json(const std::string& text) {
    const json j = json::parse(text);
    GateParams p;
    const auto vv = j.at("v").get<std::vector<double>>();
    if (vv.size() != kPooledDim)
        throw std::runtime_error("GateParams: expected " + std::to_string(kPooledDim) +
                                 " weights");
    std::copy(vv.begin(), vv.end(), p.v.begin());
    p.c = j.at("c").get<double>();
    const auto& m = j.at("meta");
    p.meta.seed = m.at("seed").get<std::uint64_t>();
    p.meta.epochs = m.at("epochs").get<int>();
    p.meta.learning_rate = m.at("learning_rate").get<double>();
    p.meta.class_weight = m.at("class_weight").get<double>();
    return p;
}

std::array<double, kPooledDim> pool_features(const SceneFeatures& f) {
    double face_sum = 0.0, face_max = -1.0;
    double obj_sum = 0.0, obj_max = -1.0;
    double global_max = -1.0;
    int face_n = 0, obj_n = 0;
    for (int i = 0; i < f.grid_h; ++i) {
        for (int j = 0; j < f.grid_w; ++j) {
            const double a = f.at(i, j, SceneFeatures::kGazeAlignment);
            global_max = std::max(global_max, a);
            if (f.at(i, j, SceneFeatures::kFaceMask) > 0.5f) {
                face_sum += a;
                face_max = std::max(face_max, a);
                ++face_n;
            }
            if (f.at(i, j, SceneFeatures::kObjectMask) > 0.5f) {
                obj_sum += a;
                obj_max = std::max(obj_max, a);
                ++obj_n;
            }
        }
    }
    const int cells = f.n_cells();
    return {face_n ? face_sum / face_n : 0.0,
            face_n ? face_max : -1.0,
            obj_n ? obj_sum / obj_n : 0.0,
            obj_n ? obj_max : -1.0,
            cells ? static_cast<double>(face_n) / cells : 0.0,
            cells ? global_max : -1.0};
}

double gate_score(const GateParams& params, const SceneFeatures& features) {
    const auto x = pool_features(features);
    double z = params.c;
    for (int k = 0; k < kPooledDim; ++k) z += params.v[k] * x[k];
    return sigmoid(z);
}

TrainedGate train_gate(const std::vector<const Annotation*>& train, const GateHyper& hyper) {
    if (train.empty()) throw std::invalid_argument("train_gate: empty training split");

    const int N = static_cast<int>(train.size());
    std::vector<std::array<double, kPooledDim>> xs(N);
    std::vector<int> ys(N);
    int positives = 0;
    for (int n = 0; n < N; ++n) {
        const Annotation& a = *train[n];
        if (!a.features)
            throw std::invalid_argument("train_gate: frame '" + a.frame_id + "' lacks features");
        xs[n] = pool_features(*a.features);
        ys[n] = binary_label(a.target_category);
        positives += ys[n];
    }
    if (positives == 0 || positives == N)
        throw std::invalid_argument("train_gate: single-class training split");

    const double prevalence = static_cast<double>(positives) / N;
    const double class_weight =
        hyper.class_weight > 0.0 ? hyper.class_weight : (1.0 - prevalence) / prevalence;

    GateParams params;
    params.v.fill(0.0);
    params.c = std::log(prevalence / (1.0 - prevalence));
    params.meta = {hyper.seed, hyper.epochs, hyper.learning_rate, class_weight};

    TrainedGate out;
    auto sweep = [&](bool apply) -> double {
        double loss = 0.0;
        std::array<double, kPooledDim> gv{};
        double gc = 0.0;
        for (int n = 0; n < N; ++n) {
            double z = params.c;
            for (int k = 0; k < kPooledDim; ++k) z += params.v[k] * xs[n][k];
            const double p = sigmoid(z);
            const double pc = std::clamp(p, kBceEps, 1.0 - kBceEps);
            const double wgt = ys[n] ? class_weight : 1.0;
            loss -= wgt * (ys[n] * std::log(pc) + (1 - ys[n]) * std::log(1.0 - pc));
            const double dz = wgt * (p - ys[n]);
            for (int k = 0; k < kPooledDim; ++k) gv[k] += dz * xs[n][k];
            gc += dz;
        }
        if (apply) {
            const double scale = hyper.learning_rate / N;
            for (int k = 0; k < kPooledDim; ++k) params.v[k] -= scale * gv[k];
            params.c -= scale * gc;
        }
        return loss / N;
    };

    out.epoch_losses.push_back(sweep(false));
    for (int e = 0; e < hyper.epochs; ++e) {
        const double loss = sweep(true);
        if (!std::isfinite(loss))
            throw std::runtime_error("train_gate: non-finite loss at epoch " +
                                     std::to_string(e + 1));
        out.epoch_losses.push_back(loss);
    }
    out.params = params;
    return out;
}

}  // namespace sacf
