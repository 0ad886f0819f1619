#include "sacf/pipeline.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sacf/parallel.hpp"

using nlohmann::json;

namespace sacf {

std::string to_string(EvalMode m) {
    switch (m) {
        case EvalMode::Sacf: return "sacf";
        case EvalMode::SacfOracle: return "sacf-oracle";
        case EvalMode::AgnosticOnly: return "agnostic";
        case EvalMode::AwareOnly: return "aware";
    }
    throw std::logic_error("unreachable mode");
}

EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "sacf") return EvalMode::Sacf;
    if (s == "sacf-oracle") return EvalMode::SacfOracle;
    if (s == "agnostic") return EvalMode::AgnosticOnly;
    if (s == "aware") return EvalMode::AwareOnly;
    throw std::invalid_argument("unknown eval mode: " + s);
}

void SacfModel::validate() const {
    if (aware.meta.feature_dim != agnostic.meta.feature_dim ||
        aware.meta.grid_h != agnostic.meta.grid_h || aware.meta.grid_w != agnostic.meta.grid_w)
        throw std::invalid_argument("SacfModel: expert grids/feature dims disagree");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("SacfModel: tau must be in [0,1]");
    aug.validate();
}

std::string Prediction::to_jsonl() const {
    json j;
    j["frame_id"] = frame_id;
    j["p_t"] = {point_px.x, point_px.y};
    j["cell"] = {cell.row, cell.col};
    j["c_coarse"] = c_coarse;
    j["c_fine"] = c_fine == 1 ? "face" : "not_face";
    j["s"] = s;
    j["routed_to"] = to_string(routed_to);
    j["aware_point"] = {aware_point_px.x, aware_point_px.y};
    j["agnostic_point"] = {agnostic_point_px.x, agnostic_point_px.y};
    return j.dump();
}

Prediction Prediction::from_json_line(const std::string& line, int line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("predictions line " + std::to_string(line_no) +
                                 ": malformed JSON: " + e.what());
    }
    Prediction p;
    p.frame_id = j.at("frame_id").get<std::string>();
    p.point_px = {j.at("p_t")[0].get<double>(), j.at("p_t")[1].get<double>()};
    p.cell = {j.at("cell")[0].get<int>(), j.at("cell")[1].get<int>()};
    p.c_coarse = j.at("c_coarse").get<int>();
    p.c_fine = j.at("c_fine").get<std::string>() == "face" ? 1 : 0;
    p.s = j.at("s").get<double>();
    p.routed_to = expert_kind_from_string(j.at("routed_to").get<std::string>());
    p.aware_point_px = {j.at("aware_point")[0].get<double>(), j.at("aware_point")[1].get<double>()};
    p.agnostic_point_px = {j.at("agnostic_point")[0].get<double>(),
                           j.at("agnostic_point")[1].get<double>()};
    return p;
}

Prediction predict(const SacfModel& model, const Annotation& ann, EvalMode mode) {
    if (!ann.features)
        throw std::invalid_argument("predict: frame '" + ann.frame_id + "' has no features");
    const SceneFeatures& raw = *ann.features;

    // Inference-time augmentation keeps only face boxes: the target is unknown.
    const SceneFeatures aware_in = aug_social(raw, ann.adult_faces, std::nullopt, model.aug);
    const CellIndex aware_cell = argmax_coords(predict_heatmap(model.aware, aware_in));
    const CellIndex agn_cell = argmax_coords(predict_heatmap(model.agnostic, raw));

    Prediction p;
    p.frame_id = ann.frame_id;
    p.aware_point_px = cell_to_pixel(aware_cell);
    p.agnostic_point_px = cell_to_pixel(agn_cell);

    switch (mode) {
        case EvalMode::Sacf:
            if (!model.gate) throw std::invalid_argument("predict: sacf mode needs a gate");
            p.s = gate_score(*model.gate, raw);
            p.c_coarse = coarse_classify(p.s, model.tau);
            break;
        case EvalMode::SacfOracle:
            p.s = static_cast<double>(oracle_gate(ann));
            p.c_coarse = coarse_classify(p.s, model.tau);
            break;
        case EvalMode::AgnosticOnly:
            p.s = 0.0;
            p.c_coarse = 0;
            break;
        case EvalMode::AwareOnly:
            p.s = 1.0;
            p.c_coarse = 1;
            break;
    }

    p.routed_to = p.c_coarse == 1 ? ExpertKind::Aware : ExpertKind::Agnostic;
    p.cell = p.c_coarse == 1 ? aware_cell : agn_cell;
    p.point_px = cell_to_pixel(p.cell);
    p.c_fine = point_in_union(p.point_px, ann.adult_faces) ? 1 : 0;
    return p;
}

EvalOutput evaluate(const SacfModel& model, EvalMode mode,
                    const std::vector<const Annotation*>& frames, int threads) {
    model.validate();
    std::vector<const Annotation*> kept;
    for (const Annotation* a : frames)
        if (a->target_category != Category::Noninclusive) kept.push_back(a);
    if (kept.empty())
        throw std::invalid_argument("evaluate: empty split after Noninclusive filtering");

    const int N = static_cast<int>(kept.size());
    EvalOutput out;
    out.predictions.resize(N);
    parallel_for(N, threads, [&](int n) { out.predictions[n] = predict(model, *kept[n], mode); });

    std::vector<double> l2(N);
    std::vector<Category> cats(N);
    Confusion conf;
    double l2_sum = 0.0;
    for (int n = 0; n < N; ++n) {
        const Annotation& a = *kept[n];
        const Prediction& p = out.predictions[n];
        l2[n] = l2_normalized(p.point_px, a.target_point, a.width, a.height);
        l2_sum += l2[n];
        cats[n] = a.target_category;
        const int gt = binary_label(a.target_category);
        if (p.c_fine == 1 && gt == 1) conf.tp++;
        else if (p.c_fine == 1 && gt == 0) conf.fp++;
        else if (p.c_fine == 0 && gt == 1) conf.fn++;
        else conf.tn++;
    }

    EvalReport& r = out.report;
    r.mode = to_string(mode);
    r.n_frames = N;
    r.l2_mean = l2_sum / N;
    const L2ByClass by = l2_by_class(l2, cats);
    r.l2_obj = by.obj;
    r.l2_face = by.face;
    r.l2_pnf = by.pnf;
    r.confusion = conf;
    r.prf = binary_prf(conf);
    return out;
}

std::vector<ScenarioRow> scenario_analysis(const std::vector<Prediction>& predictions,
                                           const std::vector<const Annotation*>& frames) {
    std::map<std::string, const Annotation*> by_id;
    for (const Annotation* a : frames) by_id[a->frame_id] = a;

    struct Acc {
        int count = 0;
        double aware = 0.0;
        double agnostic = 0.0;
    };
    Acc acc[2][2];  // [pred_face][gt_face]
    for (const Prediction& p : predictions) {
        const auto it = by_id.find(p.frame_id);
        if (it == by_id.end())
            throw std::invalid_argument("scenario_analysis: unknown frame_id '" + p.frame_id + "'");
        const Annotation& a = *it->second;
        if (a.target_category == Category::Noninclusive) continue;
        const int gt = binary_label(a.target_category);
        Acc& b = acc[p.c_coarse][gt];
        b.count++;
        b.aware += l2_normalized(p.aware_point_px, a.target_point, a.width, a.height);
        b.agnostic += l2_normalized(p.agnostic_point_px, a.target_point, a.width, a.height);
    }

    auto row = [&](const std::string& name, int pf, int gf) {
        ScenarioRow r;
        r.name = name;
        r.pred_face = pf;
        r.gt_face = gf;
        r.count = acc[pf][gf].count;
        if (r.count > 0) {
            r.aware_l2 = acc[pf][gf].aware / r.count;
            r.agnostic_l2 = acc[pf][gf].agnostic / r.count;
        }
        return r;
    };
    return {row("pred_face_gt_face", 1, 1), row("pred_notface_gt_notface", 0, 0),
            row("pred_face_gt_notface", 1, 0), row("pred_notface_gt_face", 0, 1)};
}

std::string scenario_csv(const std::vector<ScenarioRow>& rows) {
    std::ostringstream os;
    os.precision(10);
    os << "scenario,count,aware_l2,agnostic_l2\n";
    for (const auto& r : rows) {
        os << r.name << ',' << r.count << ',';
        if (r.aware_l2) os << *r.aware_l2;
        os << ',';
        if (r.agnostic_l2) os << *r.agnostic_l2;
        os << '\n';
    }
    return os.str();
}

}  // namespace sacf
