#include "sacf/synth.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sacf/parallel.hpp"
#include "sacf/rng.hpp"

using nlohmann::json;

namespace sacf {

namespace {

constexpr double kTau = 6.283185307179586477;
// Placement constraints keep entity centers angularly separated as seen from
// the head, so the gaze ray disambiguates the target entity. Faces keep a
// wider berth from non-face entities than same-kind pairs do: the coarse
// face-vs-not decision has to survive the gaze noise, while within-category
// ambiguity only affects fine localization.
constexpr double kMinAngularSep = 0.30;   // radians, same-kind pairs
constexpr double kFaceAngularSep = 1.20;  // radians, face vs non-face pairs
constexpr double kMinHeadDist = 40.0;    // px
constexpr double kBoxMargin = 4.0;       // px
constexpr int kEntityTries = 100;
constexpr int kSceneTries = 100;

struct Entity {
    BBox box;
    Category category;
};

double angle_from(const Point& head, const Point& p) {
    return std::atan2(p.y - head.y, p.x - head.x);
}

double angular_diff(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTau);
    return std::min(d, kTau - d);
}

bool placement_ok(const BBox& cand, Category cat, const Point& head_center, const BBox& head_box,
                  const std::vector<Entity>& placed, int width, int height) {
    if (cand.x_min < 0 || cand.y_min < 0 || cand.x_max > width || cand.y_max > height)
        return false;
    const BBox inflated{std::max(0.0, cand.x_min - kBoxMargin), std::max(0.0, cand.y_min - kBoxMargin),
                        cand.x_max + kBoxMargin, cand.y_max + kBoxMargin};
    if (boxes_overlap(inflated, head_box)) return false;
    const Point c = cand.center();
    if (std::hypot(c.x - head_center.x, c.y - head_center.y) < kMinHeadDist) return false;
    const double ang = angle_from(head_center, c);
    for (const auto& e : placed) {
        if (boxes_overlap(inflated, e.box)) return false;
        const bool cross_face = (cat == Category::Face) != (e.category == Category::Face);
        const double min_sep = cross_face ? kFaceAngularSep : kMinAngularSep;
        if (angular_diff(ang, angle_from(head_center, e.box.center())) < min_sep) return false;
    }
    return true;
}

BBox sample_box(SplitRng& rng, double min_size, double max_size, int width, int height) {
    const double w = rng.uniform(min_size, max_size);
    const double h = rng.uniform(min_size, max_size);
    const double x = rng.uniform(0.0, width - w);
    const double y = rng.uniform(0.0, height - h);
    return {x, y, x + w, y + h};
}

struct SceneLayout {
    BBox head;
    std::vector<Entity> entities;
};

bool try_layout(const GenConfig& cfg, SplitRng& rng, SceneLayout& out) {
    const int W = cfg.frame_width();
    const int H = cfg.frame_height();
    out.entities.clear();
    out.head = sample_box(rng, 24.0, 40.0, W, H);
    const Point hc = out.head.center();

    struct Want {
        Category cat;
        int count;
        double min_size, max_size;
    };
    const Want wants[] = {
        {Category::Face, rng.uniform_int(cfg.n_faces_min, cfg.n_faces_max), 16.0, 28.0},
        {Category::PersonNonFace, rng.uniform_int(cfg.n_pnf_min, cfg.n_pnf_max), 20.0, 44.0},
        {Category::Object, rng.uniform_int(cfg.n_objects_min, cfg.n_objects_max), 12.0, 28.0},
    };
    for (const auto& w : wants) {
        for (int k = 0; k < w.count; ++k) {
            bool placed = false;
            for (int t = 0; t < kEntityTries; ++t) {
                BBox cand = sample_box(rng, w.min_size, w.max_size, W, H);
                if (placement_ok(cand, w.cat, hc, out.head, out.entities, W, H)) {
                    out.entities.push_back({cand, w.cat});
                    placed = true;
                    break;
                }
            }
            if (!placed) return false;
        }
    }
    return true;
}

void fill_features(Annotation& a, const GenConfig& cfg, const std::vector<Entity>& entities,
                   double gaze_angle) {
    SceneFeatures f(cfg.grid_h, cfg.grid_w, cfg.feature_dim);
    const Point hc = a.child_head.center();
    const double diag = std::hypot(a.width, a.height);
    const double gx = std::cos(gaze_angle);
    const double gy = std::sin(gaze_angle);
    for (int i = 0; i < cfg.grid_h; ++i) {
        for (int j = 0; j < cfg.grid_w; ++j) {
            const Point c{(j + 0.5) * kCellPx, (i + 0.5) * kCellPx};
            for (const auto& e : entities) {
                if (!point_in_box(c, e.box)) continue;
                switch (e.category) {
                    case Category::Face: f.at(i, j, SceneFeatures::kFaceMask) = 1.0f; break;
                    case Category::Object: f.at(i, j, SceneFeatures::kObjectMask) = 1.0f; break;
                    case Category::PersonNonFace: f.at(i, j, SceneFeatures::kPnfMask) = 1.0f; break;
                    default: break;
                }
            }
            if (point_in_box(c, a.child_head)) f.at(i, j, SceneFeatures::kHeadMask) = 1.0f;
            const double dx = c.x - hc.x;
            const double dy = c.y - hc.y;
            const double d = std::hypot(dx, dy);
            f.at(i, j, SceneFeatures::kGazeAlignment) =
                d > 1e-9 ? static_cast<float>((dx * gx + dy * gy) / d) : 0.0f;
            f.at(i, j, SceneFeatures::kHeadDistance) = static_cast<float>(d / diag);
        }
    }
    a.features = std::move(f);
}

}  // namespace

void GenConfig::validate() const {
    const double prior_sum = prior_face + prior_object + prior_pnf;
    if (prior_face < 0 || prior_object < 0 || prior_pnf < 0 || std::abs(prior_sum - 1.0) > 1e-9)
        throw std::invalid_argument("GenConfig: category prior must be nonnegative and sum to 1");
    const double frac_sum = split_fractions[0] + split_fractions[1] + split_fractions[2];
    if (std::abs(frac_sum - 1.0) > 1e-9)
        throw std::invalid_argument("GenConfig: split fractions must sum to 1");
    if (grid_h < 8 || grid_w < 8)
        throw std::invalid_argument("GenConfig: grid dimensions must be >= 8");
    if (n_frames < 1) throw std::invalid_argument("GenConfig: n_frames must be >= 1");
    if (feature_dim != 6) throw std::invalid_argument("GenConfig: feature_dim must be 6");
    if (n_faces_min < 1 || n_faces_max < n_faces_min || n_objects_min < 1 ||
        n_objects_max < n_objects_min || n_pnf_min < 1 || n_pnf_max < n_pnf_min)
        throw std::invalid_argument("GenConfig: invalid entity count ranges");
    if (gaze_noise_sigma < 0 || jitter_sigma < 0)
        throw std::invalid_argument("GenConfig: noise sigmas must be >= 0");
    if (noninclusive_prob < 0 || noninclusive_prob > 1)
        throw std::invalid_argument("GenConfig: noninclusive_prob must be in [0,1]");
}

int GenConfig::frame_width() const { return grid_w * kCellPx; }
int GenConfig::frame_height() const { return grid_h * kCellPx; }

std::string GenConfig::to_json() const {
    json j;
    j["grid_h"] = grid_h;
    j["grid_w"] = grid_w;
    j["feature_dim"] = feature_dim;
    j["n_frames"] = n_frames;
    j["split_fractions"] = split_fractions;
    j["category_prior"] = {{"face", prior_face}, {"object", prior_object}, {"person_non_face", prior_pnf}};
    j["n_faces"] = {n_faces_min, n_faces_max};
    j["n_objects"] = {n_objects_min, n_objects_max};
    j["n_pnf"] = {n_pnf_min, n_pnf_max};
    j["gaze_noise_sigma"] = gaze_noise_sigma;
    j["jitter_sigma"] = jitter_sigma;
    j["noninclusive_prob"] = noninclusive_prob;
    j["seed"] = seed;
    return j.dump(2);
}

GenConfig GenConfig::from_json(const std::string& text) {
    const json j = json::parse(text);
    GenConfig c;
    c.grid_h = j.value("grid_h", c.grid_h);
    c.grid_w = j.value("grid_w", c.grid_w);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.n_frames = j.value("n_frames", c.n_frames);
    if (j.contains("split_fractions")) c.split_fractions = j.at("split_fractions").get<std::array<double, 3>>();
    if (j.contains("category_prior")) {
        const auto& p = j.at("category_prior");
        c.prior_face = p.value("face", c.prior_face);
        c.prior_object = p.value("object", c.prior_object);
        c.prior_pnf = p.value("person_non_face", c.prior_pnf);
    }
    auto pair = [&](const char* key, int& lo, int& hi) {
        if (j.contains(key)) {
            lo = j.at(key)[0].get<int>();
            hi = j.at(key)[1].get<int>();
        }
    };
    pair("n_faces", c.n_faces_min, c.n_faces_max);
    pair("n_objects", c.n_objects_min, c.n_objects_max);
    pair("n_pnf", c.n_pnf_min, c.n_pnf_max);
    c.gaze_noise_sigma = j.value("gaze_noise_sigma", c.gaze_noise_sigma);
    c.jitter_sigma = j.value("jitter_sigma", c.jitter_sigma);
    c.noninclusive_prob = j.value("noninclusive_prob", c.noninclusive_prob);
    c.seed = j.value("seed", c.seed);
    return c;
}

std::string GenConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char ch : to_json()) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Annotation sample_scene(const GenConfig& cfg, std::uint64_t frame_index) {
    cfg.validate();
    SplitRng rng(cfg.seed, frame_index);

    SceneLayout layout;
    bool ok = false;
    for (int t = 0; t < kSceneTries && !ok; ++t) ok = try_layout(cfg, rng, layout);
    if (!ok)
        throw std::runtime_error("sample_scene: placement failed after " +
                                 std::to_string(kSceneTries) +
                                 " scene retries; config too crowded for the grid");

    Annotation a;
    a.frame_id = "f" + std::to_string(frame_index);
    a.clip_id = "c" + std::to_string(frame_index / 5);
    a.width = cfg.frame_width();
    a.height = cfg.frame_height();
    a.child_head = layout.head;
    for (const auto& e : layout.entities)
        if (e.category == Category::Face) a.adult_faces.push_back(e.box);

    const Point hc = layout.head.center();
    double gaze_angle;
    if (cfg.noninclusive_prob > 0.0 && rng.uniform() < cfg.noninclusive_prob) {
        a.target_category = Category::Noninclusive;
        a.target_point = {-1.0, -1.0};
        gaze_angle = rng.uniform(0.0, kTau);
    } else {
        const double u = rng.uniform();
        Category cat;
        if (u < cfg.prior_face)
            cat = Category::Face;
        else if (u < cfg.prior_face + cfg.prior_object)
            cat = Category::Object;
        else
            cat = Category::PersonNonFace;

        std::vector<const Entity*> pool;
        for (const auto& e : layout.entities)
            if (e.category == cat) pool.push_back(&e);
        const Entity& target = *pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)];

        const Point tc = target.box.center();
        const double jit = cfg.jitter_sigma * kCellPx;
        Point tp{tc.x + rng.normal(0.0, jit), tc.y + rng.normal(0.0, jit)};
        tp.x = std::clamp(tp.x, target.box.x_min + 0.25, target.box.x_max - 0.25);
        tp.y = std::clamp(tp.y, target.box.y_min + 0.25, target.box.y_max - 0.25);

        a.target_category = cat;
        a.target_point = tp;
        a.target_box = target.box;
        gaze_angle = angle_from(hc, tp) + rng.normal(0.0, cfg.gaze_noise_sigma);
    }

    fill_features(a, cfg, layout.entities, gaze_angle);
    a.validate();
    return a;
}

std::array<int, 3> split_sizes(int n_frames, const std::array<double, 3>& fractions) {
    const int n_train = static_cast<int>(std::lround(fractions[0] * n_frames));
    const int n_val = static_cast<int>(std::lround(fractions[1] * n_frames));
    return {n_train, n_val, n_frames - n_train - n_val};
}

Dataset make_dataset(const GenConfig& cfg, int threads) {
    cfg.validate();
    Dataset ds;
    ds.annotations.resize(cfg.n_frames);
    parallel_for(cfg.n_frames, threads,
                 [&](int i) { ds.annotations[i] = sample_scene(cfg, static_cast<std::uint64_t>(i)); });

    // Deterministic Fisher-Yates on a dedicated stream, outside the per-frame
    // stream range.
    std::vector<int> order(cfg.n_frames);
    for (int i = 0; i < cfg.n_frames; ++i) order[i] = i;
    SplitRng shuffle_rng(cfg.seed, 0xfffffffffffffffeull);
    for (int i = cfg.n_frames - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);

    const auto sizes = split_sizes(cfg.n_frames, cfg.split_fractions);
    for (int k = 0; k < cfg.n_frames; ++k) {
        Split s = k < sizes[0] ? Split::Train : (k < sizes[0] + sizes[1] ? Split::Val : Split::Test);
        ds.annotations[order[k]].split = s;
    }

    ds.metadata = ds.recount(cfg.hash(), cfg.seed);
    return ds;
}

}  // namespace sacf
