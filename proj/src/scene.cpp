#include "sacf/scene.hpp"

#include <unordered_set>

namespace sacf {

std::string to_string(Category c) {
    switch (c) {
        case Category::Object: return "object";
        case Category::Face: return "face";
        case Category::PersonNonFace: return "person_non_face";
        case Category::Noninclusive: return "noninclusive";
    }
    throw std::logic_error("unreachable category");
}

Category category_from_string(const std::string& s) {
    if (s == "object") return Category::Object;
    if (s == "face") return Category::Face;
    if (s == "person_non_face") return Category::PersonNonFace;
    if (s == "noninclusive") return Category::Noninclusive;
    throw std::invalid_argument("unknown target_category: " + s);
}

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    throw std::logic_error("unreachable split");
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("unknown split: " + s);
}

namespace {

bool box_in_frame(const BBox& b, int width, int height) {
    return b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= width && b.y_max <= height;
}

[[noreturn]] void fail(const std::string& frame_id, const std::string& what) {
    throw std::invalid_argument("frame '" + frame_id + "': " + what);
}

}  // namespace

void Annotation::validate() const {
    if (width <= 0 || height <= 0) fail(frame_id, "nonpositive frame dimensions");
    if (!child_head.valid()) fail(frame_id, "invalid child_head box");
    if (!box_in_frame(child_head, width, height)) fail(frame_id, "child_head outside frame");
    for (const auto& f : adult_faces) {
        if (!f.valid()) fail(frame_id, "invalid adult_faces box");
        if (!box_in_frame(f, width, height)) fail(frame_id, "adult face outside frame");
    }
    if (target_category != Category::Noninclusive) {
        const BBox frame{0, 0, static_cast<double>(width), static_cast<double>(height)};
        if (!point_in_box(target_point, frame)) fail(frame_id, "target_point outside frame");
        if (target_category == Category::Face && !point_in_union(target_point, adult_faces))
            fail(frame_id, "Face target_point outside every adult face box");
        if (target_box) {
            if (!target_box->valid()) fail(frame_id, "invalid target_box");
            if (!point_in_box(target_point, *target_box))
                fail(frame_id, "target_point outside target_box");
        }
    }
    if (features) {
        if (features->feature_dim <= 0 || features->grid_h <= 0 || features->grid_w <= 0)
            fail(frame_id, "degenerate feature grid");
        for (float v : features->data)
            if (!std::isfinite(v)) fail(frame_id, "non-finite feature value");
    }
}

void Dataset::validate(bool check_metadata_counts) const {
    std::unordered_set<std::string> ids;
    for (const auto& a : annotations) {
        a.validate();
        if (!ids.insert(a.frame_id).second)
            throw std::invalid_argument("duplicate frame_id: " + a.frame_id);
    }
    if (check_metadata_counts && !metadata.split_counts.empty()) {
        const auto fresh = recount(metadata.config_hash, metadata.seed);
        if (fresh.split_counts != metadata.split_counts)
            throw std::invalid_argument("metadata split counts do not match annotations");
        if (fresh.category_counts != metadata.category_counts)
            throw std::invalid_argument("metadata category counts do not match annotations");
    }
}

std::vector<const Annotation*> Dataset::split_view(Split s) const {
    std::vector<const Annotation*> out;
    for (const auto& a : annotations)
        if (a.split == s) out.push_back(&a);
    return out;
}

DatasetMetadata Dataset::recount(std::string config_hash, std::uint64_t seed) const {
    DatasetMetadata m;
    m.config_hash = std::move(config_hash);
    m.seed = seed;
    for (const auto& a : annotations) {
        m.split_counts[to_string(a.split)]++;
        m.category_counts[to_string(a.target_category)]++;
    }
    return m;
}

}  // namespace sacf
