#include "sacf/dataset_io.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace sacf {

namespace {

json box_to_json(const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

BBox box_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 4)
        throw std::runtime_error(what + ": expected a 4-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

const char* kKnownFields[] = {"frame_id", "clip_id",      "width",           "height",
                              "child_head", "adult_faces", "target_point",    "target_box",
                              "target_category", "split",  "features"};

bool known_field(const std::string& k) {
    for (const char* f : kKnownFields)
        if (k == f) return true;
    return false;
}

}  // namespace

std::string annotation_to_jsonl(const Annotation& a) {
    json j;
    j["frame_id"] = a.frame_id;
    j["clip_id"] = a.clip_id;
    j["width"] = a.width;
    j["height"] = a.height;
    j["child_head"] = box_to_json(a.child_head);
    json faces = json::array();
    for (const auto& f : a.adult_faces) faces.push_back(box_to_json(f));
    j["adult_faces"] = std::move(faces);
    j["target_point"] = json::array({a.target_point.x, a.target_point.y});
    j["target_box"] = a.target_box ? box_to_json(*a.target_box) : json(nullptr);
    j["target_category"] = to_string(a.target_category);
    j["split"] = to_string(a.split);
    if (a.features) {
        const auto& f = *a.features;
        json rows = json::array();
        for (int i = 0; i < f.grid_h; ++i) {
            json row = json::array();
            for (int jj = 0; jj < f.grid_w; ++jj) {
                json cell = json::array();
                for (int c = 0; c < f.feature_dim; ++c) cell.push_back(f.at(i, jj, c));
                row.push_back(std::move(cell));
            }
            rows.push_back(std::move(row));
        }
        j["features"] = std::move(rows);
    } else {
        j["features"] = nullptr;
    }
    return j.dump();
}

Annotation annotation_from_json_line(const std::string& line, bool strict, int line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": malformed JSON: " +
                                 e.what());
    }
    if (!j.is_object())
        throw std::runtime_error("line " + std::to_string(line_no) + ": expected a JSON object");

    for (const auto& [k, v] : j.items()) {
        if (known_field(k)) continue;
        if (strict)
            throw std::runtime_error("line " + std::to_string(line_no) + ": unknown field '" + k +
                                     "'");
        std::cerr << "warning: line " << line_no << ": ignoring unknown field '" << k << "'\n";
    }

    Annotation a;
    a.frame_id = j.at("frame_id").get<std::string>();
    a.clip_id = j.at("clip_id").get<std::string>();
    a.width = j.at("width").get<int>();
    a.height = j.at("height").get<int>();
    a.child_head = box_from_json(j.at("child_head"), "child_head");
    for (const auto& f : j.at("adult_faces")) a.adult_faces.push_back(box_from_json(f, "adult_faces"));
    const auto& tp = j.at("target_point");
    if (!tp.is_array() || tp.size() != 2)
        throw std::runtime_error("target_point: expected a 2-element array");
    a.target_point = {tp[0].get<double>(), tp[1].get<double>()};
    if (!j.at("target_box").is_null()) a.target_box = box_from_json(j.at("target_box"), "target_box");
    a.target_category = category_from_string(j.at("target_category").get<std::string>());
    a.split = split_from_string(j.at("split").get<std::string>());
    if (!j.at("features").is_null()) {
        const auto& rows = j.at("features");
        const int h = static_cast<int>(rows.size());
        const int w = h > 0 ? static_cast<int>(rows[0].size()) : 0;
        const int fd = (h > 0 && w > 0) ? static_cast<int>(rows[0][0].size()) : 0;
        SceneFeatures f(h, w, fd);
        for (int i = 0; i < h; ++i) {
            if (static_cast<int>(rows[i].size()) != w)
                throw std::runtime_error("features: ragged grid rows");
            for (int jj = 0; jj < w; ++jj) {
                if (static_cast<int>(rows[i][jj].size()) != fd)
                    throw std::runtime_error("features: ragged cell vectors");
                for (int c = 0; c < fd; ++c) f.at(i, jj, c) = rows[i][jj][c].get<float>();
            }
        }
        a.features = std::move(f);
    }
    return a;
}

Dataset load_dataset_stream(std::istream& in, const LoadOptions& opts, const std::string& name) {
    Dataset ds;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Annotation a = annotation_from_json_line(line, opts.strict, line_no);
        if (opts.validate) {
            try {
                a.validate();
            } catch (const std::exception& e) {
                throw std::runtime_error(name + ", line " + std::to_string(line_no) + ": " +
                                         e.what());
            }
        }
        if (opts.filter_noninclusive && a.target_category == Category::Noninclusive) continue;
        ds.annotations.push_back(std::move(a));
    }
    ds.metadata = ds.recount();
    if (opts.validate) ds.validate(false);
    return ds;
}

Dataset load_dataset(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return load_dataset_stream(in, opts, path);
}

void save_dataset_stream(const Dataset& ds, std::ostream& out) {
    for (const auto& a : ds.annotations) out << annotation_to_jsonl(a) << '\n';
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    save_dataset_stream(ds, out);
}

std::string metadata_to_json(const DatasetMetadata& m) {
    json j;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["split_counts"] = m.split_counts;
    j["category_counts"] = m.category_counts;
    return j.dump(2);
}

DatasetMetadata metadata_from_json(const std::string& text) {
    const json j = json::parse(text);
    DatasetMetadata m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.split_counts = j.at("split_counts").get<std::map<std::string, int>>();
    m.category_counts = j.at("category_counts").get<std::map<std::string, int>>();
    return m;
}

}  // namespace sacf
