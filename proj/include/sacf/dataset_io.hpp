#pragma once

#include <iosfwd>
#include <string>

#include "sacf/scene.hpp"

namespace sacf {

struct LoadOptions {
    bool strict = true;              // reject unknown fields
    bool filter_noninclusive = false;
    bool validate = true;
};

// JSONL: one annotation object per line, UTF-8. Malformed lines and invariant
// violations raise std::runtime_error naming the line / frame_id.
Dataset load_dataset(const std::string& path, const LoadOptions& opts = {});
Dataset load_dataset_stream(std::istream& in, const LoadOptions& opts, const std::string& name);

void save_dataset(const Dataset& ds, const std::string& path);
void save_dataset_stream(const Dataset& ds, std::ostream& out);

std::string annotation_to_jsonl(const Annotation& a);
Annotation annotation_from_json_line(const std::string& line, bool strict, int line_no);

std::string metadata_to_json(const DatasetMetadata& m);
DatasetMetadata metadata_from_json(const std::string& text);

}  // namespace sacf
