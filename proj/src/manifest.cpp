#include "kshs/manifest.hpp"

#include "kshs/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace kshs {

void DatasetManifest::validate() const {
    std::set<std::string> seen;
    for (const auto& e : entries) {
        if (e.id.empty()) throw InvalidArgument("manifest entry with empty id");
        if (!seen.insert(e.id).second) throw InvalidArgument("duplicate manifest id '" + e.id + "'");
    }
    if (working_size.height < 1 || working_size.width < 1) throw InvalidArgument("working size must be positive");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    nlohmann::ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    DatasetManifest m;
    const auto base = path.parent_path();
    try {
        for (const auto& e : doc.at("entries")) {
            std::filesystem::path dir = e.at("frames_dir").get<std::string>();
            if (dir.is_relative()) dir = base / dir;
            m.entries.push_back({e.at("id").get<std::string>(), dir, e.at("label").get<std::string>()});
        }
        if (doc.contains("working_size")) {
            const auto& ws = doc.at("working_size");
            if (!ws.is_array() || ws.size() != 2) throw FormatError("working_size must be [H, W]");
            m.working_size = {ws[0].get<Eigen::Index>(), ws[1].get<Eigen::Index>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    m.validate();
    return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    manifest.validate();
    nlohmann::ordered_json doc;
    doc["entries"] = nlohmann::ordered_json::array();
    const auto base = path.parent_path();
    for (const auto& e : manifest.entries) {
        std::filesystem::path dir = e.frames_dir;
        if (!base.empty()) {
            const auto rel = dir.lexically_relative(base);
            if (!rel.empty() && *rel.begin() != "..") dir = rel;
        }
        nlohmann::ordered_json entry;
        entry["id"] = e.id;
        entry["frames_dir"] = dir.generic_string();
        entry["label"] = e.label;
        doc["entries"].push_back(entry);
    }
    doc["working_size"] = {manifest.working_size.height, manifest.working_size.width};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << doc.dump(2) << '\n';
}

} // namespace kshs
