#pragma once

#include "kshs/frames.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kshs {

struct ManifestEntry {
    std::string id;
    std::filesystem::path frames_dir;
    std::string label;
};

/// JSON document {entries: [{id, frames_dir, label}], working_size: [H, W]}.
/// Relative frame directories are resolved against the manifest's folder on load.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    WorkingSize working_size;

    /// Throws InvalidArgument on duplicate or empty ids.
    void validate() const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
/// Frame directories are written relative to the manifest folder when they lie inside it.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

} // namespace kshs
