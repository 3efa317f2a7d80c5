#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "celltrace/volume.hpp"

namespace celltrace {

enum class ChannelRole { cell, vessel, other };

ChannelRole parse_channel_role(const std::string& text);
std::string to_string(ChannelRole role);

struct ChannelSpec {
    int index = 0;
    std::string name;
    ChannelRole role = ChannelRole::other;

    bool operator==(const ChannelSpec&) const = default;
};

/// Validated description of a 5-D experiment: one multi-page TIFF per (t, channel).
struct ExperimentManifest {
    VoxelSpacing spacing;
    double frame_interval_min = 0.0;
    Dims dims;
    std::vector<ChannelSpec> channels;
    /// Absolute (or manifest-relative resolved) path per (t, channel index).
    std::map<std::pair<int, int>, std::filesystem::path> frames;
    int t_count = 0;

    const ChannelSpec& channel(int index) const;
    bool has_channel(int index) const;
    /// First channel with the given role, or -1.
    int first_channel_with_role(ChannelRole role) const;
    const std::filesystem::path& frame_path(int t, int channel) const;
};

/// Parses and validates a manifest; every referenced TIFF must exist and match `dims`.
ExperimentManifest load_manifest(const std::filesystem::path& path);

/// Parses a manifest from JSON text. Relative frame paths resolve against `base_dir`.
/// When `check_files` is set the referenced images are opened and their dimensions checked.
ExperimentManifest parse_manifest(const std::string& json_text,
                                  const std::filesystem::path& base_dir, bool check_files = true);

/// Serializes with frame paths written relative to `base_dir` when possible.
std::string manifest_to_json(const ExperimentManifest& manifest,
                             const std::filesystem::path& base_dir);

void save_manifest(const ExperimentManifest& manifest, const std::filesystem::path& path);

VoxelGrid load_frame(const ExperimentManifest& manifest, int t, int channel);

}  // namespace celltrace
