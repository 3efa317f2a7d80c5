#include "celltrace/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "celltrace/tiff_io.hpp"

namespace celltrace {

using nlohmann::json;

ChannelRole parse_channel_role(const std::string& text) {
    if (text == "cell") return ChannelRole::cell;
    if (text == "vessel") return ChannelRole::vessel;
    if (text == "other") return ChannelRole::other;
    throw ParameterError("unknown channel role '" + text + "'");
}

std::string to_string(ChannelRole role) {
    switch (role) {
        case ChannelRole::cell: return "cell";
        case ChannelRole::vessel: return "vessel";
        case ChannelRole::other: return "other";
    }
    return "other";
}

const ChannelSpec& ExperimentManifest::channel(int index) const {
    for (const auto& c : channels) {
        if (c.index == index) return c;
    }
    throw NotFoundError("channel " + std::to_string(index) + " is not declared");
}

bool ExperimentManifest::has_channel(int index) const {
    for (const auto& c : channels) {
        if (c.index == index) return true;
    }
    return false;
}

int ExperimentManifest::first_channel_with_role(ChannelRole role) const {
    for (const auto& c : channels) {
        if (c.role == role) return c.index;
    }
    return -1;
}

const std::filesystem::path& ExperimentManifest::frame_path(int t, int channel) const {
    if (t < 0 || t >= t_count) {
        throw NotFoundError("frame " + std::to_string(t) + " out of range [0, " +
                            std::to_string(t_count) + ")");
    }
    if (!has_channel(channel)) {
        throw NotFoundError("channel " + std::to_string(channel) + " is not declared");
    }
    return frames.at({t, channel});
}

ExperimentManifest parse_manifest(const std::string& json_text,
                                  const std::filesystem::path& base_dir, bool check_files) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest is not valid JSON: ") + e.what());
    }

    ExperimentManifest m;
    try {
        const auto& s = doc.at("spacing_um");
        if (!s.is_array() || s.size() != 3) throw ParameterError("spacing_um must have 3 entries");
        m.spacing = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
        m.spacing.validate();
        m.frame_interval_min = doc.value("frame_interval_min", 0.0);
        const auto& d = doc.at("dims");
        if (!d.is_array() || d.size() != 3) throw ParameterError("dims must have 3 entries");
        for (const auto& v : d) {
            if (v.get<long long>() <= 0) throw ParameterError("dims must be positive");
        }
        m.dims = {d[0].get<std::size_t>(), d[1].get<std::size_t>(), d[2].get<std::size_t>()};

        std::set<int> indices;
        for (const auto& c : doc.at("channels")) {
            ChannelSpec spec;
            spec.index = c.at("index").get<int>();
            spec.name = c.value("name", "channel" + std::to_string(spec.index));
            spec.role = parse_channel_role(c.value("role", std::string("other")));
            if (!indices.insert(spec.index).second) {
                throw ParameterError("duplicate channel index " + std::to_string(spec.index));
            }
            m.channels.push_back(spec);
        }
        if (m.channels.empty()) throw ParameterError("manifest declares no channels");

        int max_t = -1;
        for (const auto& f : doc.at("frames")) {
            const int t = f.at("t").get<int>();
            const int channel = f.at("channel").get<int>();
            if (t < 0) throw ParameterError("negative frame index");
            if (!indices.count(channel)) {
                throw ParameterError("frame references undeclared channel " +
                                     std::to_string(channel));
            }
            std::filesystem::path p = f.at("path").get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            if (!m.frames.emplace(std::make_pair(t, channel), p.lexically_normal()).second) {
                throw ParameterError("duplicate frame entry (t=" + std::to_string(t) +
                                     ", channel=" + std::to_string(channel) + ")");
            }
            max_t = std::max(max_t, t);
        }
        m.t_count = max_t + 1;
        if (doc.contains("t_count")) {
            const int declared = doc["t_count"].get<int>();
            if (declared != m.t_count) {
                throw ParameterError("t_count " + std::to_string(declared) +
                                     " disagrees with frame entries");
            }
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }

    if (m.t_count < 1) throw ParameterError("manifest has no frames");
    for (int t = 0; t < m.t_count; ++t) {
        for (const auto& c : m.channels) {
            if (!m.frames.count({t, c.index})) {
                throw ParameterError("missing frame entry (t=" + std::to_string(t) +
                                     ", channel=" + std::to_string(c.index) + ")");
            }
        }
    }

    if (check_files) {
        for (const auto& [key, path] : m.frames) {
            if (!std::filesystem::exists(path)) {
                throw IoError("missing image file: " + path.string());
            }
            const TiffInfo info = probe_tiff(path);
            if (info.dims != m.dims) {
                std::ostringstream msg;
                msg << "dimension mismatch in " << path.string() << ": image is " << info.dims.nx
                    << "x" << info.dims.ny << "x" << info.dims.nz << ", manifest declares "
                    << m.dims.nx << "x" << m.dims.ny << "x" << m.dims.nz;
                throw IoError(msg.str());
            }
        }
    }
    return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("missing manifest file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str(), std::filesystem::absolute(path).parent_path());
}

std::string manifest_to_json(const ExperimentManifest& m, const std::filesystem::path& base_dir) {
    json doc;
    doc["spacing_um"] = {m.spacing.dx, m.spacing.dy, m.spacing.dz};
    doc["frame_interval_min"] = m.frame_interval_min;
    doc["dims"] = {m.dims.nx, m.dims.ny, m.dims.nz};
    doc["t_count"] = m.t_count;
    json channels = json::array();
    for (const auto& c : m.channels) {
        channels.push_back({{"index", c.index}, {"name", c.name}, {"role", to_string(c.role)}});
    }
    doc["channels"] = channels;
    json frames = json::array();
    for (const auto& [key, path] : m.frames) {
        std::filesystem::path p = path;
        if (!base_dir.empty()) {
            const auto rel = path.lexically_relative(base_dir);
            if (!rel.empty() && *rel.begin() != "..") p = rel;
        }
        frames.push_back({{"t", key.first}, {"channel", key.second}, {"path", p.generic_string()}});
    }
    doc["frames"] = frames;
    return doc.dump(2) + "\n";
}

void save_manifest(const ExperimentManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << manifest_to_json(manifest, std::filesystem::absolute(path).parent_path());
}

VoxelGrid load_frame(const ExperimentManifest& manifest, int t, int channel) {
    const auto& path = manifest.frame_path(t, channel);
    VoxelGrid raw = read_tiff(path);
    if (raw.dims() != manifest.dims) {
        throw IoError("image dimensions of " + path.string() + " do not match the manifest");
    }
    return VoxelGrid(raw.dims(), manifest.spacing, std::move(raw.storage()));
}

}  // namespace celltrace
