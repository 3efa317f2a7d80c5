#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "celltrace/manifest.hpp"
#include "celltrace/volume.hpp"

namespace celltrace {

/// Half-open voxel box [lo, hi).
struct Box {
    Index3 lo;
    Index3 hi;

    bool empty() const { return hi.i <= lo.i || hi.j <= lo.j || hi.k <= lo.k; }
    std::int64_t volume() const {
        return empty() ? 0 : (hi.i - lo.i) * (hi.j - lo.j) * (hi.k - lo.k);
    }
};

Box intersect(const Box& a, const Box& b);

inline Index3 operator+(Index3 a, Index3 b) { return {a.i + b.i, a.j + b.j, a.k + b.k}; }
inline Index3 operator-(Index3 a, Index3 b) { return {a.i - b.i, a.j - b.j, a.k - b.k}; }
inline Index3 operator-(Index3 a) { return {-a.i, -a.j, -a.k}; }

struct Tile {
    int id = 0;
    /// Microscope-reported placement in voxels relative to the montage origin.
    Index3 stage_position;
    /// Channel index to grid; all grids share dims and spacing.
    std::map<int, VoxelGrid> grids;

    const Dims& dims() const;
    Box stage_box() const;
};

struct OverlapEdge {
    int tile_a = 0;
    int tile_b = 0;
    /// Correction of b relative to its stage-predicted placement with respect to a.
    Index3 best_offset;
    double score = 0.0;
    /// Voxel count of the stage-predicted overlap.
    std::int64_t stage_overlap_voxels = 0;
};

struct MontageSolution {
    int root = 0;
    std::vector<OverlapEdge> tree_edges;
    std::map<int, Index3> final_positions;
};

/// Correlation coefficient of two equally shaped blocks (normalized covariance divided
/// by the voxel count). Returns 0 when either block is constant.
double normcov(const VoxelGrid& patch_a, const VoxelGrid& patch_b);
double normcov(const RealVolume& patch_a, const RealVolume& patch_b);

/// Exhaustive search over integer offsets in [-window, window]^3 applied to b.
/// Ties: highest score, then smallest squared offset, then lexicographic (dx, dy, dz).
OverlapEdge register_pair(const Tile& a, const Tile& b, int channel, int window);

/// Maximum-weight spanning forest by score (Kruskal; ties by (tile_a, tile_b)).
/// Returns indices into `edges`.
std::vector<std::size_t> max_spanning_tree(const std::vector<OverlapEdge>& edges);

/// Tree selection, root anchoring and delta accumulation over precomputed edges.
/// `stage_positions` lists every tile. Throws ParameterError naming tiles that are not
/// connected to the rest.
MontageSolution solve_from_edges(const std::map<int, Index3>& stage_positions,
                                 const std::vector<OverlapEdge>& edges);

MontageSolution solve_montage(const std::vector<Tile>& tiles, int channel, int window);

struct Composite {
    /// Global voxel position of output voxel (0,0,0).
    Index3 origin;
    std::map<int, VoxelGrid> channels;
};

/// Places every tile at its solved position; overlapping voxels take the maximum.
Composite composite(const std::vector<Tile>& tiles, const MontageSolution& solution);

struct TileSet {
    std::vector<Tile> tiles;
    VoxelSpacing spacing;
    std::vector<ChannelSpec> channels;
    double frame_interval_min = 0.0;
};

/// Reads the tile manifest and every referenced tile image.
TileSet load_tile_set(const std::filesystem::path& path);

/// Registration channel default: first vessel-role channel, else the lowest index.
int default_registration_channel(const TileSet& set);

/// Writes fused_c<index>.tif per channel, manifest.json (single time point) and
/// registration.json (edges, tree, final positions) into `out_dir`.
void write_montage(const TileSet& set, const MontageSolution& solution,
                   const std::vector<OverlapEdge>& all_edges, const std::filesystem::path& out_dir);

/// Every overlapping pair registered; used by solve_montage.
std::vector<OverlapEdge> register_all(const std::vector<Tile>& tiles, int channel, int window);

}  // namespace celltrace
