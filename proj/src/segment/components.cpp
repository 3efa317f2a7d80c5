#include <algorithm>

#include "celltrace/segment.hpp"

namespace celltrace {

std::vector<std::vector<Index3>> connected_components(const Mask& mask) {
    std::vector<std::uint8_t> visited(mask.size(), 0);
    std::vector<std::vector<Index3>> components;
    std::vector<std::size_t> stack;

    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (!mask[start] || visited[start]) continue;
        std::vector<Index3> voxels;
        visited[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t n = stack.back();
            stack.pop_back();
            const Index3 v = mask.index_of(n);
            voxels.push_back(v);
            for (int c = -1; c <= 1; ++c) {
                for (int b = -1; b <= 1; ++b) {
                    for (int a = -1; a <= 1; ++a) {
                        if (a == 0 && b == 0 && c == 0) continue;
                        if (!mask.contains(v.i + a, v.j + b, v.k + c)) continue;
                        const std::size_t m = mask.linear(static_cast<std::size_t>(v.i + a),
                                                          static_cast<std::size_t>(v.j + b),
                                                          static_cast<std::size_t>(v.k + c));
                        if (mask[m] && !visited[m]) {
                            visited[m] = 1;
                            stack.push_back(m);
                        }
                    }
                }
            }
        }
        std::sort(voxels.begin(), voxels.end(), scan_less);
        components.push_back(std::move(voxels));
    }
    return components;
}

}  // namespace celltrace
