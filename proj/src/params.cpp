#include "matchcon/params.hpp"

#include <numeric>
#include <vector>

namespace matchcon {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0)) {
        throw ParameterError(std::string(name) + " must be positive");
    }
}

} // namespace

void ConverterParams::validate() const {
    require_positive(eta, "eta");
    require_positive(c_dc, "c_dc");
    require_positive(k_p, "k_p");
    require_positive(r_filter, "r_filter");
    require_positive(l_filter, "l_filter");
    require_positive(c_filter, "c_filter");
    require_positive(g_load, "g_load");
    require_positive(v_dc_star, "v_dc_star");
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw ParameterError("mu out of [0,1]");
    }
}

void LineParams::validate() const {
    require_positive(r_line, "r_line");
    require_positive(l_line, "l_line");
}

void Topology::validate() const {
    if (n <= 0) {
        throw TopologyError("node count must be positive");
    }
    for (const auto& [i, j] : edges) {
        if (i < 0 || i >= n || j < 0 || j >= n) {
            throw TopologyError("edge endpoint out of range");
        }
        if (i == j) {
            throw TopologyError("self-loop edge");
        }
    }
    // union-find connectivity
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (const auto& [i, j] : edges) {
        parent[find(i)] = find(j);
    }
    for (int k = 1; k < n; ++k) {
        if (find(k) != find(0)) {
            throw TopologyError("graph is disconnected");
        }
    }
}

} // namespace matchcon
