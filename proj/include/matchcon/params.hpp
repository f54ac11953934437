#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace matchcon {

/// Raised when a physical or control parameter violates its domain.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when the network graph is malformed or disconnected.
struct TopologyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Physical and control constants of one converter (identical across nodes).
/// All electrical quantities in p.u.
struct ConverterParams {
    double eta = 0.0;       ///< angle gain, rad/s per volt of DC deviation
    double c_dc = 0.0;      ///< DC-link capacitance
    double k_p = 0.0;       ///< lumped DC gain (conductance + proportional control)
    double mu = 0.0;        ///< modulation amplitude, in [0, 1]
    double r_filter = 0.0;  ///< output filter resistance
    double l_filter = 0.0;  ///< output filter inductance
    double c_filter = 0.0;  ///< output capacitance
    double g_load = 0.0;    ///< load conductance at the output node
    double b_load = 0.0;    ///< shunt reactive susceptance of the local load
    double v_dc_star = 0.0; ///< nominal DC voltage
    double i_dc_star = 0.0; ///< constant DC-side current source

    void validate() const;
};

/// Constants of one interconnecting line (identical across edges), in p.u.
struct LineParams {
    double r_line = 0.0;
    double l_line = 0.0;

    void validate() const;
};

/// Graph structure: n nodes and an ordered list of oriented edges.
struct Topology {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    int edge_count() const { return static_cast<int>(edges.size()); }

    /// Checks index ranges, i != j, and connectivity (when m > 0, the graph
    /// must connect all n nodes; an edgeless single node is allowed).
    void validate() const;
};

} // namespace matchcon
