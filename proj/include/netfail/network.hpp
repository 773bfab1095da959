#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netfail/composition.hpp"
#include "netfail/failure_class.hpp"
#include "netfail/hmm.hpp"

namespace netfail {

enum class LinkMode { corrupting, dropping, mixed };

// Failure annotation of one communication link. A shared physical link
// may behave differently on different paths; `path_overrides` replaces
// the class for the named paths. Mixed links carry a second class for
// the packet-dropping half and are rewritten by split_mixed_links before
// any derivation.
struct LinkSpec {
    LinkMode mode = LinkMode::corrupting;
    FailureClass cls = Ideal{};
    std::optional<FailureClass> drop_cls;
    std::optional<std::string> independence_group;
    std::map<std::string, FailureClass> path_overrides;  // path id -> class
    std::optional<HmmSpec> hmm;                          // generative model for Gamma links
};

using Edge = std::pair<std::string, std::string>;

struct Path {
    std::vector<std::string> nodes;

    std::size_t length() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    Edge edge(std::size_t j) const { return {nodes[j], nodes[j + 1]}; }
    std::string id() const;
};

struct NetworkGraph {
    std::string name;  // "G" or "Gt"; prefixes process stream names
    std::vector<std::string> nodes;
    std::map<Edge, LinkSpec> edges;
    std::string source;
    std::string sink;
    std::set<std::string> dead_paths;  // path ids disabled by routing

    bool has_node(const std::string& v) const;
    // Throws on unknown endpoints, cycles, or a missing source->sink path.
    void validate_structure() const;
};

// All simple source->sink paths in lexicographic node-sequence order.
// Throws if the graph admits more than `cap` paths.
std::vector<Path> enumerate_paths(const NetworkGraph& g, std::size_t cap = 10000);

// Rewrites every mixed link (v,w) into a packet-dropping link (v,v')plus
// a data-corrupting link (v',w) through a fresh synthetic node. Identity
// on graphs without mixed links.
NetworkGraph split_mixed_links(const NetworkGraph& g);

// Failure class of one path. Purely data-corrupting paths use the serial
// OR fold (tight Gamma rules available under declared independence); any
// packet-dropping link switches the whole path to the re-indexed
// link-by-link bound sum.
CompositionResult derive_path_class(const NetworkGraph& g, const Path& path);

struct NetworkBound {
    CompositionResult network;  // AND fold over the per-path classes
    std::vector<Path> paths;
    std::vector<CompositionResult> per_path;
};

NetworkBound derive_network_class(const NetworkGraph& g);

// Round-trip exchange bound: the control-side network is exercised only
// for packets that crossed the plant-side network, so the bounds add.
struct RoundTripBound {
    FailureClass cls;
    bool saturated = false;  // bound sum exceeded 1
};

RoundTripBound derive_round_trip(const NetworkBound& g, const NetworkBound& gt);

// Largest uniform per-link bound rho_bar such that the round-trip bound
// stays within rho_star when every link carries rho_bar.
double budget_allocation(const NetworkGraph& g, const NetworkGraph& gt, double rho_star);

}  // namespace netfail
