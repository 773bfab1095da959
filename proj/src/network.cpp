#include "netfail/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace netfail {

namespace {

std::map<std::string, std::vector<std::string>> sorted_adjacency(const NetworkGraph& g) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [edge, spec] : g.edges) adj[edge.first].push_back(edge.second);
    for (auto& [v, out] : adj) std::sort(out.begin(), out.end());
    return adj;
}

}  // namespace

std::string Path::id() const {
    std::string s;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i) s += '>';
        s += nodes[i];
    }
    return s;
}

bool NetworkGraph::has_node(const std::string& v) const {
    return std::find(nodes.begin(), nodes.end(), v) != nodes.end();
}

void NetworkGraph::validate_structure() const {
    if (!has_node(source)) throw std::invalid_argument(name + ": unknown source node " + source);
    if (!has_node(sink)) throw std::invalid_argument(name + ": unknown sink node " + sink);
    if (source == sink) throw std::invalid_argument(name + ": source equals sink");
    for (const auto& [edge, spec] : edges) {
        if (!has_node(edge.first) || !has_node(edge.second))
            throw std::invalid_argument(name + ": edge (" + edge.first + "," + edge.second +
                                        ") references unknown node");
        if (edge.first == edge.second)
            throw std::invalid_argument(name + ": self-loop at " + edge.first);
    }

    // Cycle check: DFS coloring over the directed edges.
    auto adj = sorted_adjacency(*this);
    std::map<std::string, int> color;  // 0 unseen, 1 on stack, 2 done
    std::vector<std::pair<std::string, std::size_t>> stack;
    for (const auto& v : nodes) {
        if (color[v] != 0) continue;
        stack.push_back({v, 0});
        color[v] = 1;
        while (!stack.empty()) {
            auto& [u, i] = stack.back();
            const auto& out = adj[u];
            if (i < out.size()) {
                const std::string& w = out[i++];
                if (color[w] == 1)
                    throw std::invalid_argument(name + ": graph contains a cycle through " + w);
                if (color[w] == 0) {
                    color[w] = 1;
                    stack.push_back({w, 0});
                }
            } else {
                color[u] = 2;
                stack.pop_back();
            }
        }
    }

    // Reachability source -> sink.
    std::set<std::string> seen{source};
    std::vector<std::string> frontier{source};
    while (!frontier.empty()) {
        std::string u = frontier.back();
        frontier.pop_back();
        for (const auto& w : adj[u])
            if (seen.insert(w).second) frontier.push_back(w);
    }
    if (!seen.count(sink))
        throw std::invalid_argument(name + ": no directed path from " + source + " to " + sink);
}

std::vector<Path> enumerate_paths(const NetworkGraph& g, std::size_t cap) {
    auto adj = sorted_adjacency(g);
    std::vector<Path> result;
    std::vector<std::string> current{g.source};

    // Iterative DFS with sorted neighbours yields lexicographic order.
    // A DAG has no cycles, so every walk is a simple path.
    std::vector<std::size_t> pos{0};
    while (!pos.empty()) {
        if (current.size() > g.nodes.size())
            throw std::runtime_error(g.name + ": walk longer than the node count (cycle?)");
        const std::string& u = current.back();
        const auto& out = adj[u];
        if (u == g.sink) {
            result.push_back(Path{current});
            if (result.size() > cap)
                throw std::runtime_error(g.name + ": more than " + std::to_string(cap) +
                                         " paths; refusing to enumerate");
            current.pop_back();
            pos.pop_back();
            continue;
        }
        if (pos.back() < out.size()) {
            const std::string& w = out[pos.back()++];
            current.push_back(w);
            pos.push_back(0);
        } else {
            current.pop_back();
            pos.pop_back();
        }
    }
    if (result.empty()) throw std::runtime_error(g.name + ": no source->sink path");
    return result;
}

NetworkGraph split_mixed_links(const NetworkGraph& g) {
    bool any = false;
    for (const auto& [edge, spec] : g.edges)
        if (spec.mode == LinkMode::mixed) any = true;
    if (!any) return g;

    NetworkGraph out = g;
    out.edges.clear();
    for (const auto& [edge, spec] : g.edges) {
        if (spec.mode != LinkMode::mixed) {
            out.edges.emplace(edge, spec);
            continue;
        }
        if (!spec.drop_cls)
            throw std::invalid_argument(g.name + ": mixed link (" + edge.first + "," +
                                        edge.second + ") lacks a dropping class");
        std::string synth = edge.first + "~" + edge.second + "~split";
        if (out.has_node(synth))
            throw std::invalid_argument(g.name + ": synthetic node name collision " + synth);
        out.nodes.push_back(synth);

        LinkSpec drop;
        drop.mode = LinkMode::dropping;
        drop.cls = *spec.drop_cls;
        drop.independence_group = spec.independence_group;

        LinkSpec corrupt;
        corrupt.mode = LinkMode::corrupting;
        corrupt.cls = spec.cls;
        corrupt.independence_group = spec.independence_group;
        corrupt.hmm = spec.hmm;

        out.edges.emplace(Edge{edge.first, synth}, drop);
        out.edges.emplace(Edge{synth, edge.second}, corrupt);
    }
    return out;
}

namespace {

struct ResolvedLink {
    FailureClass cls;
    LinkMode mode;
    GroupSet groups;
};

ResolvedLink resolve_link(const NetworkGraph& g, const Path& path, std::size_t j) {
    Edge e = path.edge(j);
    auto it = g.edges.find(e);
    if (it == g.edges.end())
        throw std::logic_error(g.name + ": path uses unknown edge (" + e.first + "," + e.second + ")");
    const LinkSpec& spec = it->second;
    if (spec.mode == LinkMode::mixed)
        throw std::logic_error(g.name + ": mixed link must be split before derivation");
    FailureClass cls = spec.cls;
    auto ov = spec.path_overrides.find(path.id());
    if (ov != spec.path_overrides.end()) cls = ov->second;
    AnnotatedProcess ap{cls, spec.independence_group};
    return ResolvedLink{cls, spec.mode, GroupSet::of(ap)};
}

}  // namespace

CompositionResult derive_path_class(const NetworkGraph& g, const Path& path) {
    if (path.length() == 0) throw std::invalid_argument("empty path");
    std::vector<ResolvedLink> links;
    links.reserve(path.length());
    bool any_dropping = false;
    for (std::size_t j = 0; j < path.length(); ++j) {
        links.push_back(resolve_link(g, path, j));
        if (links.back().mode == LinkMode::dropping) any_dropping = true;
    }

    if (!any_dropping) {
        std::vector<std::pair<FailureClass, GroupSet>> ops;
        ops.reserve(links.size());
        for (const auto& l : links) ops.emplace_back(l.cls, l.groups);
        return compose_tagged(ops, FoldKind::Or);
    }

    // A dropping link re-indexes every downstream packet counter, which
    // breaks the hidden-Markov structure along the path; only the
    // link-by-link bound sum is available.
    CompositionResult res;
    res.cls = links[0].cls;
    res.groups = links[0].groups;
    for (std::size_t j = 1; j < links.size(); ++j) {
        FailureClass out = apply_rule(Rule::DropRecursion, res.cls, links[j].cls);
        res.derivation.push_back(DerivationStep{Rule::DropRecursion, res.cls, links[j].cls, out,
                                                j == 1 ? "packet-dropping path" : ""});
        res.cls = out;
        res.groups.merge(links[j].groups);
    }
    if (res.derivation.empty()) {
        FailureClass out = apply_rule(Rule::DropRecursion, res.cls, Lambda{0.0, Openness::closed});
        res.derivation.push_back(DerivationStep{Rule::DropRecursion, res.cls,
                                                Lambda{0.0, Openness::closed}, out,
                                                "single-link packet-dropping path"});
        res.cls = out;
    }
    res.rule_applied = Rule::DropRecursion;
    return res;
}

NetworkBound derive_network_class(const NetworkGraph& raw) {
    raw.validate_structure();
    NetworkGraph g = split_mixed_links(raw);
    NetworkBound bound;
    bound.paths = enumerate_paths(g);

    std::vector<std::pair<FailureClass, GroupSet>> ops;
    ops.reserve(bound.paths.size());
    for (const auto& path : bound.paths) {
        if (g.dead_paths.count(path.id())) {
            CompositionResult dead;
            dead.cls = Lambda{1.0, Openness::closed};
            dead.rule_applied = Rule::OrSum;
            dead.derivation.push_back(DerivationStep{Rule::OrSum, dead.cls, dead.cls, dead.cls,
                                                     "routing-disabled path"});
            dead.groups = GroupSet::constant();
            bound.per_path.push_back(std::move(dead));
        } else {
            bound.per_path.push_back(derive_path_class(g, path));
        }
        ops.emplace_back(bound.per_path.back().cls, bound.per_path.back().groups);
    }
    bound.network = compose_tagged(ops, FoldKind::And);
    return bound;
}

RoundTripBound derive_round_trip(const NetworkBound& g, const NetworkBound& gt) {
    Lambda a = to_lambda(g.network.cls);
    Lambda b = to_lambda(gt.network.cls);
    double s = a.bound + b.bound;
    if (s > 1.0) return RoundTripBound{Lambda{1.0, Openness::closed}, true};
    Openness o = (a.openness == Openness::open || b.openness == Openness::open)
                     ? Openness::open
                     : Openness::closed;
    if (s == 1.0) o = Openness::closed;
    return RoundTripBound{Lambda{s, o}, false};
}

double budget_allocation(const NetworkGraph& g, const NetworkGraph& gt, double rho_star) {
    if (!(rho_star > 0.0 && rho_star <= 1.0))
        throw std::invalid_argument("budget_allocation: rho_star must lie in (0,1]");
    auto min_len = [](const NetworkGraph& net) {
        NetworkGraph split = split_mixed_links(net);
        std::size_t best = SIZE_MAX;
        for (const auto& p : enumerate_paths(split)) best = std::min(best, p.length());
        return best;
    };
    std::size_t total = min_len(g) + min_len(gt);
    return rho_star / static_cast<double>(total);
}

}  // namespace netfail
