#include "netfail/config.hpp"

#include <fstream>
#include <sstream>

#include "netfail/format.hpp"

namespace netfail {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::string msg = "config: " + std::to_string(errors.size()) + " error(s)";
    for (const auto& e : errors) msg += "\n  - " + e;
    return msg;
}

// Collects every violation instead of stopping at the first one.
struct Collector {
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

    const json* object(const json& j, const std::string& path, const char* key, bool required) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return nullptr;
        }
        if (!j.at(key).is_object()) {
            fail(path + "." + key, "must be an object");
            return nullptr;
        }
        return &j.at(key);
    }

    const json* array(const json& j, const std::string& path, const char* key, bool required) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return nullptr;
        }
        if (!j.at(key).is_array()) {
            fail(path + "." + key, "must be an array");
            return nullptr;
        }
        return &j.at(key);
    }

    bool number(const json& j, const std::string& path, const char* key, bool required,
                double& out) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return false;
        }
        if (!j.at(key).is_number()) {
            fail(path + "." + key, "must be a number");
            return false;
        }
        out = j.at(key).get<double>();
        return true;
    }

    bool string(const json& j, const std::string& path, const char* key, bool required,
                std::string& out) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return false;
        }
        if (!j.at(key).is_string()) {
            fail(path + "." + key, "must be a string");
            return false;
        }
        out = j.at(key).get<std::string>();
        return true;
    }

    bool boolean(const json& j, const std::string& path, const char* key, bool required,
                 bool& out) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return false;
        }
        if (!j.at(key).is_boolean()) {
            fail(path + "." + key, "must be a boolean");
            return false;
        }
        out = j.at(key).get<bool>();
        return true;
    }
};

Eigen::MatrixXd parse_matrix(Collector& c, const json& j, const std::string& path) {
    double rows = 0, cols = 0;
    bool ok = c.number(j, path, "rows", true, rows) & c.number(j, path, "cols", true, cols);
    const json* data = c.array(j, path, "data", true);
    if (!ok || !data) return Eigen::MatrixXd();
    int r = static_cast<int>(rows), cl = static_cast<int>(cols);
    if (r <= 0 || cl <= 0) {
        c.fail(path, "dimensions must be positive");
        return Eigen::MatrixXd();
    }
    if (static_cast<int>(data->size()) != r * cl) {
        c.fail(path + ".data", "expected " + std::to_string(r * cl) + " row-major entries");
        return Eigen::MatrixXd();
    }
    Eigen::MatrixXd M(r, cl);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < cl; ++k) {
            const json& v = (*data)[static_cast<std::size_t>(i * cl + k)];
            if (!v.is_number()) {
                c.fail(path + ".data", "entries must be numbers");
                return Eigen::MatrixXd();
            }
            M(i, k) = v.get<double>();
        }
    return M;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json j;
    j["rows"] = M.rows();
    j["cols"] = M.cols();
    json data = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index k = 0; k < M.cols(); ++k) data.push_back(M(i, k));
    j["data"] = data;
    return j;
}

FailureClass parse_class(Collector& c, const json& j, const std::string& path) {
    std::string type;
    if (!c.string(j, path, "type", true, type)) return Ideal{};
    try {
        if (type == "ideal") return make_ideal();
        if (type == "lambda") {
            double rho = 0;
            bool open = false;
            c.number(j, path, "rho", true, rho);
            c.boolean(j, path, "open", false, open);
            return make_lambda(rho, open ? Openness::open : Openness::closed);
        }
        if (type == "gamma") {
            double p0 = 0, p1 = 0;
            c.number(j, path, "p0", true, p0);
            c.number(j, path, "p1", true, p1);
            return make_gamma(p0, p1);
        }
        if (type == "pi") {
            double kappa = 0, w = 0;
            c.number(j, path, "kappa", true, kappa);
            c.number(j, path, "w", true, w);
            return make_pi(kappa, w);
        }
        c.fail(path + ".type", "unknown class type '" + type + "'");
    } catch (const std::invalid_argument& e) {
        c.fail(path, e.what());
    }
    return Ideal{};
}

json class_to_json(const FailureClass& cls) {
    json j;
    if (std::holds_alternative<Ideal>(cls)) {
        j["type"] = "ideal";
    } else if (const auto* l = std::get_if<Lambda>(&cls)) {
        j["type"] = "lambda";
        j["rho"] = l->bound;
        j["open"] = l->openness == Openness::open;
    } else if (const auto* g = std::get_if<Gamma>(&cls)) {
        j["type"] = "gamma";
        j["p0"] = g->p0;
        j["p1"] = g->p1;
    } else {
        const auto& p = std::get<Pi>(cls);
        j["type"] = "pi";
        j["kappa"] = p.kappa;
        j["w"] = p.w;
    }
    return j;
}

TransitionExpr parse_expr(Collector& c, const json& j, const std::string& path) {
    TransitionExpr e;
    std::string kind;
    if (!c.string(j, path, "kind", true, kind)) return e;
    if (kind == "const") {
        e.kind = TransitionExpr::Kind::constant;
        c.number(j, path, "c", true, e.c);
    } else if (kind == "cos2" || kind == "sin2") {
        e.kind = kind == "cos2" ? TransitionExpr::Kind::cos2 : TransitionExpr::Kind::sin2;
        c.number(j, path, "c", true, e.c);
        c.number(j, path, "a", true, e.a);
        c.number(j, path, "f", true, e.f);
    } else {
        c.fail(path + ".kind", "unknown expression kind '" + kind + "'");
    }
    return e;
}

json expr_to_json(const TransitionExpr& e) {
    json j;
    switch (e.kind) {
        case TransitionExpr::Kind::constant:
            j["kind"] = "const";
            j["c"] = e.c;
            return j;
        case TransitionExpr::Kind::cos2: j["kind"] = "cos2"; break;
        case TransitionExpr::Kind::sin2: j["kind"] = "sin2"; break;
    }
    j["c"] = e.c;
    j["a"] = e.a;
    j["f"] = e.f;
    return j;
}

HmmSpec parse_hmm(Collector& c, const json& j, const std::string& path) {
    HmmSpec spec;
    if (const json* init = c.array(j, path, "initial", true)) {
        for (const auto& v : *init) {
            if (!v.is_number()) {
                c.fail(path + ".initial", "entries must be numbers");
                break;
            }
            spec.initial.push_back(v.get<double>());
        }
    }
    if (const json* out = c.array(j, path, "output", true)) {
        for (const auto& v : *out) {
            if (!v.is_number_integer()) {
                c.fail(path + ".output", "entries must be integers");
                break;
            }
            spec.output.push_back(v.get<int>());
        }
    }
    if (const json* rows = c.array(j, path, "rows", true)) {
        for (std::size_t q = 0; q < rows->size(); ++q) {
            const json& row = (*rows)[q];
            std::string rp = path + ".rows[" + std::to_string(q) + "]";
            if (!row.is_array()) {
                c.fail(rp, "must be an array");
                continue;
            }
            std::vector<TransitionExpr> exprs;
            for (std::size_t r = 0; r < row.size(); ++r) {
                const json& cell = row[r];
                std::string cp = rp + "[" + std::to_string(r) + "]";
                if (!cell.is_object()) {
                    c.fail(cp, "must be an object");
                    continue;
                }
                exprs.push_back(parse_expr(c, cell, cp));
            }
            spec.rows.push_back(std::move(exprs));
        }
    }
    return spec;
}

json hmm_to_json(const HmmSpec& spec) {
    json j;
    j["initial"] = spec.initial;
    j["output"] = spec.output;
    json rows = json::array();
    for (const auto& row : spec.rows) {
        json r = json::array();
        for (const auto& e : row) r.push_back(expr_to_json(e));
        rows.push_back(r);
    }
    j["rows"] = rows;
    return j;
}

NetworkGraph parse_network(Collector& c, const json& j, const std::string& path,
                           const std::string& name) {
    NetworkGraph g;
    g.name = name;
    c.string(j, path, "source", true, g.source);
    c.string(j, path, "sink", true, g.sink);
    if (const json* nodes = c.array(j, path, "nodes", true)) {
        for (const auto& v : *nodes) {
            if (!v.is_string()) {
                c.fail(path + ".nodes", "entries must be strings");
                break;
            }
            g.nodes.push_back(v.get<std::string>());
        }
        for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i)
            for (std::size_t k = i + 1; k < g.nodes.size(); ++k)
                if (g.nodes[i] == g.nodes[k]) c.fail(path + ".nodes", "duplicate node " + g.nodes[i]);
    }
    if (const json* edges = c.array(j, path, "edges", true)) {
        for (std::size_t i = 0; i < edges->size(); ++i) {
            const json& je = (*edges)[i];
            std::string ep = path + ".edges[" + std::to_string(i) + "]";
            if (!je.is_object()) {
                c.fail(ep, "must be an object");
                continue;
            }
            std::string from, to, mode = "corrupting";
            c.string(je, ep, "from", true, from);
            c.string(je, ep, "to", true, to);
            c.string(je, ep, "mode", false, mode);
            LinkSpec spec;
            if (mode == "corrupting") {
                spec.mode = LinkMode::corrupting;
            } else if (mode == "dropping") {
                spec.mode = LinkMode::dropping;
            } else if (mode == "mixed") {
                spec.mode = LinkMode::mixed;
            } else {
                c.fail(ep + ".mode", "must be corrupting|dropping|mixed");
            }
            if (const json* cls = c.object(je, ep, "class", true))
                spec.cls = parse_class(c, *cls, ep + ".class");
            if (spec.mode == LinkMode::mixed) {
                if (const json* d = c.object(je, ep, "dropping_class", true))
                    spec.drop_cls = parse_class(c, *d, ep + ".dropping_class");
            }
            std::string group;
            if (c.string(je, ep, "independence_group", false, group))
                spec.independence_group = group;
            if (je.contains("hmm")) {
                if (const json* h = c.object(je, ep, "hmm", false))
                    spec.hmm = parse_hmm(c, *h, ep + ".hmm");
            }
            if (je.contains("overrides")) {
                if (const json* ovs = c.array(je, ep, "overrides", false)) {
                    for (std::size_t k = 0; k < ovs->size(); ++k) {
                        const json& ov = (*ovs)[k];
                        std::string op = ep + ".overrides[" + std::to_string(k) + "]";
                        if (!ov.is_object()) {
                            c.fail(op, "must be an object");
                            continue;
                        }
                        std::string pid;
                        c.string(ov, op, "path", true, pid);
                        if (const json* cls = c.object(ov, op, "class", true))
                            spec.path_overrides[pid] = parse_class(c, *cls, op + ".class");
                    }
                }
            }
            if (from.empty() || to.empty()) continue;
            if (!g.nodes.empty()) {
                if (!g.has_node(from)) c.fail(ep, "unknown node " + from);
                if (!g.has_node(to)) c.fail(ep, "unknown node " + to);
                if (!g.has_node(from) || !g.has_node(to)) continue;
            }
            if (g.edges.count({from, to})) {
                c.fail(ep, "duplicate edge (" + from + "," + to + ")");
                continue;
            }
            g.edges.emplace(Edge{from, to}, std::move(spec));
        }
    }
    if (j.contains("dead_paths")) {
        if (const json* dead = c.array(j, path, "dead_paths", false)) {
            for (const auto& v : *dead) {
                if (!v.is_string()) {
                    c.fail(path + ".dead_paths", "entries must be strings");
                    break;
                }
                g.dead_paths.insert(v.get<std::string>());
            }
        }
    }
    return g;
}

json network_to_json(const NetworkGraph& g) {
    json j;
    j["source"] = g.source;
    j["sink"] = g.sink;
    j["nodes"] = g.nodes;
    json edges = json::array();
    for (const auto& [edge, spec] : g.edges) {
        json je;
        je["from"] = edge.first;
        je["to"] = edge.second;
        switch (spec.mode) {
            case LinkMode::corrupting: je["mode"] = "corrupting"; break;
            case LinkMode::dropping: je["mode"] = "dropping"; break;
            case LinkMode::mixed: je["mode"] = "mixed"; break;
        }
        je["class"] = class_to_json(spec.cls);
        if (spec.drop_cls) je["dropping_class"] = class_to_json(*spec.drop_cls);
        if (spec.independence_group) je["independence_group"] = *spec.independence_group;
        if (spec.hmm) je["hmm"] = hmm_to_json(*spec.hmm);
        if (!spec.path_overrides.empty()) {
            json ovs = json::array();
            for (const auto& [pid, cls] : spec.path_overrides) {
                json ov;
                ov["path"] = pid;
                ov["class"] = class_to_json(cls);
                ovs.push_back(ov);
            }
            je["overrides"] = ovs;
        }
        edges.push_back(je);
    }
    j["edges"] = edges;
    if (!g.dead_paths.empty()) j["dead_paths"] = g.dead_paths;
    return j;
}

// Checks that need the split graph: path references and generative specs.
void validate_network_semantics(Collector& c, NetworkGraph& g, const std::string& path) {
    try {
        g.validate_structure();
    } catch (const std::exception& e) {
        c.fail(path, e.what());
        return;
    }
    g = split_mixed_links(g);
    std::vector<Path> paths;
    try {
        paths = enumerate_paths(g);
    } catch (const std::exception& e) {
        c.fail(path, e.what());
        return;
    }
    std::set<std::string> ids;
    for (const auto& p : paths) ids.insert(p.id());
    for (const auto& dead : g.dead_paths)
        if (!ids.count(dead)) c.fail(path + ".dead_paths", "no such path " + dead);
    for (const auto& [edge, spec] : g.edges) {
        std::string ep = path + ".edges(" + edge.first + "," + edge.second + ")";
        for (const auto& [pid, cls] : spec.path_overrides) {
            if (!ids.count(pid)) {
                c.fail(ep, "override names unknown path " + pid);
                continue;
            }
            bool on_path = false;
            for (const auto& p : paths) {
                if (p.id() != pid) continue;
                for (std::size_t jj = 0; jj < p.length(); ++jj)
                    if (p.edge(jj) == edge) on_path = true;
            }
            if (!on_path) c.fail(ep, "override path " + pid + " does not use this edge");
        }
        if (spec.hmm) {
            try {
                spec.hmm->validate();
            } catch (const std::exception& e) {
                c.fail(ep + ".hmm", e.what());
                continue;
            }
            if (const auto* gm = std::get_if<Gamma>(&spec.cls)) {
                if (!spec.hmm->within_gamma(gm->p0, gm->p1))
                    c.fail(ep + ".hmm", "sampled transition masses violate the declared gamma bounds");
            }
        }
    }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

ExperimentConfig config_from_json(const json& j) {
    Collector c;
    ExperimentConfig cfg;

    if (!j.is_object()) throw ConfigError({"document: must be a JSON object"});
    double sv = 0;
    if (c.number(j, "document", "schema_version", true, sv)) {
        cfg.schema_version = static_cast<int>(sv);
        if (cfg.schema_version != 1) c.fail("schema_version", "unsupported version");
    }

    if (const json* plant = c.object(j, "document", "plant", true)) {
        if (const json* A = c.object(*plant, "plant", "A", true))
            cfg.plant.A = parse_matrix(c, *A, "plant.A");
        if (const json* B = c.object(*plant, "plant", "B", true))
            cfg.plant.B = parse_matrix(c, *B, "plant.B");
        if (const json* K = c.object(*plant, "plant", "K", true))
            cfg.plant.K = parse_matrix(c, *K, "plant.K");
        if (cfg.plant.A.size() > 0 && cfg.plant.B.size() > 0 && cfg.plant.K.size() > 0) {
            try {
                cfg.plant.validate();
            } catch (const std::exception& e) {
                c.fail("plant", e.what());
            }
        }
    }

    bool g_ok = false, gt_ok = false;
    if (const json* net = c.object(j, "document", "network_G", true)) {
        std::size_t before = c.errors.size();
        cfg.g = parse_network(c, *net, "network_G", "G");
        g_ok = c.errors.size() == before;
    }
    if (const json* net = c.object(j, "document", "network_Gt", true)) {
        std::size_t before = c.errors.size();
        cfg.gt = parse_network(c, *net, "network_Gt", "Gt");
        gt_ok = c.errors.size() == before;
    }

    if (j.contains("simulation")) {
        if (const json* sim = c.object(j, "document", "simulation", false)) {
            double v;
            if (c.number(*sim, "simulation", "horizon", false, v)) {
                if (v < 1) c.fail("simulation.horizon", "must be >= 1");
                cfg.simulation.horizon = static_cast<long>(v);
            }
            if (c.number(*sim, "simulation", "trials", false, v)) {
                if (v < 1) c.fail("simulation.trials", "must be >= 1");
                cfg.simulation.trials = static_cast<int>(v);
            }
            if (c.number(*sim, "simulation", "seed", false, v))
                cfg.simulation.seed = static_cast<std::uint64_t>(v);
            if (sim->contains("x0")) {
                if (const json* x0 = c.array(*sim, "simulation", "x0", false)) {
                    for (const auto& e : *x0) {
                        if (!e.is_number()) {
                            c.fail("simulation.x0", "entries must be numbers");
                            break;
                        }
                        cfg.simulation.x0.push_back(e.get<double>());
                    }
                    if (!cfg.simulation.x0.empty() && cfg.plant.A.rows() > 0 &&
                        static_cast<int>(cfg.simulation.x0.size()) != cfg.plant.n())
                        c.fail("simulation.x0", "length must equal the state dimension");
                }
            }
        }
    }

    if (j.contains("attacker")) {
        if (const json* atk = c.object(j, "document", "attacker", false)) {
            double v;
            c.boolean(*atk, "attacker", "enabled", false, cfg.attacker.enabled);
            if (c.number(*atk, "attacker", "kappa", false, v)) {
                if (v < 0) c.fail("attacker.kappa", "must be >= 0");
                cfg.attacker.kappa = v;
            }
            if (c.number(*atk, "attacker", "w", false, v)) {
                if (v < 0 || v > 1) c.fail("attacker.w", "must lie in [0,1]");
                cfg.attacker.w = v;
            }
            if (c.number(*atk, "attacker", "N", false, v)) {
                if (v < 1 || v > 20) c.fail("attacker.N", "must lie in [1,20]");
                cfg.attacker.horizon = static_cast<int>(v);
            }
        }
    }

    if (j.contains("analysis")) {
        if (const json* an = c.object(j, "document", "analysis", false)) {
            double v;
            if (c.number(*an, "analysis", "search_budget", false, v)) {
                if (v < 1) c.fail("analysis.search_budget", "must be >= 1");
                cfg.analysis.search_budget = static_cast<int>(v);
            }
            if (c.number(*an, "analysis", "residual_tol", false, v)) {
                if (v <= 0) c.fail("analysis.residual_tol", "must be > 0");
                cfg.analysis.residual_tol = v;
            }
        }
    }

    if (g_ok) validate_network_semantics(c, cfg.g, "network_G");
    if (gt_ok) validate_network_semantics(c, cfg.gt, "network_Gt");

    if (!c.errors.empty()) throw ConfigError(std::move(c.errors));
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({path + ": cannot open"});
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError({path + ": " + e.what()});
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    json plant;
    plant["A"] = matrix_to_json(c.plant.A);
    plant["B"] = matrix_to_json(c.plant.B);
    plant["K"] = matrix_to_json(c.plant.K);
    j["plant"] = plant;
    j["network_G"] = network_to_json(c.g);
    j["network_Gt"] = network_to_json(c.gt);
    json sim;
    sim["horizon"] = c.simulation.horizon;
    sim["trials"] = c.simulation.trials;
    sim["seed"] = c.simulation.seed;
    if (!c.simulation.x0.empty()) sim["x0"] = c.simulation.x0;
    j["simulation"] = sim;
    json atk;
    atk["enabled"] = c.attacker.enabled;
    atk["kappa"] = c.attacker.kappa;
    atk["w"] = c.attacker.w;
    atk["N"] = c.attacker.horizon;
    j["attacker"] = atk;
    json an;
    an["search_budget"] = c.analysis.search_budget;
    an["residual_tol"] = c.analysis.residual_tol;
    j["analysis"] = an;
    return j;
}

SimulationSetup make_simulation_setup(const ExperimentConfig& c) {
    SimulationSetup s;
    s.plant = c.plant;
    s.g = c.g;
    s.gt = c.gt;
    s.attacker = c.attacker;
    s.horizon = c.simulation.horizon;
    s.trials = c.simulation.trials;
    s.seed = c.simulation.seed;
    if (!c.simulation.x0.empty()) {
        s.x0 = Eigen::VectorXd(static_cast<Eigen::Index>(c.simulation.x0.size()));
        for (std::size_t i = 0; i < c.simulation.x0.size(); ++i)
            s.x0(static_cast<Eigen::Index>(i)) = c.simulation.x0[i];
    }
    return s;
}

std::uint64_t file_fnv1a(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a(ss.str());
}

}  // namespace netfail
