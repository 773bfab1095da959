#include "netfail/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

namespace netfail {

int attacker_step(const AttackerSpec& spec, const PlantModel& plant, long t,
                  long past_attacks, const Eigen::VectorXd& x) {
    const int N = spec.horizon;
    if (N < 1 || N > 20)
        throw std::invalid_argument("attacker: horizon must lie in [1,20] (exact enumeration)");

    const Eigen::MatrixXd Acl = plant.closed_loop();
    const Eigen::MatrixXd& A = plant.A;
    const double budget_eps = 1e-9;

    std::vector<Eigen::VectorXd> xhat(static_cast<std::size_t>(N) + 1);
    xhat[0] = x;

    double best_obj = -std::numeric_limits<double>::infinity();
    int best_count = N + 1;
    int best_first = 0;
    bool found = false;

    // DFS in lexicographic order (no-attack branch first); prefixes that
    // violate the cumulative budget are pruned with their whole subtree.
    std::function<void(int, int, double, int)> dfs = [&](int depth, int count, double obj,
                                                         int first) {
        if (depth == N) {
            bool better = !found || obj > best_obj ||
                          (obj == best_obj && count < best_count);
            if (better) {
                best_obj = obj;
                best_count = count;
                best_first = first;
                found = true;
            }
            return;
        }
        for (int a = 0; a <= 1; ++a) {
            int next_count = count + a;
            if (a == 1 &&
                static_cast<double>(past_attacks + next_count) >
                    spec.kappa + spec.w * static_cast<double>(t + depth + 1) + budget_eps)
                continue;
            const std::size_t d = static_cast<std::size_t>(depth);
            xhat[d + 1] = (a == 1 ? A : Acl) * xhat[d];
            dfs(depth + 1, next_count, obj + xhat[d + 1].squaredNorm(),
                depth == 0 ? a : first);
        }
    };
    dfs(0, 0, 0.0, 0);
    return best_first;  // the all-zero sequence is always feasible
}

namespace {

struct LinkProcess {
    enum class Kind { const0, const1, hmm, attacker };
    Kind kind = Kind::const0;
    const HmmSpec* hmm = nullptr;
    std::string stream_name;
};

struct PathPlan {
    bool dead = false;
    std::vector<std::size_t> process_of_link;
};

struct NetworkPlan {
    std::vector<PathPlan> paths;
    std::vector<LinkProcess> processes;
    std::map<std::string, std::size_t> by_name;

    std::size_t intern(LinkProcess p) {
        auto it = by_name.find(p.stream_name);
        if (it != by_name.end()) return it->second;
        std::size_t idx = processes.size();
        by_name.emplace(p.stream_name, idx);
        processes.push_back(std::move(p));
        return idx;
    }
};

LinkProcess plan_for_class(const FailureClass& cls, const LinkSpec& spec, bool attacker_enabled,
                           std::string stream_name, const std::string& where) {
    LinkProcess p;
    p.stream_name = std::move(stream_name);
    if (never_fails(cls)) {
        p.kind = LinkProcess::Kind::const0;
    } else if (always_fails(cls)) {
        p.kind = LinkProcess::Kind::const1;
    } else if (std::holds_alternative<Gamma>(cls)) {
        if (!spec.hmm)
            throw std::invalid_argument(where + ": gamma link without an hmm cannot be simulated");
        p.kind = LinkProcess::Kind::hmm;
        p.hmm = &*spec.hmm;
    } else if (std::holds_alternative<Pi>(cls)) {
        // All attack-budget links are driven by the single optimizing
        // attacker; with the attacker disabled they never fire.
        p.kind = attacker_enabled ? LinkProcess::Kind::attacker : LinkProcess::Kind::const0;
        p.stream_name = "attacker";
    } else {
        throw std::invalid_argument(where + ": lambda class has no generative model");
    }
    return p;
}

NetworkPlan build_plan(const NetworkGraph& g, bool attacker_enabled) {
    NetworkPlan plan;
    auto paths = enumerate_paths(g);
    for (const auto& path : paths) {
        PathPlan pp;
        pp.dead = g.dead_paths.count(path.id()) > 0;
        if (!pp.dead) {
            for (std::size_t j = 0; j < path.length(); ++j) {
                Edge e = path.edge(j);
                const LinkSpec& spec = g.edges.at(e);
                if (spec.mode == LinkMode::mixed)
                    throw std::invalid_argument(g.name + ": split mixed links before simulating");
                std::string base = g.name + ":" + e.first + ">" + e.second;
                FailureClass cls = spec.cls;
                std::string stream = base;
                auto ov = spec.path_overrides.find(path.id());
                if (ov != spec.path_overrides.end()) {
                    cls = ov->second;
                    if (!never_fails(cls) && !always_fails(cls))
                        throw std::invalid_argument(
                            g.name + ": per-path override on " + base +
                            " must be constant (ideal or all-fail) for simulation");
                    stream = base + "@" + path.id();
                }
                pp.process_of_link.push_back(
                    plan.intern(plan_for_class(cls, spec, attacker_enabled, stream, base)));
            }
        }
        plan.paths.push_back(std::move(pp));
    }
    return plan;
}

struct HmmSampler {
    const HmmSpec* spec = nullptr;
    SplitMix64 rng{0};
    int state = 0;
    std::vector<double> row;

    void init(const HmmSpec& s, SplitMix64 r) {
        spec = &s;
        rng = r;
        row.assign(static_cast<std::size_t>(s.states()), 0.0);
        state = pick(s.initial, rng.next_double());
    }
    static int pick(const std::vector<double>& weights, double u) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }
    std::uint8_t emit() const { return static_cast<std::uint8_t>(spec->output[state]); }
    void advance(long t) {
        for (int r = 0; r < spec->states(); ++r)
            row[static_cast<std::size_t>(r)] = spec->transition(t, state, r);
        state = pick(row, rng.next_double());
    }
};

}  // namespace

TrialResult run_closed_loop(const SimulationSetup& setup, int trial) {
    setup.plant.validate();
    const int n = setup.plant.n();
    const int m = setup.plant.m();

    NetworkPlan plans[2] = {build_plan(setup.g, setup.attacker.enabled),
                            build_plan(setup.gt, setup.attacker.enabled)};

    // Per-process samplers; substreams are keyed by the stream name, so a
    // config edit elsewhere does not perturb this link's draws.
    std::map<std::string, HmmSampler> samplers;
    bool attacker_used = false;
    for (const auto& plan : plans) {
        for (const auto& proc : plan.processes) {
            if (proc.kind == LinkProcess::Kind::hmm && !samplers.count(proc.stream_name)) {
                HmmSampler s;
                s.init(*proc.hmm,
                       substream(setup.seed, static_cast<std::uint64_t>(trial), proc.stream_name));
                samplers.emplace(proc.stream_name, std::move(s));
            }
            if (proc.kind == LinkProcess::Kind::attacker) attacker_used = true;
        }
    }

    Eigen::VectorXd x = setup.x0.size() == n
                            ? setup.x0
                            : Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));

    TrialResult res;
    res.trial = trial;
    res.initial_norm = x.norm();
    res.x.reserve(static_cast<std::size_t>(setup.horizon) * static_cast<std::size_t>(n));
    for (const auto& plan : plans)
        for (const auto& proc : plan.processes)
            res.link_indicators[proc.stream_name];

    long past_attacks = 0;
    long cum_l = 0, cum_g = 0, cum_gt = 0;
    std::map<std::string, std::uint8_t> current;

    for (long t = 0; t < setup.horizon; ++t) {
        // Attacker decision from the current state; budget is a hard
        // invariant, checked on every prefix.
        std::uint8_t la = 0;
        if (setup.attacker.enabled && attacker_used) {
            la = static_cast<std::uint8_t>(
                attacker_step(setup.attacker, setup.plant, t, past_attacks, x));
            past_attacks += la;
            if (static_cast<double>(past_attacks) >
                setup.attacker.kappa + setup.attacker.w * static_cast<double>(t + 1) + 1e-9)
                throw std::logic_error("attacker violated its own budget");
        }

        current.clear();
        for (const auto& plan : plans) {
            for (const auto& proc : plan.processes) {
                std::uint8_t v = 0;
                switch (proc.kind) {
                    case LinkProcess::Kind::const0: v = 0; break;
                    case LinkProcess::Kind::const1: v = 1; break;
                    case LinkProcess::Kind::attacker: v = la; break;
                    case LinkProcess::Kind::hmm: v = samplers.at(proc.stream_name).emit(); break;
                }
                current[proc.stream_name] = v;
            }
        }

        auto network_indicator = [&](const NetworkPlan& plan) -> std::uint8_t {
            std::uint8_t net = 1;
            for (const auto& pp : plan.paths) {
                std::uint8_t lp = 0;
                if (pp.dead) {
                    lp = 1;
                } else {
                    for (std::size_t idx : pp.process_of_link)
                        lp = static_cast<std::uint8_t>(
                            lp | current[plan.processes[idx].stream_name]);
                }
                net = static_cast<std::uint8_t>(net & lp);
            }
            return net;
        };

        std::uint8_t lg = network_indicator(plans[0]);
        std::uint8_t lgt = network_indicator(plans[1]);
        std::uint8_t l = static_cast<std::uint8_t>(lg | lgt);

        Eigen::VectorXd u = (l == 1) ? Eigen::VectorXd::Zero(m)
                                     : Eigen::VectorXd(setup.plant.K * x);

        for (int i = 0; i < n; ++i) res.x.push_back(x(i));
        for (int i = 0; i < m; ++i) res.u.push_back(u(i));
        res.l.push_back(l);
        res.l_G.push_back(lg);
        res.l_Gt.push_back(lgt);
        res.l_A.push_back(la);
        for (auto& [name, vals] : res.link_indicators) vals.push_back(current[name]);
        cum_l += l;
        cum_g += lg;
        cum_gt += lgt;
        double k = static_cast<double>(t + 1);
        res.ratio_l.push_back(static_cast<double>(cum_l) / k);
        res.ratio_G.push_back(static_cast<double>(cum_g) / k);
        res.ratio_Gt.push_back(static_cast<double>(cum_gt) / k);
        res.steps = t + 1;

        x = setup.plant.A * x + setup.plant.B * u;
        double nx = x.norm();
        res.final_norm = nx;
        if (nx > 1e6 && !res.first_exceed_1e6) res.first_exceed_1e6 = t + 1;
        if (!std::isfinite(nx) || nx > 1e280) {
            res.divergence_step = t + 1;
            break;
        }

        for (auto& [name, sampler] : samplers) sampler.advance(t);
    }
    return res;
}

int thread_cap() {
    if (const char* env = std::getenv("NETFAIL_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<TrialResult> run_trials(const SimulationSetup& setup) {
    std::vector<TrialResult> results(static_cast<std::size_t>(setup.trials));
    int workers = std::min(thread_cap(), setup.trials);
    if (workers <= 1) {
        for (int i = 0; i < setup.trials; ++i) results[static_cast<std::size_t>(i)] =
            run_closed_loop(setup, i);
        return results;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < setup.trials; i = next.fetch_add(1))
                results[static_cast<std::size_t>(i)] = run_closed_loop(setup, i);
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

RatioReport empirical_ratio_report(const std::vector<TrialResult>& traces,
                                   const Lambda& bound_l, const Lambda& bound_g,
                                   const Lambda& bound_gt,
                                   const std::optional<AttackerSpec>& attacker) {
    if (traces.empty()) throw std::invalid_argument("ratio report: no traces");
    RatioReport report;
    auto row = [&](const std::string& name, double bound,
                   const std::function<double(const TrialResult&)>& final_ratio,
                   double slack) {
        ProcessStats st;
        st.name = name;
        st.bound = bound;
        for (const auto& tr : traces)
            st.max_final_ratio = std::max(st.max_final_ratio, final_ratio(tr));
        st.violated = st.max_final_ratio > bound + slack;
        report.rows.push_back(st);
    };
    row("l", bound_l.bound, [](const TrialResult& t) { return t.ratio_l.back(); }, 0.0);
    row("l_G", bound_g.bound, [](const TrialResult& t) { return t.ratio_G.back(); }, 0.0);
    row("l_Gt", bound_gt.bound, [](const TrialResult& t) { return t.ratio_Gt.back(); }, 0.0);
    if (attacker && attacker->enabled) {
        long min_steps = traces.front().steps;
        for (const auto& tr : traces) min_steps = std::min(min_steps, tr.steps);
        row("l_A", attacker->w,
            [](const TrialResult& t) {
                long c = 0;
                for (auto v : t.l_A) c += v;
                return static_cast<double>(c) / static_cast<double>(t.steps);
            },
            attacker->kappa / static_cast<double>(std::max(min_steps, 1L)));
    }
    return report;
}

}  // namespace netfail
