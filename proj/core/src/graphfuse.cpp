#include "hotspot/graphfuse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace hotspot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

// Dinic max-flow on real capacities. Small graphs only; arcs stored in pairs.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t n) : head_(n, -1), level_(n), iter_(n) {}

    int add_arc(std::size_t from, std::size_t to, double cap) {
        const int id = static_cast<int>(arcs_.size());
        arcs_.push_back({to, head_[from], cap});
        head_[from] = id;
        arcs_.push_back({from, head_[to], 0.0});
        head_[to] = id + 1;
        return id;
    }

    // Undirected edge of capacity cap in both directions; returns arc id of from->to.
    int add_edge(std::size_t u, std::size_t v, double cap) {
        const int id = static_cast<int>(arcs_.size());
        arcs_.push_back({v, head_[u], cap});
        head_[u] = id;
        arcs_.push_back({u, head_[v], cap});
        head_[v] = id + 1;
        return id;
    }

    double residual(int arc) const { return arcs_[static_cast<std::size_t>(arc)].cap; }

    double run(std::size_t s, std::size_t t, double eps) {
        double total = 0.0;
        eps_ = eps;
        while (bfs(s, t)) {
            std::copy(head_.begin(), head_.end(), iter_.begin());
            for (double f; (f = dfs(s, t, kInf)) > eps_;) total += f;
        }
        return total;
    }

private:
    struct Arc {
        std::size_t to;
        int next;
        double cap;
    };

    bool bfs(std::size_t s, std::size_t t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<std::size_t> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const auto v = q.front();
            q.pop();
            for (int a = head_[v]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
                const auto& arc = arcs_[static_cast<std::size_t>(a)];
                if (arc.cap > eps_ && level_[arc.to] < 0) {
                    level_[arc.to] = level_[v] + 1;
                    q.push(arc.to);
                }
            }
        }
        return level_[t] >= 0;
    }

    double dfs(std::size_t v, std::size_t t, double pushed) {
        if (v == t) return pushed;
        for (int& a = iter_[v]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
            auto& arc = arcs_[static_cast<std::size_t>(a)];
            if (arc.cap > eps_ && level_[arc.to] == level_[v] + 1) {
                const double f = dfs(arc.to, t, std::min(pushed, arc.cap));
                if (f > eps_) {
                    arc.cap -= f;
                    arcs_[static_cast<std::size_t>(a ^ 1)].cap += f;
                    return f;
                }
            }
        }
        return 0.0;
    }

    std::vector<Arc> arcs_;
    std::vector<int> head_;
    std::vector<int> level_;
    std::vector<int> iter_;
    double eps_ = 0.0;
};

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Residual given a partition of nodes (component label per node). Edges inside
// a component carry a free subgradient; edges across carry sign(beta_i - beta_j).
double residual_for_partition(const QuadFuseProblem& pr, const Eigen::VectorXd& beta,
                              const std::vector<std::size_t>& comp) {
    const auto K = static_cast<std::size_t>(beta.size());
    std::vector<double> demand(K);
    for (std::size_t i = 0; i < K; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        demand[i] = -pr.a[ii] * (beta[ii] - pr.b[ii]) / pr.scale;
    }
    std::vector<const FusionEdge*> internal;
    for (const auto& e : pr.graph.edges()) {
        const double cap = pr.lambda1 * e.rho;
        if (comp[e.i] == comp[e.j]) {
            if (cap > 0.0) internal.push_back(&e);
            continue;
        }
        const double s = sign(beta[static_cast<Eigen::Index>(e.i)] - beta[static_cast<Eigen::Index>(e.j)]);
        demand[e.i] -= cap * s;
        demand[e.j] += cap * s;
    }

    // Node i must send net flow demand[i] along internal edges with |y_e| <= cap_e.
    const std::size_t src = K, sink = K + 1;
    MaxFlow mf(K + 2);
    std::vector<int> edge_arc;
    edge_arc.reserve(internal.size());
    for (const auto* e : internal) {
        edge_arc.push_back(mf.add_edge(e->i, e->j, pr.lambda1 * e->rho));
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        scale = std::max(scale, std::abs(demand[i]));
        if (demand[i] > 0.0) {
            mf.add_arc(src, i, demand[i]);
        } else if (demand[i] < 0.0) {
            mf.add_arc(i, sink, -demand[i]);
        }
    }
    if (!internal.empty() && scale > 0.0) {
        mf.run(src, sink, scale * 1e-16);
    }

    std::vector<double> outflow(K, 0.0);
    for (std::size_t k = 0; k < internal.size(); ++k) {
        const auto* e = internal[k];
        const double cap = pr.lambda1 * e->rho;
        // Forward arc residual = cap - f(i->j) + f(j->i); net flow i->j = cap - residual.
        const double y = std::clamp(cap - mf.residual(edge_arc[k]), -cap, cap);
        outflow[e->i] += y;
        outflow[e->j] -= y;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        worst = std::max(worst, std::abs(demand[i] - outflow[i]));
    }
    return worst;
}

struct PolishResult {
    bool ok = false;
    Eigen::VectorXd beta;
    double residual = kInf;
};

// Solves the problem restricted to the fusion pattern `fused` (edge mask),
// with cross-edge signs read off `guide`. Succeeds when the closed-form group
// values reproduce those signs.
PolishResult polish(const QuadFuseProblem& pr, const std::vector<char>& fused, const Eigen::VectorXd& guide) {
    const auto K = static_cast<std::size_t>(pr.a.size());
    const auto& edges = pr.graph.edges();
    UnionFind uf(K);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (fused[k]) uf.unite(edges[k].i, edges[k].j);
    }
    std::vector<std::size_t> comp(K);
    std::vector<double> A(K, 0.0), B(K, 0.0), guide_sum(K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        comp[i] = uf.find(i);
        const auto ii = static_cast<Eigen::Index>(i);
        A[comp[i]] += pr.a[ii];
        B[comp[i]] += pr.a[ii] * pr.b[ii];
        guide_sum[comp[i]] += pr.a[ii] * guide[ii];
    }
    std::vector<double> level(K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        if (comp[i] == i) level[i] = guide_sum[i] / A[i];
    }

    struct Cross {
        std::size_t ci, cj;
        double flow;  // lambda1 * rho * sigma, oriented ci -> cj
    };
    std::vector<Cross> cross;
    for (const auto& e : edges) {
        const auto ci = comp[e.i], cj = comp[e.j];
        if (ci == cj) continue;
        const double cap = pr.lambda1 * e.rho;
        if (cap == 0.0) continue;
        const double s = sign(level[ci] - level[cj]);
        if (s == 0.0) return {};
        cross.push_back({ci, cj, cap * s});
    }

    std::vector<double> numer(K, 0.0);
    for (std::size_t c = 0; c < K; ++c) numer[c] = B[c] / pr.scale;
    for (const auto& x : cross) {
        numer[x.ci] -= x.flow;
        numer[x.cj] += x.flow;
    }
    std::vector<double> value(K, 0.0);
    for (std::size_t c = 0; c < K; ++c) {
        if (comp[c] == c) value[c] = numer[c] / (A[c] / pr.scale);
    }
    for (const auto& x : cross) {
        if (sign(value[x.ci] - value[x.cj]) != sign(x.flow)) return {};
    }

    PolishResult out;
    out.beta.resize(static_cast<Eigen::Index>(K));
    for (std::size_t i = 0; i < K; ++i) out.beta[static_cast<Eigen::Index>(i)] = value[comp[i]];
    out.residual = residual_for_partition(pr, out.beta, comp);
    out.ok = true;
    return out;
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

}  // namespace

void QuadFuseProblem::validate() const {
    if (a.size() != b.size()) {
        throw InvalidInput("graphfuse", "curvature and target vectors differ in length");
    }
    if (graph.num_nodes() != static_cast<std::size_t>(a.size()) && !graph.empty()) {
        throw InvalidInput("graphfuse", "graph node count does not match problem size");
    }
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0) || !std::isfinite(a[i])) {
            throw InvalidInput("graphfuse", "curvature a_" + std::to_string(i) + " must be positive");
        }
        if (!std::isfinite(b[i])) {
            throw InvalidInput("graphfuse", "target b_" + std::to_string(i) + " is not finite");
        }
    }
    for (const auto& e : graph.edges()) {
        if (e.j >= static_cast<std::size_t>(a.size())) {
            throw InvalidInput("graphfuse", "edge index out of range");
        }
    }
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
        throw InvalidInput("graphfuse", "lambda1 must be finite and nonnegative");
    }
    if (!(scale > 0.0)) {
        throw InvalidInput("graphfuse", "scale must be positive");
    }
}

double QuadFuseProblem::value(const Eigen::VectorXd& beta) const {
    double quad = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = beta[i] - b[i];
        quad += a[i] * d * d;
    }
    double tv = 0.0;
    for (const auto& e : graph.edges()) {
        tv += e.rho * std::abs(beta[static_cast<Eigen::Index>(e.i)] - beta[static_cast<Eigen::Index>(e.j)]);
    }
    return quad / (2.0 * scale) + lambda1 * tv;
}

double kkt_residual(const QuadFuseProblem& problem, const Eigen::VectorXd& beta, double fuse_tol) {
    problem.validate();
    const auto K = static_cast<std::size_t>(beta.size());
    UnionFind uf(K);
    for (const auto& e : problem.graph.edges()) {
        if (std::abs(beta[static_cast<Eigen::Index>(e.i)] - beta[static_cast<Eigen::Index>(e.j)]) <= fuse_tol) {
            uf.unite(e.i, e.j);
        }
    }
    std::vector<std::size_t> comp(K);
    for (std::size_t i = 0; i < K; ++i) comp[i] = uf.find(i);
    return residual_for_partition(problem, beta, comp);
}

FuseSolution solve_quad_fuse(const QuadFuseProblem& pr, const FuseOptions& opt, const FuseWarmStart* warm) {
    pr.validate();
    if (!(opt.tol > 0.0)) {
        throw InvalidInput("graphfuse", "tolerance must be positive");
    }
    const auto K = pr.a.size();
    const auto& edges = pr.graph.edges();
    const auto E = static_cast<Eigen::Index>(edges.size());

    const bool trivial = pr.lambda1 == 0.0 ||
                         std::none_of(edges.begin(), edges.end(), [](const FusionEdge& e) { return e.rho > 0.0; });
    if (trivial) {
        FuseSolution sol;
        sol.beta = pr.b;
        sol.kkt_residual = 0.0;
        sol.state.subgradient = Eigen::VectorXd::Zero(E);
        return sol;
    }

    // Normalize so the mean curvature is 1: sum_i (a_hat/2)(beta-b)^2 + sum_e mu_e |z_e|.
    const double a_bar = pr.a.mean();
    const Eigen::VectorXd a_hat = pr.a / a_bar;
    Eigen::VectorXd mu(E);
    for (Eigen::Index k = 0; k < E; ++k) {
        mu[k] = pr.lambda1 * edges[static_cast<std::size_t>(k)].rho * pr.scale / a_bar;
    }
    const double r = opt.admm_rho;
    const double omega = opt.over_relaxation;

    Eigen::SparseMatrix<double> D(E, K);
    {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<std::size_t>(2 * E));
        for (Eigen::Index k = 0; k < E; ++k) {
            t.emplace_back(k, static_cast<Eigen::Index>(edges[static_cast<std::size_t>(k)].i), 1.0);
            t.emplace_back(k, static_cast<Eigen::Index>(edges[static_cast<std::size_t>(k)].j), -1.0);
        }
        D.setFromTriplets(t.begin(), t.end());
    }
    Eigen::SparseMatrix<double> M = r * (D.transpose() * D);
    for (Eigen::Index i = 0; i < K; ++i) M.coeffRef(i, i) += a_hat[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(M);
    if (chol.info() != Eigen::Success) {
        throw NonConvergence("graphfuse", "ADMM system factorization failed");
    }

    const Eigen::VectorXd rhs0 = a_hat.cwiseProduct(pr.b);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(E);
    Eigen::VectorXd z = D * pr.b;
    if (warm && warm->subgradient.size() == E) {
        u = mu.cwiseProduct(warm->subgradient) / r;
    }
    Eigen::VectorXd beta = pr.b;
    Eigen::VectorXd best_beta = pr.b;
    double best_residual = kInf;
    std::vector<char> fused(static_cast<std::size_t>(E));

    auto finish = [&](const Eigen::VectorXd& b, double res, int it) {
        FuseSolution sol;
        sol.beta = b;
        sol.kkt_residual = res;
        sol.iterations = it;
        sol.state.subgradient.resize(E);
        for (Eigen::Index k = 0; k < E; ++k) {
            const auto& e = edges[static_cast<std::size_t>(k)];
            const double d = b[static_cast<Eigen::Index>(e.i)] - b[static_cast<Eigen::Index>(e.j)];
            sol.state.subgradient[k] =
                d != 0.0 ? sign(d) : (mu[k] > 0.0 ? std::clamp(r * u[k] / mu[k], -1.0, 1.0) : 0.0);
        }
        return sol;
    };

    for (int it = 1; it <= opt.max_iter; ++it) {
        beta = chol.solve(rhs0 + r * (D.transpose() * (z - u)));
        const Eigen::VectorXd Dbeta = D * beta;
        const Eigen::VectorXd relaxed = omega * Dbeta + (1.0 - omega) * z;
        for (Eigen::Index k = 0; k < E; ++k) {
            z[k] = soft_threshold(relaxed[k] + u[k], mu[k] / r);
        }
        u += relaxed - z;

        if (it == 1 || it % opt.polish_every == 0 || it == opt.max_iter) {
            for (Eigen::Index k = 0; k < E; ++k) fused[static_cast<std::size_t>(k)] = z[k] == 0.0;
            auto p = polish(pr, fused, beta);
            if (p.ok && p.residual < best_residual) {
                best_residual = p.residual;
                best_beta = p.beta;
            }
            if (p.ok && p.residual <= opt.tol) {
                return finish(p.beta, p.residual, it);
            }
        }
    }
    if (!std::isfinite(best_residual)) {
        best_beta = beta;
        best_residual = kkt_residual(pr, beta);
    }
    throw FuseNonConvergence("no KKT certificate within " + std::to_string(opt.max_iter) +
                                 " iterations (best residual " + std::to_string(best_residual) + ")",
                             best_beta, best_residual);
}

std::vector<std::vector<std::size_t>> fused_groups(const Eigen::VectorXd& beta, double merge_tol) {
    std::vector<std::size_t> order(static_cast<std::size_t>(beta.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return beta[static_cast<Eigen::Index>(x)] < beta[static_cast<Eigen::Index>(y)];
    });
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double v = beta[static_cast<Eigen::Index>(order[k])];
        const double gap = k == 0 ? 0.0 : v - beta[static_cast<Eigen::Index>(order[k - 1])];
        if (k == 0 || !(gap < merge_tol || gap == 0.0)) {
            groups.emplace_back();
        }
        groups.back().push_back(order[k]);
    }
    for (auto& g : groups) std::sort(g.begin(), g.end());
    return groups;
}

}  // namespace hotspot
