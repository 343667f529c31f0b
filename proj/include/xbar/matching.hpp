#ifndef XBAR_MATCHING_HPP
#define XBAR_MATCHING_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "rng.hpp"
#include "switch_core.hpp"

namespace xbar {

// Request edge from an input port to an output port (0-based).
struct Edge {
    int input = 0;
    int output = 0;

    friend auto operator<=>(const Edge &, const Edge &) = default;
};

// Bipartite request graph: edge (i, j) iff input i holds a cell for output j.
struct RequestGraph {
    int n_ports = 0;
    std::vector<Edge> edges;

    // Edges in lexicographic (input, output) order.
    static RequestGraph from_occupancy(const CountMatrix &x) {
        RequestGraph g{static_cast<int>(x.rows()), {}};
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j)
                if (x(i, j) > 0)
                    g.edges.push_back({static_cast<int>(i), static_cast<int>(j)});
        return g;
    }

    bool contains(const Edge &e) const { return std::find(edges.begin(), edges.end(), e) != edges.end(); }
};

struct Matching {
    std::vector<Edge> edges;

    std::size_t size() const { return edges.size(); }
    bool empty() const { return edges.empty(); }
};

enum class EdgeOrder { kLexicographic, kRandom };

// Greedy maximal matching with reusable vertex-used arrays. Edges are
// accepted in the order visited whenever both endpoints are still free, so
// the result is maximal with respect to the visited edge set.
class GreedyMatcher {
public:
    explicit GreedyMatcher(int n_ports)
        : input_used_(static_cast<std::size_t>(n_ports), 0), output_used_(static_cast<std::size_t>(n_ports), 0) {}

    template <class Visit>
    void run(std::span<const Edge> ordered, Visit &&accept) {
        std::fill(input_used_.begin(), input_used_.end(), 0);
        std::fill(output_used_.begin(), output_used_.end(), 0);
        for (const Edge &e : ordered) {
            auto &in = input_used_[static_cast<std::size_t>(e.input)];
            auto &out = output_used_[static_cast<std::size_t>(e.output)];
            if (in || out)
                continue;
            in = out = 1;
            accept(e);
        }
    }

private:
    std::vector<char> input_used_;
    std::vector<char> output_used_;
};

// Visits g.edges in the order given by `order`, a permutation of edge indices.
inline Matching greedy_maximal_matching(const RequestGraph &g, std::span<const std::size_t> order) {
    if (order.size() != g.edges.size())
        throw PreconditionError("greedy_maximal_matching: order must cover every edge");
    std::vector<Edge> ordered;
    ordered.reserve(order.size());
    std::vector<char> seen(order.size(), 0);
    for (std::size_t k : order) {
        if (k >= g.edges.size() || seen[k])
            throw PreconditionError("greedy_maximal_matching: order is not a permutation");
        seen[k] = 1;
        ordered.push_back(g.edges[k]);
    }
    Matching m;
    GreedyMatcher matcher(g.n_ports);
    matcher.run(ordered, [&](const Edge &e) { m.edges.push_back(e); });
    return m;
}

// Lexicographic order.
inline Matching greedy_maximal_matching(const RequestGraph &g) {
    std::vector<Edge> ordered = g.edges;
    std::sort(ordered.begin(), ordered.end());
    Matching m;
    GreedyMatcher matcher(g.n_ports);
    matcher.run(ordered, [&](const Edge &e) { m.edges.push_back(e); });
    return m;
}

// Uniformly random edge order drawn from rng.
inline Matching greedy_maximal_matching(const RequestGraph &g, Rng &rng) {
    std::vector<std::size_t> order(g.edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    return greedy_maximal_matching(g, order);
}

inline bool is_matching(const Matching &m) {
    std::vector<int> inputs, outputs;
    for (const Edge &e : m.edges) {
        inputs.push_back(e.input);
        outputs.push_back(e.output);
    }
    std::sort(inputs.begin(), inputs.end());
    std::sort(outputs.begin(), outputs.end());
    return std::adjacent_find(inputs.begin(), inputs.end()) == inputs.end() &&
           std::adjacent_find(outputs.begin(), outputs.end()) == outputs.end();
}

// Every edge of g touches the matching at its input or its output.
inline bool is_maximal(const RequestGraph &g, const Matching &m) {
    if (!is_matching(m))
        throw PreconditionError("is_maximal: argument is not a matching");
    for (const Edge &e : m.edges)
        if (!g.contains(e))
            throw PreconditionError("is_maximal: matching edge not in graph");

    std::vector<char> input_hit(static_cast<std::size_t>(g.n_ports), 0);
    std::vector<char> output_hit(static_cast<std::size_t>(g.n_ports), 0);
    for (const Edge &e : m.edges) {
        input_hit[static_cast<std::size_t>(e.input)] = 1;
        output_hit[static_cast<std::size_t>(e.output)] = 1;
    }
    return std::all_of(g.edges.begin(), g.edges.end(), [&](const Edge &e) {
        return input_hit[static_cast<std::size_t>(e.input)] || output_hit[static_cast<std::size_t>(e.output)];
    });
}

} // namespace xbar

#endif // XBAR_MATCHING_HPP
