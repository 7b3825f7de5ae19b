#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "whrt/constraints.hpp"
#include "whrt/errors.hpp"

namespace whrt {

struct Edge {
  int from = 0;
  int to = 0;
  int label = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Labeled directed graph whose paths generate admissible label sequences.
///
/// Non-lifted graphs use labels {0,1} (loss / success). Lifted graphs use
/// labels {0,...,s-1}, the number of losses between consecutive successes.
/// Nodes are 0-based; exports print them 1-based as v1, v2, ...
///
/// `initial_nodes` are the nodes a path may start from at k = 0. For
/// non-lifted graphs the first label is the success at k = 0; for lifted
/// graphs the initial node is the state right after that success.
class WhrtGraph {
 public:
  WhrtGraph() = default;

  WhrtGraph(int num_nodes, std::vector<Edge> edges, int alphabet_size, std::vector<int> initial_nodes,
            bool lifted)
      : num_nodes_(num_nodes),
        edges_(std::move(edges)),
        alphabet_size_(alphabet_size),
        initial_nodes_(std::move(initial_nodes)),
        lifted_(lifted) {
    if (num_nodes_ < 0 || alphabet_size_ < 1) throw std::invalid_argument("invalid graph dimensions");
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.from, a.label, a.to) < std::tie(b.from, b.label, b.to);
    });
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    out_begin_.assign(static_cast<std::size_t>(num_nodes_) + 1, 0);
    for (const Edge& e : edges_) {
      if (e.from < 0 || e.from >= num_nodes_ || e.to < 0 || e.to >= num_nodes_) {
        throw std::invalid_argument("edge endpoint out of range");
      }
      if (e.label < 0 || e.label >= alphabet_size_) {
        throw std::invalid_argument("edge label " + std::to_string(e.label) + " outside alphabet");
      }
      ++out_begin_[static_cast<std::size_t>(e.from) + 1];
    }
    for (std::size_t i = 1; i < out_begin_.size(); ++i) out_begin_[i] += out_begin_[i - 1];
    std::sort(initial_nodes_.begin(), initial_nodes_.end());
    initial_nodes_.erase(std::unique(initial_nodes_.begin(), initial_nodes_.end()), initial_nodes_.end());
    for (int v : initial_nodes_) {
      if (v < 0 || v >= num_nodes_) throw std::invalid_argument("initial node out of range");
    }
    deterministic_ = true;
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      if (edges_[i].from == edges_[i - 1].from && edges_[i].label == edges_[i - 1].label) {
        deterministic_ = false;
        break;
      }
    }
  }

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int alphabet_size() const { return alphabet_size_; }
  bool lifted() const { return lifted_; }
  bool deterministic() const { return deterministic_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& initial_nodes() const { return initial_nodes_; }

  /// Outgoing edges of `node`, sorted by (label, target).
  std::span<const Edge> out_edges(int node) const {
    const auto b = static_cast<std::size_t>(out_begin_[static_cast<std::size_t>(node)]);
    const auto e = static_cast<std::size_t>(out_begin_[static_cast<std::size_t>(node) + 1]);
    return std::span<const Edge>(edges_).subspan(b, e - b);
  }

  std::vector<int> successors(int node, int label) const {
    std::vector<int> out;
    for (const Edge& e : out_edges(node)) {
      if (e.label == label) out.push_back(e.to);
    }
    return out;
  }

  /// Unique successor in a deterministic graph, -1 when there is no edge.
  int successor(int node, int label) const {
    for (const Edge& e : out_edges(node)) {
      if (e.label == label) return e.to;
    }
    return -1;
  }

  /// Distinct labels used by the edges, ascending.
  std::vector<int> labels() const {
    std::set<int> seen;
    for (const Edge& e : edges_) seen.insert(e.label);
    return {seen.begin(), seen.end()};
  }

  friend bool operator==(const WhrtGraph& a, const WhrtGraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.alphabet_size_ == b.alphabet_size_ && a.lifted_ == b.lifted_ &&
           a.edges_ == b.edges_ && a.initial_nodes_ == b.initial_nodes_;
  }

 private:
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  int alphabet_size_ = 2;
  std::vector<int> initial_nodes_;
  bool lifted_ = false;
  bool deterministic_ = true;
  std::vector<int> out_begin_{0};
};

namespace detail {

// Nodes on some infinite path: greatest fixpoint of "has an edge into the set".
inline std::vector<char> live_nodes(int num_nodes, const std::vector<Edge>& edges) {
  std::vector<char> live(static_cast<std::size_t>(num_nodes), 1);
  std::vector<int> out_count(static_cast<std::size_t>(num_nodes), 0);
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(num_nodes));
  for (const Edge& e : edges) {
    ++out_count[static_cast<std::size_t>(e.from)];
    preds[static_cast<std::size_t>(e.to)].push_back(e.from);
  }
  std::vector<int> queue;
  for (int v = 0; v < num_nodes; ++v) {
    if (out_count[static_cast<std::size_t>(v)] == 0) queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    if (!live[static_cast<std::size_t>(v)]) continue;
    live[static_cast<std::size_t>(v)] = 0;
    for (int p : preds[static_cast<std::size_t>(v)]) {
      if (live[static_cast<std::size_t>(p)] && --out_count[static_cast<std::size_t>(p)] == 0) queue.push_back(p);
    }
  }
  return live;
}

}  // namespace detail

/// Renumbers nodes breadth-first from the initial nodes, visiting outgoing
/// edges in (label, target) order. Nodes unreachable from the initial nodes
/// keep their relative order at the end.
inline WhrtGraph canonicalize(const WhrtGraph& g) {
  const int n = g.num_nodes();
  std::vector<int> order(static_cast<std::size_t>(n), -1);
  int next = 0;
  std::deque<int> queue;
  for (int v : g.initial_nodes()) {
    if (order[static_cast<std::size_t>(v)] < 0) {
      order[static_cast<std::size_t>(v)] = next++;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const Edge& e : g.out_edges(v)) {
      if (order[static_cast<std::size_t>(e.to)] < 0) {
        order[static_cast<std::size_t>(e.to)] = next++;
        queue.push_back(e.to);
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (order[static_cast<std::size_t>(v)] < 0) order[static_cast<std::size_t>(v)] = next++;
  }
  std::vector<Edge> edges;
  edges.reserve(g.edges().size());
  for (const Edge& e : g.edges()) {
    edges.push_back({order[static_cast<std::size_t>(e.from)], order[static_cast<std::size_t>(e.to)], e.label});
  }
  std::vector<int> init;
  for (int v : g.initial_nodes()) init.push_back(order[static_cast<std::size_t>(v)]);
  return WhrtGraph(n, std::move(edges), g.alphabet_size(), std::move(init), g.lifted());
}

/// Removes nodes that are unreachable from the initial nodes or lie on no
/// infinite path.
inline WhrtGraph trim(const WhrtGraph& g) {
  const auto live = detail::live_nodes(g.num_nodes(), g.edges());
  std::vector<char> keep(static_cast<std::size_t>(g.num_nodes()), 0);
  std::deque<int> queue;
  for (int v : g.initial_nodes()) {
    if (live[static_cast<std::size_t>(v)] && !keep[static_cast<std::size_t>(v)]) {
      keep[static_cast<std::size_t>(v)] = 1;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const Edge& e : g.out_edges(v)) {
      if (live[static_cast<std::size_t>(e.to)] && !keep[static_cast<std::size_t>(e.to)]) {
        keep[static_cast<std::size_t>(e.to)] = 1;
        queue.push_back(e.to);
      }
    }
  }
  std::vector<int> index(static_cast<std::size_t>(g.num_nodes()), -1);
  int count = 0;
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (keep[static_cast<std::size_t>(v)]) index[static_cast<std::size_t>(v)] = count++;
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    const int a = index[static_cast<std::size_t>(e.from)];
    const int b = index[static_cast<std::size_t>(e.to)];
    if (a >= 0 && b >= 0) edges.push_back({a, b, e.label});
  }
  std::vector<int> init;
  for (int v : g.initial_nodes()) {
    if (index[static_cast<std::size_t>(v)] >= 0) init.push_back(index[static_cast<std::size_t>(v)]);
  }
  return WhrtGraph(count, std::move(edges), g.alphabet_size(), std::move(init), g.lifted());
}

/// Merges nodes with identical future label languages (Moore-style partition
/// refinement on per-label successor classes). Requires a deterministic
/// graph; the result is canonically numbered.
inline WhrtGraph minimize(const WhrtGraph& g) {
  if (!g.deterministic()) throw std::invalid_argument("minimize requires a deterministic graph");
  const int n = g.num_nodes();
  const int k = g.alphabet_size();
  std::vector<int> cls(static_cast<std::size_t>(n), 0);
  int num_classes = n > 0 ? 1 : 0;
  while (true) {
    std::map<std::vector<int>, int> ids;
    std::vector<int> next(static_cast<std::size_t>(n));
    std::vector<int> sig(static_cast<std::size_t>(k) + 1);
    for (int v = 0; v < n; ++v) {
      sig[0] = cls[static_cast<std::size_t>(v)];
      for (int a = 0; a < k; ++a) {
        const int t = g.successor(v, a);
        sig[static_cast<std::size_t>(a) + 1] = t < 0 ? -1 : cls[static_cast<std::size_t>(t)];
      }
      next[static_cast<std::size_t>(v)] = ids.emplace(sig, static_cast<int>(ids.size())).first->second;
    }
    const int count = static_cast<int>(ids.size());
    cls = std::move(next);
    if (count == num_classes) break;
    num_classes = count;
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    edges.push_back({cls[static_cast<std::size_t>(e.from)], cls[static_cast<std::size_t>(e.to)], e.label});
  }
  std::vector<int> init;
  for (int v : g.initial_nodes()) init.push_back(cls[static_cast<std::size_t>(v)]);
  return canonicalize(WhrtGraph(num_classes, std::move(edges), k, std::move(init), g.lifted()));
}

/// Deterministic window automaton over {0,1} for `c` with exact finite-prefix
/// semantics: a state is the history of the last min(k, s-1) attempts, and a
/// transition is allowed when the window it completes satisfies `c`. The
/// initial node is the empty history (before k = 0). Trimmed and minimized.
inline WhrtGraph build_window_graph(const WhrtConstraint& c) {
  const int h = c.s - 1;
  const std::uint32_t mask = h == 0 ? 0u : ((std::uint32_t{1} << h) - 1u);
  // key = (length << 32) | bits, bits hold the most recent attempt in the LSB.
  std::unordered_map<std::uint64_t, int> id;
  std::vector<std::pair<int, std::uint32_t>> states;
  std::vector<Edge> edges;
  auto intern = [&](int len, std::uint32_t bits) {
    const std::uint64_t key = (static_cast<std::uint64_t>(len) << 32) | bits;
    auto [it, inserted] = id.emplace(key, static_cast<int>(states.size()));
    if (inserted) states.emplace_back(len, bits);
    return it->second;
  };
  intern(0, 0);
  std::vector<int> window(static_cast<std::size_t>(c.s));
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto [len, bits] = states[i];
    for (int b = 0; b <= 1; ++b) {
      int target;
      if (len < h) {
        target = intern(len + 1, (bits << 1) | static_cast<std::uint32_t>(b));
      } else {
        for (int j = 0; j < h; ++j) window[static_cast<std::size_t>(j)] = (bits >> (h - 1 - j)) & 1u;
        window[static_cast<std::size_t>(h)] = b;
        if (!window_ok(window, c)) continue;
        target = intern(h, ((bits << 1) | static_cast<std::uint32_t>(b)) & mask);
      }
      edges.push_back({static_cast<int>(i), target, b});
    }
  }
  WhrtGraph raw(static_cast<int>(states.size()), std::move(edges), 2, {0}, false);
  WhrtGraph trimmed = trim(raw);
  if (trimmed.num_nodes() == 0 || trimmed.initial_nodes().empty()) {
    throw InfeasibleConstraint("no infinite loss sequence satisfies " + to_string(c));
  }
  return minimize(trimmed);
}

/// Lifted graph over labels {0,...,s-1}: an edge labeled a from node v means
/// a losses followed by one success starting from the state right after a
/// success. Built from the window automaton, then minimized.
inline WhrtGraph build_lifted_graph(const WhrtConstraint& c) {
  const WhrtGraph w = build_window_graph(c);
  const int start = w.successor(w.initial_nodes().front(), 1);
  if (start < 0) throw InfeasibleConstraint("first attempt cannot succeed under " + to_string(c));
  // Any state that survives s consecutive losses admits an all-loss window.
  for (int v = 0; v < w.num_nodes(); ++v) {
    int cur = v;
    for (int i = 0; i < c.s && cur >= 0; ++i) cur = w.successor(cur, 0);
    if (cur >= 0) {
      throw UnboundedLosses(to_string(c) + " allows unbounded runs of losses; no lifted graph exists");
    }
  }
  std::map<int, int> index;  // window node -> lifted node
  std::vector<int> order;
  std::vector<Edge> edges;
  auto intern = [&](int v) {
    auto [it, inserted] = index.emplace(v, static_cast<int>(order.size()));
    if (inserted) order.push_back(v);
    return it->second;
  };
  intern(start);
  for (std::size_t i = 0; i < order.size(); ++i) {
    int cur = order[i];
    for (int losses = 0; losses < c.s && cur >= 0; ++losses) {
      const int hit = w.successor(cur, 1);
      if (hit >= 0) {
        const int target = intern(hit);
        edges.push_back({static_cast<int>(i), target, losses});
      }
      cur = w.successor(cur, 0);
    }
  }
  WhrtGraph raw(static_cast<int>(order.size()), std::move(edges), c.s, {0}, true);
  return minimize(trim(raw));
}

/// Replaces every lifted edge labeled l by l edges labeled 0 through fresh
/// intermediate nodes followed by one edge labeled 1 (a 0-label becomes a
/// single 1-edge). The initial node is a node whose 1-edge enters the lifted
/// initial node, so that paths start with the success at k = 0; a fresh
/// start node is added when no such node exists.
inline WhrtGraph unlift(const WhrtGraph& lifted) {
  if (!lifted.lifted()) throw std::invalid_argument("unlift expects a lifted graph");
  int n = lifted.num_nodes();
  std::vector<Edge> edges;
  for (const Edge& e : lifted.edges()) {
    int prev = e.from;
    for (int i = 0; i < e.label; ++i) {
      edges.push_back({prev, n, 0});
      prev = n++;
    }
    edges.push_back({prev, e.to, 1});
  }
  std::vector<int> init;
  for (int start : lifted.initial_nodes()) {
    int entry = -1;
    for (const Edge& e : edges) {
      if (e.label == 1 && e.to == start && (entry < 0 || e.from < entry)) entry = e.from;
    }
    if (entry < 0) {
      entry = n++;
      edges.push_back({entry, start, 1});
    }
    init.push_back(entry);
  }
  return canonicalize(WhrtGraph(n, std::move(edges), 2, std::move(init), false));
}

/// Non-lifted graph for `c`: the unlifted form of the lifted graph, which is
/// the presentation whose node and edge sets correspond one-to-one with the
/// lifted one. Constraints that allow unbounded loss runs have no lifted
/// graph and fall back to the minimized window automaton.
inline WhrtGraph build_graph(const WhrtConstraint& c) {
  try {
    return unlift(build_lifted_graph(c));
  } catch (const UnboundedLosses&) {
    return build_window_graph(c);
  }
}

/// True iff some path from an initial node spells `word`.
inline bool generates(const WhrtGraph& g, std::span<const int> word) {
  std::vector<char> current(static_cast<std::size_t>(g.num_nodes()), 0);
  for (int v : g.initial_nodes()) current[static_cast<std::size_t>(v)] = 1;
  std::vector<char> next(current.size());
  for (int label : word) {
    std::fill(next.begin(), next.end(), 0);
    bool any = false;
    for (int v = 0; v < g.num_nodes(); ++v) {
      if (!current[static_cast<std::size_t>(v)]) continue;
      for (const Edge& e : g.out_edges(v)) {
        if (e.label == label) {
          next[static_cast<std::size_t>(e.to)] = 1;
          any = true;
        }
      }
    }
    if (!any) return false;
    current.swap(next);
  }
  return std::any_of(current.begin(), current.end(), [](char c) { return c != 0; });
}

/// Node sequence (word.size() + 1 entries) of a path from an initial node
/// spelling `word`, resolving nondeterminism with full knowledge of the word.
/// Among valid paths the lexicographically smallest is returned.
inline std::optional<std::vector<int>> trace_path(const WhrtGraph& g, std::span<const int> word) {
  const std::size_t len = word.size();
  const auto n = static_cast<std::size_t>(g.num_nodes());
  // can[k][v]: the suffix word[k..] can be spelled from v.
  std::vector<std::vector<char>> can(len + 1, std::vector<char>(n, 0));
  std::fill(can[len].begin(), can[len].end(), 1);
  for (std::size_t k = len; k-- > 0;) {
    for (std::size_t v = 0; v < n; ++v) {
      for (const Edge& e : g.out_edges(static_cast<int>(v))) {
        if (e.label == word[k] && can[k + 1][static_cast<std::size_t>(e.to)]) {
          can[k][v] = 1;
          break;
        }
      }
    }
  }
  int cur = -1;
  for (int v : g.initial_nodes()) {
    if (can[0][static_cast<std::size_t>(v)]) {
      cur = v;
      break;
    }
  }
  if (cur < 0) return std::nullopt;
  std::vector<int> path{cur};
  for (std::size_t k = 0; k < len; ++k) {
    int best = -1;
    for (const Edge& e : g.out_edges(cur)) {
      if (e.label == word[k] && can[k + 1][static_cast<std::size_t>(e.to)] && (best < 0 || e.to < best)) {
        best = e.to;
      }
    }
    cur = best;
    path.push_back(cur);
  }
  return path;
}

/// Tracks the active node of a deterministic graph online. The indicator is
/// 1 for the current node (the start node of the edge taken next) and 0
/// elsewhere.
class NodeTracker {
 public:
  NodeTracker(const WhrtGraph& graph, int node) : graph_(&graph), current_(node) {
    if (!graph.deterministic()) throw std::invalid_argument("NodeTracker requires a deterministic graph");
    if (node < 0 || node >= graph.num_nodes()) throw std::out_of_range("tracker node out of range");
  }

  static NodeTracker at_initial(const WhrtGraph& graph) {
    if (graph.initial_nodes().empty()) throw std::invalid_argument("graph has no initial node");
    return NodeTracker(graph, graph.initial_nodes().front());
  }

  int current() const { return current_; }
  int indicator(int node) const { return node == current_ ? 1 : 0; }
  const WhrtGraph& graph() const { return *graph_; }

  NodeTracker step(int label) const {
    const int next = graph_->successor(current_, label);
    if (next < 0) {
      throw InadmissibleLabel("label " + std::to_string(label) + " is not admissible at node v" +
                              std::to_string(current_ + 1));
    }
    return NodeTracker(*graph_, next, Unchecked{});
  }

 private:
  struct Unchecked {};
  NodeTracker(const WhrtGraph& graph, int node, Unchecked) : graph_(&graph), current_(node) {}

  const WhrtGraph* graph_;
  int current_;
};

/// Structural predicates of a WHRT graph. Nodes without incoming edges are
/// allowed only as transients: initial-side nodes visited at most once
/// before the path enters the recurrent part.
struct GraphStructure {
  bool labels_in_alphabet = true;
  bool every_node_has_outgoing = true;
  bool every_node_reachable = true;
  bool deterministic = true;
  std::vector<int> nodes_without_incoming;
};

inline GraphStructure check_structure(const WhrtGraph& g) {
  GraphStructure out;
  out.deterministic = g.deterministic();
  std::vector<int> in(static_cast<std::size_t>(g.num_nodes()), 0);
  for (const Edge& e : g.edges()) {
    if (e.label < 0 || e.label >= g.alphabet_size()) out.labels_in_alphabet = false;
    ++in[static_cast<std::size_t>(e.to)];
  }
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (g.out_edges(v).empty()) out.every_node_has_outgoing = false;
    if (in[static_cast<std::size_t>(v)] == 0) out.nodes_without_incoming.push_back(v);
  }
  std::vector<char> seen(static_cast<std::size_t>(g.num_nodes()), 0);
  std::deque<int> queue(g.initial_nodes().begin(), g.initial_nodes().end());
  for (int v : g.initial_nodes()) seen[static_cast<std::size_t>(v)] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const Edge& e : g.out_edges(v)) {
      if (!seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = 1;
        queue.push_back(e.to);
      }
    }
  }
  out.every_node_reachable = std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  return out;
}

/// Graphviz rendering; nodes in index order, initial nodes double-circled.
inline std::string export_dot(const WhrtGraph& g) {
  std::ostringstream os;
  os << "digraph " << (g.lifted() ? "whrt_lifted" : "whrt") << " {\n";
  for (int v = 0; v < g.num_nodes(); ++v) {
    const bool initial =
        std::find(g.initial_nodes().begin(), g.initial_nodes().end(), v) != g.initial_nodes().end();
    os << "  v" << v + 1 << " [shape=" << (initial ? "doublecircle" : "circle") << "];\n";
  }
  for (const Edge& e : g.edges()) {
    os << "  v" << e.from + 1 << " -> v" << e.to + 1 << " [label=\"" << e.label << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

inline constexpr int kGraphTextVersion = 1;

/// Compact line-oriented dump: header, alphabet, lifted flag, node count,
/// initial nodes, then one `edge from to label` line per edge (0-based).
inline std::string dump_text(const WhrtGraph& g) {
  std::ostringstream os;
  os << "whrt-graph " << kGraphTextVersion << "\n";
  os << "alphabet " << g.alphabet_size() << "\n";
  os << "lifted " << (g.lifted() ? 1 : 0) << "\n";
  os << "nodes " << g.num_nodes() << "\n";
  os << "initial";
  for (int v : g.initial_nodes()) os << ' ' << v;
  os << "\n";
  for (const Edge& e : g.edges()) os << "edge " << e.from << ' ' << e.to << ' ' << e.label << "\n";
  return os.str();
}

inline WhrtGraph parse_text(std::istream& in) {
  std::string line;
  int line_no = 0;
  int alphabet = -1;
  int lifted = -1;
  int nodes = -1;
  std::vector<int> init;
  std::vector<Edge> edges;
  bool header = false;
  auto fail = [&](const std::string& what) {
    throw ParseError("graph text line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (!header) {
      int version = 0;
      if (key != "whrt-graph" || !(ls >> version) || version != kGraphTextVersion) fail("bad header");
      header = true;
    } else if (key == "alphabet") {
      if (!(ls >> alphabet)) fail("bad alphabet");
    } else if (key == "lifted") {
      if (!(ls >> lifted)) fail("bad lifted flag");
    } else if (key == "nodes") {
      if (!(ls >> nodes)) fail("bad node count");
    } else if (key == "initial") {
      int v;
      while (ls >> v) init.push_back(v);
    } else if (key == "edge") {
      Edge e;
      if (!(ls >> e.from >> e.to >> e.label)) fail("bad edge");
      edges.push_back(e);
    } else {
      fail("unknown record '" + key + "'");
    }
  }
  if (!header || alphabet < 1 || lifted < 0 || nodes < 0) throw ParseError("graph text is incomplete");
  try {
    return WhrtGraph(nodes, std::move(edges), alphabet, std::move(init), lifted != 0);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("graph text: ") + e.what());
  }
}

enum class Hardness { Harder, NotHarder };
enum class HardnessMethod { Automaton, BruteForce };

namespace detail {

// Words of `length` satisfying `c` that extend to an infinite admissible
// sequence. Depth-first search; a continuation of 2^(s-1) + s attempts
// forces a repeated window state, which can be pumped forever.
inline std::vector<Word> extendable_words(const WhrtConstraint& c, int length) {
  std::vector<Word> out;
  const int extra = (1 << (c.s - 1)) + c.s;
  Word buf;
  auto last_window_ok = [&]() {
    if (static_cast<int>(buf.size()) < c.s) return true;
    return window_ok(std::span<const int>(buf).last(static_cast<std::size_t>(c.s)), c);
  };
  std::function<bool(int)> extends = [&](int remaining) {
    if (remaining == 0) return true;
    for (int b = 1; b >= 0; --b) {
      buf.push_back(b);
      const bool ok = last_window_ok() && extends(remaining - 1);
      buf.pop_back();
      if (ok) return true;
    }
    return false;
  };
  std::function<void()> rec = [&]() {
    if (static_cast<int>(buf.size()) == length) {
      if (extends(extra)) out.push_back(buf);
      return;
    }
    for (int b = 0; b <= 1; ++b) {
      buf.push_back(b);
      if (last_window_ok()) rec();
      buf.pop_back();
    }
  };
  rec();
  return out;
}

}  // namespace detail

/// Whether every admissible sequence of `harder` is admissible for `easier`.
/// The automaton method decides inclusion exactly on the product of the two
/// window automata; the brute-force method compares extendable words of
/// length `horizon` and exists as a cross-check.
inline Hardness is_harder(const WhrtConstraint& harder, const WhrtConstraint& easier, int horizon,
                          HardnessMethod method = HardnessMethod::Automaton) {
  if (method == HardnessMethod::BruteForce) {
    if (horizon < std::max(harder.s, easier.s)) {
      throw std::invalid_argument("horizon must be at least the longer window");
    }
    const auto a = detail::extendable_words(harder, horizon);
    const auto b = detail::extendable_words(easier, horizon);
    return std::includes(b.begin(), b.end(), a.begin(), a.end()) ? Hardness::Harder : Hardness::NotHarder;
  }
  const WhrtGraph g2 = build_window_graph(harder);
  const WhrtGraph g1 = build_window_graph(easier);
  std::set<std::pair<int, int>> seen;
  std::deque<std::pair<int, int>> queue;
  const std::pair<int, int> start{g2.initial_nodes().front(), g1.initial_nodes().front()};
  seen.insert(start);
  queue.push_back(start);
  while (!queue.empty()) {
    const auto [u, v] = queue.front();
    queue.pop_front();
    for (const Edge& e : g2.out_edges(u)) {
      const int t1 = g1.successor(v, e.label);
      if (t1 < 0) return Hardness::NotHarder;
      if (seen.emplace(e.to, t1).second) queue.emplace_back(e.to, t1);
    }
  }
  return Hardness::Harder;
}

}  // namespace whrt
