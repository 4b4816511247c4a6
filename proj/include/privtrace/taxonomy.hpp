#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "privtrace/rational.hpp"

namespace privtrace {

/// A rooted tree of labelled nodes. Depth counts nodes from the root
/// inclusive, so depth(root) == 1.
class Taxonomy {
public:
    explicit Taxonomy(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    void add_root(const std::string& label) {
        if (!nodes_.empty())
            throw std::invalid_argument("taxonomy '" + name_ + "' already has a root");
        index_[label] = 0;
        nodes_.push_back(Node{label, -1, 1});
    }

    void add_node(const std::string& label, const std::string& parent) {
        if (nodes_.empty())
            throw std::invalid_argument("taxonomy '" + name_ + "' has no root yet");
        if (index_.count(label))
            throw std::invalid_argument("duplicate taxonomy label '" + label + "'");
        const int p = require(parent);
        index_[label] = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{label, p, nodes_[p].depth + 1});
    }

    bool contains(const std::string& label) const { return index_.count(label) != 0; }
    std::size_t size() const { return nodes_.size(); }
    const std::string& root() const { return nodes_.at(0).label; }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        out.reserve(nodes_.size());
        for (const auto& n : nodes_) out.push_back(n.label);
        return out;
    }

    /// Number of nodes on the root-to-x path, both ends included.
    int depth(const std::string& label) const { return nodes_[require(label)].depth; }

    const std::string& deepest_common_ancestor(const std::string& x,
                                               const std::string& y) const {
        int a = require(x), b = require(y);
        while (nodes_[a].depth > nodes_[b].depth) a = nodes_[a].parent;
        while (nodes_[b].depth > nodes_[a].depth) b = nodes_[b].parent;
        while (a != b) {
            a = nodes_[a].parent;
            b = nodes_[b].parent;
        }
        return nodes_[a].label;
    }

    /// True iff `descendant` lies in the subtree rooted at `ancestor`
    /// (a node counts as its own ancestor).
    bool is_ancestor_or_equal(const std::string& ancestor,
                              const std::string& descendant) const {
        int d = require(descendant);
        const int a = require(ancestor);
        while (d != -1 && nodes_[d].depth >= nodes_[a].depth) {
            if (d == a) return true;
            d = nodes_[d].parent;
        }
        return false;
    }

    /// Wu-Palmer similarity 2*c_xy / (c_x + c_y), always in (0, 1].
    Rational wu_palmer(const std::string& x, const std::string& y) const {
        const int cxy = depth(deepest_common_ancestor(x, y));
        return Rational(2 * cxy, depth(x) + depth(y));
    }

    /// 1 - wu_palmer: the tree metric used for taxonomy-valued columns.
    Rational wp_distance(const std::string& x, const std::string& y) const {
        return Rational(1) - wu_palmer(x, y);
    }

private:
    struct Node {
        std::string label;
        int parent;  // -1 for the root
        int depth;
    };

    int require(const std::string& label) const {
        const auto it = index_.find(label);
        if (it == index_.end())
            throw std::invalid_argument("unknown label '" + label + "' in taxonomy '" +
                                        name_ + "'");
        return it->second;
    }

    std::string name_;
    std::vector<Node> nodes_;
    std::map<std::string, int> index_;
};

}  // namespace privtrace
