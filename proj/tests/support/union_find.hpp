#pragma once

#include <numeric>
#include <vector>

namespace volley::oracle {

/// Disjoint sets over [0, n) with path halving.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

/// Group label of each item under the transitive closure of a pairwise
/// relation given as a full matrix.
inline std::vector<std::size_t> closure_groups(const std::vector<std::vector<bool>>& related) {
    UnionFind uf(related.size());
    for (std::size_t i = 0; i < related.size(); ++i) {
        for (std::size_t j = i + 1; j < related.size(); ++j) {
            if (related[i][j]) uf.unite(i, j);
        }
    }
    std::vector<std::size_t> label(related.size());
    for (std::size_t i = 0; i < related.size(); ++i) label[i] = uf.find(i);
    return label;
}

}  // namespace volley::oracle
