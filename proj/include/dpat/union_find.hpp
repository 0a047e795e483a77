#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace dpat {

// Disjoint sets with union by size and path halving.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }

    std::uint32_t find(std::uint32_t x) noexcept {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::uint32_t a, std::uint32_t b) noexcept {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

    bool connected(std::uint32_t a, std::uint32_t b) noexcept { return find(a) == find(b); }

    std::size_t size() const noexcept { return parent_.size(); }
    std::uint32_t component_size(std::uint32_t x) noexcept { return size_[find(x)]; }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

}  // namespace dpat
