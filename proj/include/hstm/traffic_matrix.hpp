#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hstm/core.hpp"

namespace hstm {

struct MatrixEntry {
    NodeId row = 0;
    NodeId col = 0;
    std::uint64_t value = 0;

    friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

inline bool coord_less(const MatrixEntry& a, const MatrixEntry& b) {
    return a.row < b.row || (a.row == b.row && a.col < b.col);
}

// Hypersparse traffic matrix: entry (i, j) counts packets from source i to
// destination j.  Stored as a coordinate list strictly sorted by (row, col)
// with no zero values, so memory scales with the number of stored entries
// and never with the extent of the 64-bit ID space.  Immutable after
// construction and safe to share between threads.
class TrafficMatrix {
public:
    TrafficMatrix() = default;

    // Aggregates a record stream by multiplicity.  total() equals the
    // record count.
    static TrafficMatrix from_records(std::span<const PacketRecord> records) {
        std::vector<MatrixEntry> entries;
        entries.reserve(records.size());
        for (const auto& rec : records) {
            entries.push_back({rec.src, rec.dst, 1});
        }
        std::sort(entries.begin(), entries.end(), coord_less);
        return from_sorted_unit_entries(std::move(entries));
    }

    // Takes ownership of an entry list that must already satisfy the
    // invariants: strictly (row, col)-sorted, values >= 1.
    static TrafficMatrix from_entries(std::vector<MatrixEntry> entries) {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].value == 0) {
                throw std::invalid_argument("hstm: TrafficMatrix entry with zero value");
            }
            if (i > 0 && !coord_less(entries[i - 1], entries[i])) {
                throw std::invalid_argument("hstm: TrafficMatrix entries not strictly sorted");
            }
            total = checked_add(total, entries[i].value);
        }
        TrafficMatrix m;
        m.entries_ = std::move(entries);
        m.total_ = total;
        return m;
    }

    std::span<const MatrixEntry> entries() const { return entries_; }
    std::uint64_t nnz() const { return entries_.size(); }
    std::uint64_t total() const { return total_; }
    bool empty() const { return entries_.empty(); }

    friend bool operator==(const TrafficMatrix&, const TrafficMatrix&) = default;

private:
    friend TrafficMatrix add(const TrafficMatrix&, const TrafficMatrix&);
    friend TrafficMatrix zero_norm(const TrafficMatrix&);

    // entries sorted by coordinate, runs of equal coordinates, all values 1
    static TrafficMatrix from_sorted_unit_entries(std::vector<MatrixEntry>&& entries) {
        TrafficMatrix m;
        m.total_ = entries.size();
        std::size_t out = 0;
        for (std::size_t i = 0; i < entries.size();) {
            std::size_t j = i + 1;
            while (j < entries.size() && entries[j].row == entries[i].row &&
                   entries[j].col == entries[i].col) {
                ++j;
            }
            entries[out] = {entries[i].row, entries[i].col, j - i};
            ++out;
            i = j;
        }
        entries.resize(out);
        m.entries_ = std::move(entries);
        return m;
    }

    std::vector<MatrixEntry> entries_;
    std::uint64_t total_ = 0;
};

// Entrywise sum by sorted merge.  nnz(A+B) <= nnz(A) + nnz(B), with
// equality exactly when the coordinate sets are disjoint.  Value overflow
// is a hard error: it signals corrupt input, not a valid stream.
inline TrafficMatrix add(const TrafficMatrix& a, const TrafficMatrix& b) {
    TrafficMatrix m;
    m.entries_.reserve(a.nnz() + b.nnz());
    auto ia = a.entries_.begin(), ea = a.entries_.end();
    auto ib = b.entries_.begin(), eb = b.entries_.end();
    while (ia != ea && ib != eb) {
        if (coord_less(*ia, *ib)) {
            m.entries_.push_back(*ia++);
        } else if (coord_less(*ib, *ia)) {
            m.entries_.push_back(*ib++);
        } else {
            m.entries_.push_back({ia->row, ia->col, checked_add(ia->value, ib->value)});
            ++ia;
            ++ib;
        }
    }
    m.entries_.insert(m.entries_.end(), ia, ea);
    m.entries_.insert(m.entries_.end(), ib, eb);
    m.total_ = checked_add(a.total_, b.total_);
    return m;
}

// Zero-norm: every stored value becomes 1, so total(|A|0) = nnz(A).
inline TrafficMatrix zero_norm(const TrafficMatrix& a) {
    TrafficMatrix m;
    m.entries_.reserve(a.nnz());
    for (const auto& e : a.entries_) {
        m.entries_.push_back({e.row, e.col, 1});
    }
    m.total_ = a.nnz();
    return m;
}

struct DegreeEntry {
    NodeId id = 0;
    std::uint64_t degree = 0;

    friend bool operator==(const DegreeEntry&, const DegreeEntry&) = default;
};

// Sparse per-node aggregate: ids strictly increasing, degrees >= 1.
class DegreeVector {
public:
    DegreeVector() = default;
    explicit DegreeVector(std::vector<DegreeEntry> entries) : entries_(std::move(entries)) {}

    std::span<const DegreeEntry> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    std::uint64_t sum() const {
        std::uint64_t s = 0;
        for (const auto& e : entries_) s = checked_add(s, e.degree);
        return s;
    }

    std::uint64_t max_degree() const {
        std::uint64_t m = 0;
        for (const auto& e : entries_) m = std::max(m, e.degree);
        return m;
    }

    friend bool operator==(const DegreeVector&, const DegreeVector&) = default;

private:
    std::vector<DegreeEntry> entries_;
};

// Row sums A 1: packets emitted per source, restricted to nonzero results.
inline DegreeVector row_sums(const TrafficMatrix& a) {
    std::vector<DegreeEntry> out;
    auto entries = a.entries();
    for (std::size_t i = 0; i < entries.size();) {
        NodeId row = entries[i].row;
        std::uint64_t sum = 0;
        while (i < entries.size() && entries[i].row == row) {
            sum = checked_add(sum, entries[i].value);
            ++i;
        }
        out.push_back({row, sum});
    }
    return DegreeVector(std::move(out));
}

// Column sums 1^T A: packets received per destination.
inline DegreeVector col_sums(const TrafficMatrix& a) {
    std::vector<std::pair<NodeId, std::uint64_t>> cols;
    cols.reserve(a.nnz());
    for (const auto& e : a.entries()) cols.emplace_back(e.col, e.value);
    std::sort(cols.begin(), cols.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<DegreeEntry> out;
    for (std::size_t i = 0; i < cols.size();) {
        NodeId col = cols[i].first;
        std::uint64_t sum = 0;
        while (i < cols.size() && cols[i].first == col) {
            sum = checked_add(sum, cols[i].second);
            ++i;
        }
        out.push_back({col, sum});
    }
    return DegreeVector(std::move(out));
}

inline std::uint64_t max_value(const TrafficMatrix& a) {
    std::uint64_t m = 0;
    for (const auto& e : a.entries()) m = std::max(m, e.value);
    return m;
}

inline std::uint64_t nnz(const TrafficMatrix& a) { return a.nnz(); }
inline std::uint64_t total(const TrafficMatrix& a) { return a.total(); }

}  // namespace hstm
