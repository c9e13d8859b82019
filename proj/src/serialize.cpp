// Index image layout (all integers and doubles little-endian):
//
//   "RNNQ" u32 version u32 dim u32 key_bits
//   f64[dim] center  f64 sigma
//   u64 n  f64[n*dim] normalized points
//   n x (u32 owner, u32 nn, f64 r_sq)
//   u64 node_count, per node:
//     u8 kind u8 marked u8 level u8 inner_level u64[dim] anchor u64[dim] inner_anchor
//     u32 parent u32 first_child u32 child_count
//   owners:     per node u32 count, u32[count]
//   candidates: per node u32 count, u32[count]
//   i32 finger_root u64 finger_count, per finger node:
//     u32 separator i32 outside u32 link_begin u32 link_count
//   u64 link_count i32[link_count]

#include <bit>
#include <cstring>
#include <string>

#include "rnnq/errors.hpp"
#include "rnnq/rnn_index.hpp"

namespace rnnq {

namespace {

constexpr char kMagic[4] = {'R', 'N', 'N', 'Q'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw FormatError("index file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    // Guards element counts against the remaining input before allocating.
    std::size_t count(std::uint64_t n, std::size_t min_bytes_each) const {
        if (min_bytes_each && n > (in_.size() - pos_) / min_bytes_each) {
            throw FormatError("index file truncated");
        }
        return static_cast<std::size_t>(n);
    }
    bool done() const { return pos_ == in_.size(); }
    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_box(Writer& w, const QtBox& b, int dim) {
    for (int j = 0; j < dim; ++j) w.u64(b.anchor[j]);
}

QtBox read_box(Reader& r, int level, int dim) {
    QtBox b;
    b.level = level;
    for (int j = 0; j < dim; ++j) b.anchor[j] = r.u64();
    return b;
}

}  // namespace

std::vector<std::uint8_t> RnnIndex::serialize() const {
    Writer w;
    const int d = dim();
    w.bytes(kMagic, 4);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(kKeyBits));
    for (double c : transform_.center) w.f64(c);
    w.f64(transform_.sigma);

    w.u64(size());
    for (double v : points_.coords()) w.f64(v);
    for (const EmptyBall& b : balls_) {
        w.u32(b.owner);
        w.u32(b.nn);
        w.f64(b.r_sq);
    }

    w.u64(tree_.size());
    for (const QtNode& v : tree_.nodes()) {
        w.u8(static_cast<std::uint8_t>(v.kind));
        w.u8(v.marked ? 1 : 0);
        w.u8(static_cast<std::uint8_t>(v.cell.level));
        w.u8(static_cast<std::uint8_t>(v.inner.level));
        write_box(w, v.cell, d);
        write_box(w, v.inner, d);
        w.u32(v.parent);
        w.u32(v.first_child);
        w.u32(v.child_count);
    }
    for (NodeId id = 0; id < tree_.size(); ++id) {
        const auto list = owners(id);
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (PointIndex i : list) w.u32(i);
    }
    for (NodeId id = 0; id < tree_.size(); ++id) {
        const auto list = candidates(id);
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (PointIndex i : list) w.u32(i);
    }

    w.i32(finger_.root());
    w.u64(finger_.nodes().size());
    for (const FingerNode& f : finger_.nodes()) {
        w.u32(f.separator);
        w.i32(f.outside);
        w.u32(f.link_begin);
        w.u32(f.link_count);
    }
    w.u64(finger_.links().size());
    for (std::int32_t l : finger_.links()) w.i32(l);
    return w.take();
}

RnnIndex RnnIndex::deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.take(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("not an index file (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw FormatError("unsupported index format version " + std::to_string(version));
    }
    const std::uint32_t d = r.u32();
    if (d < 1 || d > kMaxDim) throw FormatError("dimension out of range");
    if (r.u32() != kKeyBits) throw FormatError("key width mismatch");
    const int dim = static_cast<int>(d);

    RnnIndex idx;
    idx.transform_.center.resize(dim);
    for (double& c : idx.transform_.center) c = r.f64();
    idx.transform_.sigma = r.f64();

    const std::size_t n = r.count(r.u64(), 8 * d);
    if (n == 0) throw FormatError("empty point set");
    std::vector<double> coords(n * d);
    for (double& v : coords) v = r.f64();
    idx.points_ = PointSet(dim, std::move(coords));
    if (n >= 2) {
        idx.balls_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            EmptyBall& b = idx.balls_[i];
            b.owner = r.u32();
            b.nn = r.u32();
            b.r_sq = r.f64();
            if (b.owner != i || b.nn >= n) throw FormatError("empty ball record out of range");
        }
    }

    const std::size_t m = r.count(r.u64(), 16 + 16 * d);
    std::vector<QtNode> nodes(m);
    for (QtNode& v : nodes) {
        const std::uint8_t kind = r.u8();
        if (kind > 1) throw FormatError("bad node kind");
        v.kind = static_cast<NodeKind>(kind);
        v.marked = r.u8() != 0;
        const int level = r.u8();
        const int inner_level = r.u8();
        v.cell = read_box(r, level, dim);
        v.inner = read_box(r, inner_level, dim);
        v.parent = r.u32();
        v.first_child = r.u32();
        v.child_count = r.u32();
    }
    idx.tree_ = CompressedQuadtree::from_nodes(dim, std::move(nodes));

    const auto read_csr = [&](std::vector<std::uint64_t>& offsets, std::vector<PointIndex>& items) {
        offsets.assign(1, 0);
        items.clear();
        for (std::size_t id = 0; id < m; ++id) {
            const std::size_t len = r.count(r.u32(), 4);
            for (std::size_t k = 0; k < len; ++k) {
                const PointIndex i = r.u32();
                if (i >= n) throw FormatError("point index out of range");
                items.push_back(i);
            }
            offsets.push_back(items.size());
        }
    };
    read_csr(idx.owner_offsets_, idx.owner_items_);
    read_csr(idx.cand_offsets_, idx.cand_items_);

    const std::int32_t froot = r.i32();
    const std::size_t fcount = r.count(r.u64(), 16);
    std::vector<FingerNode> fnodes(fcount);
    for (FingerNode& f : fnodes) {
        f.separator = r.u32();
        f.outside = r.i32();
        f.link_begin = r.u32();
        f.link_count = r.u32();
        if (f.separator >= m) throw FormatError("finger separator out of range");
        const QtNode& sep = idx.tree_.node(f.separator);
        if (f.link_count != sep.child_count) throw FormatError("finger link count mismatch");
    }
    const std::size_t lcount = r.count(r.u64(), 4);
    std::vector<std::int32_t> links(lcount);
    for (std::int32_t& l : links) l = r.i32();
    idx.finger_ = FingerTree::from_parts(std::move(fnodes), std::move(links), froot);

    if (!r.done()) throw FormatError("trailing bytes after index image");
    return idx;
}

}  // namespace rnnq
