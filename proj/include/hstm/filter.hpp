#pragma once

#include <stdexcept>

#include "hstm/core.hpp"

namespace hstm {

// Validity filter over the packet stream.  An endpoint passes its side
// when it is in the allow set (or the allow set is empty) and not in the
// deny set; a record passes when both endpoints pass.
struct ValidityFilter {
    IdSet src_allow;
    IdSet src_deny;
    IdSet dst_allow;
    IdSet dst_deny;

    void validate() const {
        if (src_allow.intersects(src_deny)) {
            throw std::invalid_argument("hstm: source allow and deny sets overlap");
        }
        if (dst_allow.intersects(dst_deny)) {
            throw std::invalid_argument("hstm: destination allow and deny sets overlap");
        }
    }

    bool empty() const {
        return src_allow.empty() && src_deny.empty() && dst_allow.empty() && dst_deny.empty();
    }

    bool passes(const PacketRecord& rec) const {
        if (!src_allow.empty() && !src_allow.contains(rec.src)) return false;
        if (src_deny.contains(rec.src)) return false;
        if (!dst_allow.empty() && !dst_allow.contains(rec.dst)) return false;
        if (dst_deny.contains(rec.dst)) return false;
        return true;
    }
};

}  // namespace hstm
