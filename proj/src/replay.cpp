#include "rcp/replay.hpp"

namespace rcp {

Vector buffer_all_values(const TransitionBuffer& buffer) {
    Vector out;
    out.reserve(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) out.push_back(buffer.at(i).z_raw);
    return out;
}

}  // namespace rcp
