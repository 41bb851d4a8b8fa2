#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcp/common.hpp"
#include "rcp/rng.hpp"

namespace rcp {

/// One relabeled supervised example. For continuous actions `action` holds
/// the action vector; for discrete actions `action_index` holds the choice.
/// z_norm and weight are refreshed from the current normalizer and beta when
/// a batch is assembled, so old records follow the current statistics.
struct Transition {
    Vector obs;
    Vector action;
    int action_index = -1;
    double z_raw = 0.0;
    double z_norm = 0.0;
    double weight = 1.0;
};

/// Fixed-capacity FIFO store. Eviction is strictly oldest-first.
template <typename T>
class RingBuffer {
public:
    explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
        require(capacity >= 1, "ring buffer: capacity must be >= 1");
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_inserted() const { return total_; }

    void push(const T& item) {
        if (items_.size() < capacity_) {
            items_.push_back(item);
        } else {
            items_[cursor_] = item;
            cursor_ = (cursor_ + 1) % capacity_;
        }
        ++total_;
    }

    void push(std::span<const T> items) {
        for (const T& t : items) push(t);
    }

    /// k-th oldest stored item, 0 = oldest surviving insertion.
    const T& at(std::size_t k) const { return items_[(cursor_ + k) % items_.size()]; }
    T& at(std::size_t k) { return items_[(cursor_ + k) % items_.size()]; }

    /// `batch_size` uniform draws with replacement over current contents.
    std::vector<T> sample(std::size_t batch_size, Rng& rng) const {
        require(!items_.empty(), "buffer_sample: empty buffer");
        std::vector<T> out;
        out.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i)
            out.push_back(items_[rng.uniform_index(items_.size())]);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;  // next eviction slot once full
    std::uint64_t total_ = 0;
    std::vector<T> items_;
};

using TransitionBuffer = RingBuffer<Transition>;

/// Raw Z of every stored transition. Order is insertion order, but callers
/// must treat the result as a multiset.
Vector buffer_all_values(const TransitionBuffer& buffer);

}  // namespace rcp
