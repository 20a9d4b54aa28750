#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace rulenet {

// Fixed-width packed bit vector. Word-parallel ops keep the unused tail
// bits of the last word zero, so count()/equality work on whole words.
class BitVec {
public:
    BitVec() = default;

    explicit BitVec(std::size_t size, bool value = false)
        : size_(size), words_(word_count(size), value ? ~std::uint64_t{0} : 0) {
        mask_tail();
    }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool get(std::size_t i) const {
        assert(i < size_);
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(std::size_t i, bool value = true) {
        assert(i < size_);
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (value)
            words_[i >> 6] |= bit;
        else
            words_[i >> 6] &= ~bit;
    }

    void reset(std::size_t i) { set(i, false); }

    void set_all(bool value) {
        for (auto& w : words_) w = value ? ~std::uint64_t{0} : 0;
        mask_tail();
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }

    bool none() const { return !any(); }

    // True iff every set bit of *this is also set in other.
    bool is_subset_of(const BitVec& other) const {
        assert(size_ == other.size_);
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w] & ~other.words_[w]) return false;
        return true;
    }

    BitVec& operator&=(const BitVec& other) {
        assert(size_ == other.size_);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
        return *this;
    }

    BitVec& operator|=(const BitVec& other) {
        assert(size_ == other.size_);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
        return *this;
    }

    BitVec& operator^=(const BitVec& other) {
        assert(size_ == other.size_);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
        return *this;
    }

    friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }
    friend BitVec operator|(BitVec a, const BitVec& b) { return a |= b; }
    friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }

    BitVec operator~() const {
        BitVec r(*this);
        for (auto& w : r.words_) w = ~w;
        r.mask_tail();
        return r;
    }

    friend bool operator==(const BitVec& a, const BitVec& b) {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }
    friend bool operator!=(const BitVec& a, const BitVec& b) { return !(a == b); }

    // Number of positions where the two vectors agree.
    static std::size_t match_count(const BitVec& a, const BitVec& b) {
        assert(a.size_ == b.size_);
        std::size_t diff = 0;
        for (std::size_t w = 0; w < a.words_.size(); ++w)
            diff += static_cast<std::size_t>(std::popcount(a.words_[w] ^ b.words_[w]));
        return a.size_ - diff;
    }

    template <typename F>
    void for_each_set(F&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t word = words_[w];
            while (word) {
                const int b = std::countr_zero(word);
                fn((w << 6) + static_cast<std::size_t>(b));
                word &= word - 1;
            }
        }
    }

    // Ascending indices of set bits.
    std::vector<std::size_t> set_bits() const {
        std::vector<std::size_t> out;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t word = words_[w];
            while (word) {
                const int b = std::countr_zero(word);
                out.push_back((w << 6) + static_cast<std::size_t>(b));
                word &= word - 1;
            }
        }
        return out;
    }

private:
    static std::size_t word_count(std::size_t size) { return (size + 63) >> 6; }

    void mask_tail() {
        const std::size_t rem = size_ & 63;
        if (rem != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << rem) - 1;
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace rulenet
