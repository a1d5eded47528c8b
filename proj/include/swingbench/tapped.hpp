#pragma once

// Tapped delay lines feeding the neural networks. The input vector layout is
// fixed: stabilizer-signal taps newest-first, then scaled speed-deviation
// taps newest-first.

#include <deque>
#include <stdexcept>
#include <vector>

namespace swingbench {

class TappedDelays {
public:
    TappedDelays(int n_u, int n_w) : n_u_(n_u), n_w_(n_w) {
        if (n_u < 1 || n_w < 1)
            throw std::invalid_argument("TappedDelays: tap counts must be >= 1");
    }

    void push(double u, double dw_scaled) {
        u_.push_front(u);
        if (static_cast<int>(u_.size()) > n_u_) u_.pop_back();
        w_.push_front(dw_scaled);
        if (static_cast<int>(w_.size()) > n_w_) w_.pop_back();
    }

    bool ready() const {
        return static_cast<int>(u_.size()) == n_u_ &&
               static_cast<int>(w_.size()) == n_w_;
    }

    /// [u(k) ... u(k-n_u+1), dw(k) ... dw(k-n_w+1)]
    std::vector<double> input_vector() const {
        if (!ready()) throw std::runtime_error("TappedDelays: not ready");
        std::vector<double> v;
        v.reserve(n_u_ + n_w_);
        v.insert(v.end(), u_.begin(), u_.end());
        v.insert(v.end(), w_.begin(), w_.end());
        return v;
    }

    void reset() {
        u_.clear();
        w_.clear();
    }

    int n_u() const { return n_u_; }
    int n_w() const { return n_w_; }

private:
    int n_u_;
    int n_w_;
    std::deque<double> u_;
    std::deque<double> w_;
};

/// Delay line over one signal, newest-first.
class DelayLine {
public:
    explicit DelayLine(int n) : n_(n) {
        if (n < 1) throw std::invalid_argument("DelayLine: need >= 1 taps");
    }

    void push(double x) {
        x_.push_front(x);
        if (static_cast<int>(x_.size()) > n_) x_.pop_back();
    }

    bool ready() const { return static_cast<int>(x_.size()) == n_; }

    std::vector<double> taps() const {
        if (!ready()) throw std::runtime_error("DelayLine: not ready");
        return {x_.begin(), x_.end()};
    }

    void reset() { x_.clear(); }

private:
    int n_;
    std::deque<double> x_;
};

} // namespace swingbench
