#pragma once

#include <span>
#include <string>

#include "tsm/market.hpp"

namespace tsm {

// Step interface shared by every pricing algorithm: propose a profile, then
// receive the feedback it produced. Non-contextual learners ignore the context.
class Learner {
public:
    virtual ~Learner() = default;
    virtual PriceProfile propose(std::span<const double> context) = 0;
    virtual void observe(const Feedback& fb) = 0;
    // True once every later profile is fixed regardless of feedback or context.
    virtual bool settled() const { return false; }
    virtual std::string name() const = 0;
};

}  // namespace tsm
