#include "tsm/contextual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsm {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

Vec as_vec(std::span<const double> x) { return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())); }

uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Keep {<theta,x> <= y} (or >= y). A cut through a body that is already thinner than the
// interior solver can resolve is dropped; one that really misses the body still throws.
void cut(ConvexBody& body, const Vec& x, double y, bool le) {
    try {
        if (le)
            body.cut_le(x, y);
        else
            body.cut_ge(x, y);
    } catch (const Error& e) {
        if (e.code() != Errc::EmptyBody) throw;
        const double hi = body.support(x), lo = -body.support(-x);
        if (hi - lo > 1e-9 || y < lo - 1e-9 || y > hi + 1e-9) throw;
    }
}

}  // namespace

Instance ContextualInstance::at(const Vec& x) const {
    Instance r;
    for (const auto& g : sellers) r.costs.push_back(g.dot(x));
    for (const auto& h : buyers) r.values.push_back(h.dot(x));
    return r;
}

void ContextualInstance::validate() const {
    if (d < 1 || sellers.empty() || buyers.empty()) throw Error(Errc::InvalidInput, "empty contextual instance");
    for (const auto* side : {&sellers, &buyers})
        for (const auto& v : *side) {
            if (v.size() != d) throw Error(Errc::InvalidInput, "feature vector has wrong dimension");
            if (v.norm() > 1 + 1e-12) throw Error(Errc::InvalidInput, "feature vector outside the unit ball");
        }
}

Vec random_orthant_point(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U;
    Vec g(d);
    for (int k = 0; k < d; ++k) g(k) = N(rng);
    const double r = std::pow(U(rng), 1.0 / d);
    return (r / g.norm()) * g.cwiseAbs();
}

ContextualInstance random_contextual_instance(int d, int m, int n, std::mt19937_64& rng) {
    ContextualInstance ci;
    ci.d = d;
    for (int i = 0; i < m; ++i) ci.sellers.push_back(random_orthant_point(d, rng));
    for (int j = 0; j < n; ++j) ci.buyers.push_back(random_orthant_point(d, rng));
    return ci;
}

int scale_index(double w) {
    if (!(w > 1e-18)) return 60;
    int l = static_cast<int>(std::floor(-std::log2(w)));
    while (w > std::ldexp(1.0, -l)) --l;
    while (l < 60 && w <= std::ldexp(1.0, -(l + 1))) ++l;
    return l;
}

int double_scale_index(double w) {
    int l = 0;
    while (l < 6 && w <= std::exp2(-std::exp2(l + 1.0))) ++l;
    return l;
}

SteinerGft::SteinerGft(int d, MonteCarloConfig mc) : d_(d), mc_(mc), body_(d) {}

PriceProfile SteinerGft::propose(std::span<const double> xs) {
    x_ = as_vec(xs);
    width_ = width(body_, x_);
    ell_ = scale_index(width_);
    if (cloud_version_ != body_.version()) {
        clouds_.clear();
        cloud_version_ = body_.version();
    }
    auto& cloud = clouds_[ell_];
    if (!cloud) {
        cloud = std::make_unique<PaddedCloud>(body_, gft_padding(ell_, d_),
                                              mix(mc_.seed, body_.version() * 131 + static_cast<uint64_t>(ell_ + 64)));
        cloud->draw(mc_.samples);
    }
    y_ = clamp01(cloud->threshold(x_, 0.5));
    return PriceProfile::single(y_);
}

void SteinerGft::observe(const Feedback& fb) {
    const bool s = fb.sellers[0], b = fb.buyers[0];
    if (s != b) cut(body_, x_, y_, s);
}

RobustPrices robust_segmented_prices(const std::vector<double>& c_hi, const std::vector<double>& v_lo) {
    const int m = static_cast<int>(c_hi.size()), n = static_cast<int>(v_lo.size());
    std::vector<int> s(m), b(n);
    std::iota(s.begin(), s.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::stable_sort(s.begin(), s.end(), [&](int x, int y) { return c_hi[x] < c_hi[y]; });
    std::stable_sort(b.begin(), b.end(), [&](int x, int y) { return v_lo[x] > v_lo[y]; });
    int k = 0;
    while (k < std::min(m, n) && v_lo[b[k]] >= c_hi[s[k]]) ++k;
    RobustPrices r;
    if (k == 0) {
        r.profile = PriceProfile::segmented(std::vector<uint8_t>(m, 0), 0.0, 0.0, std::vector<uint8_t>(n, 0), 0.0, 0.0);
        return r;
    }
    r.sellers.assign(s.begin(), s.begin() + k);
    r.buyers.assign(b.begin(), b.begin() + k);
    std::sort(r.sellers.begin(), r.sellers.end());
    std::sort(r.buyers.begin(), r.buyers.end());
    std::vector<uint8_t> sg(m, 1), bg(n, 1);
    double p1 = -1e300, q1 = 1e300;
    for (int i : r.sellers) {
        sg[i] = 0;
        p1 = std::max(p1, c_hi[i]);
    }
    for (int j : r.buyers) {
        bg[j] = 0;
        q1 = std::min(q1, v_lo[j]);
    }
    r.profile = PriceProfile::segmented(sg, clamp01(p1), 0.0, bg, clamp01(q1), 1.0);
    return r;
}

EllipsoidSearch::EllipsoidSearch(int d, int m, int n, uint64_t T)
    : d_(d),
      m_(m),
      n_(n),
      delta_(1.0 / static_cast<double>(T)),
      es_(m, Ellipsoid::ball(d)),
      eb_(n, Ellipsoid::ball(d)),
      explored_(m + n, 0) {}

PriceProfile EllipsoidSearch::propose(std::span<const double> xs) {
    x_ = as_vec(xs);
    target_ = -1;
    for (int k = 0; k < m_ + n_ && target_ < 0; ++k) {
        const Ellipsoid& e = k < m_ ? es_[k] : eb_[k - m_];
        if (ellipsoid_width(e, x_) > delta_) {
            target_ = k;
            price_ = clamp01(e.c.dot(x_));
        }
    }
    if (target_ >= 0) return PriceProfile::single(price_);
    std::vector<double> c_hi(m_), v_lo(n_);
    for (int i = 0; i < m_; ++i) c_hi[i] = ellipsoid_support(es_[i], x_);
    for (int j = 0; j < n_; ++j) v_lo[j] = -ellipsoid_support(eb_[j], -x_);
    return robust_segmented_prices(c_hi, v_lo).profile;
}

void EllipsoidSearch::observe(const Feedback& fb) {
    if (target_ < 0) return;
    ++explored_[target_];
    if (target_ < m_) {
        es_[target_] = lj_halfspace_update(es_[target_], x_, fb.sellers[target_] ? Side::Le : Side::Ge, price_);
    } else {
        const int j = target_ - m_;
        eb_[j] = lj_halfspace_update(eb_[j], x_, fb.buyers[j] ? Side::Ge : Side::Le, price_);
    }
}

SteinerProfit::SteinerProfit(int d, int n, uint64_t T, MonteCarloConfig mc)
    : c_lo(n), c_hi(n), v_lo(n), v_hi(n), d_(d), n_(n), T_(static_cast<double>(T)), mc_(mc),
      bs_(n, ConvexBody(d)), bb_(n, ConvexBody(d)) {}

double SteinerProfit::cut_at(bool seller, int idx, bool profit_pad, int ell, double f) {
    const ConvexBody& body = seller ? bs_[idx] : bb_[idx];
    auto& slot = clouds_[{seller, idx, profit_pad, ell}];
    if (!slot.second || slot.first != body.version()) {
        const double rho = profit_pad ? profit_padding(ell, d_) : gft_padding(ell, d_);
        const uint64_t key = mix(mix(mc_.seed, body.version()), (seller ? 1u : 2u) + 4u * idx + 4096u * (profit_pad ? 1u : 0u) +
                                                                   8192u * static_cast<uint64_t>(ell + 64));
        slot.second = std::make_unique<PaddedCloud>(body, rho, key);
        slot.second->draw(mc_.samples);
        slot.first = body.version();
    }
    return slot.second->threshold(x_, f);
}

PriceProfile SteinerProfit::propose(std::span<const double> xs) {
    x_ = as_vec(xs);
    for (int i = 0; i < n_; ++i) {
        c_hi[i] = bs_[i].support(x_, 1e-7);
        c_lo[i] = -bs_[i].support(-x_, 1e-7);
        v_hi[i] = bb_[i].support(x_, 1e-7);
        v_lo[i] = -bb_[i].support(-x_, 1e-7);
    }
    std::vector<int> s(n_), b(n_);
    std::iota(s.begin(), s.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::stable_sort(s.begin(), s.end(), [&](int x, int y) { return c_lo[x] < c_lo[y]; });
    std::stable_sort(b.begin(), b.end(), [&](int x, int y) { return v_hi[x] > v_hi[y]; });
    int k = 1;
    double best = -1e300;
    for (int kk = 1; kk <= n_; ++kk) {
        const double val = kk * (v_hi[b[kk - 1]] - c_lo[s[kk - 1]]);
        if (val > best) {
            best = val;
            k = kk;
        }
    }
    info_ = RoundInfo{};
    info_.k_star = k;
    double pbest = -1e300, qbest = 1e300;
    for (int r = 0; r < k; ++r) {
        const int i = s[r];
        const double w = c_hi[i] - c_lo[i];
        double p = c_hi[i];
        if (w > 1.0 / T_) {
            const int l = double_scale_index(w);
            p = cut_at(true, i, true, l, std::exp2(-std::exp2(l - 1.0))) + profit_padding(l, d_);
        }
        if (p > pbest) {
            pbest = p;
            info_.i_t = i;
        }
        const int j = b[r];
        const double wb = v_hi[j] - v_lo[j];
        double q = v_lo[j];
        if (wb > 1.0 / T_) {
            const int l = double_scale_index(wb);
            q = cut_at(false, j, true, l, 1.0 - std::exp2(-std::exp2(l - 1.0))) - profit_padding(l, d_);
        }
        if (q < qbest) {
            qbest = q;
            info_.j_t = j;
        }
    }
    info_.width_i = c_hi[info_.i_t] - c_lo[info_.i_t];
    info_.width_j = v_hi[info_.j_t] - v_lo[info_.j_t];
    if (pbest <= qbest) {
        last_ = PriceProfile::two(clamp01(pbest), clamp01(qbest));
    } else {
        info_.fallback = true;
        const bool use_seller = info_.width_i >= info_.width_j;
        const double w = use_seller ? info_.width_i : info_.width_j;
        const int idx = use_seller ? info_.i_t : info_.j_t;
        last_ = PriceProfile::single(clamp01(cut_at(use_seller, idx, false, scale_index(w), 0.5)));
    }
    return last_;
}

void SteinerProfit::observe(const Feedback& fb) {
    for (int i = 0; i < n_; ++i) {
        const double p = last_.seller_price(i);
        cut(bs_[i], x_, p, fb.sellers[i]);
    }
    for (int j = 0; j < n_; ++j) {
        const double q = last_.buyer_price(j);
        cut(bb_[j], x_, q, !fb.buyers[j]);
    }
}

}  // namespace tsm
