#include "tsm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace tsm {

namespace {

// Log-barrier path following for
//   maximize <cobj, z>  s.t.  G z <= h,  |theta| <= 1 - <w, z>,
// where theta is the first d coordinates of z. Returns the last central point;
// the optimum is at most <cobj, z> + (rows + 1) / t.
struct BarrierResult {
    Vec z;
    double value = 0;
    double gap = 0;
};

class Barrier {
public:
    Barrier(int d, const Mat& G, const Vec& h, const Vec& w) : d_(d), G_(G), h_(h), w_(w) {}

    bool feasible(const Vec& z) const {
        if (G_.rows() > 0 && (h_ - G_ * z).minCoeff() <= 0) return false;
        const double u = 1.0 - w_.dot(z);
        if (u <= 0) return false;
        return u * u - z.head(d_).squaredNorm() > 0;
    }

    double value(const Vec& z, const Vec& c, double t) const {
        double f = -t * c.dot(z);
        if (G_.rows() > 0) f -= (h_ - G_ * z).array().log().sum();
        const double u = 1.0 - w_.dot(z);
        f -= std::log(u * u - z.head(d_).squaredNorm());
        return f;
    }

    BarrierResult solve(const Vec& c, Vec z, double tol) const {
        const double m = static_cast<double>(G_.rows()) + 1.0;
        double t = 1.0;
        for (int outer = 0; outer < 200; ++outer) {
            center(c, z, t);
            if (m / t < tol) break;
            t *= 16.0;
        }
        return {z, c.dot(z), m / t};
    }

private:
    void center(const Vec& c, Vec& z, double t) const {
        const int D = static_cast<int>(z.size());
        for (int it = 0; it < 100; ++it) {
            Vec g = -t * c;
            Mat H = Mat::Zero(D, D);
            if (G_.rows() > 0) {
                Vec s = h_ - G_ * z;
                Vec inv = s.cwiseInverse();
                g += G_.transpose() * inv;
                H += G_.transpose() * inv.cwiseAbs2().asDiagonal() * G_;
            }
            const double u = 1.0 - w_.dot(z);
            const double q = u * u - z.head(d_).squaredNorm();
            Vec dq = -2.0 * u * w_;
            dq.head(d_) -= 2.0 * z.head(d_);
            g -= dq / q;
            Mat d2q = 2.0 * w_ * w_.transpose();
            d2q.topLeftCorner(d_, d_) -= 2.0 * Mat::Identity(d_, d_);
            H += -d2q / q + dq * dq.transpose() / (q * q);

            Eigen::LDLT<Mat> ldlt(H);
            Vec step = -ldlt.solve(g);
            if (!step.allFinite()) break;
            const double dec = -g.dot(step);
            if (dec / 2 < 1e-14) break;
            double a = 1.0;
            while (a > 1e-14 && !feasible(z + a * step)) a *= 0.5;
            const double f0 = value(z, c, t);
            while (a > 1e-14 && value(z + a * step, c, t) > f0 - 0.25 * a * dec) a *= 0.5;
            if (a <= 1e-14) break;
            z += a * step;
        }
    }

    int d_;
    const Mat& G_;
    const Vec& h_;
    Vec w_;
};

void stack(const std::vector<Halfspace>& hs, int d, int skip, int extra, Mat& G, Vec& h) {
    const int K = static_cast<int>(hs.size()) - (skip >= 0 ? 1 : 0);
    G.setZero(K, d + extra);
    h.resize(K);
    int r = 0;
    for (int i = 0; i < static_cast<int>(hs.size()); ++i) {
        if (i == skip) continue;
        G.row(r).head(d) = hs[i].a.transpose();
        if (extra) G(r, d) = 1.0;
        h(r) = hs[i].b;
        ++r;
    }
}

// Exact max <x, theta> over the unit ball and the halfspaces by enumerating every candidate
// optimum: x/|x|, the sphere point of each face spanned by up to d-1 active constraints, and
// every vertex inside the ball. Empty when the enumeration is too large or x lies in the span
// of a small active set, where the face optimum is not unique.
std::optional<double> support_enum(const std::vector<Halfspace>& hs, int d, int skip, const Vec& x) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(hs.size()); ++i)
        if (i != skip) idx.push_back(i);
    const int K = static_cast<int>(idx.size());
    double count = 0, binom = 1;
    for (int s = 1; s <= std::min(d, K); ++s) {
        binom = binom * (K - s + 1) / s;
        count += binom;
    }
    if (count > 3000) return std::nullopt;

    const double nx = x.norm();
    if (nx == 0) return 0.0;
    constexpr double feas = 1e-10;
    auto feasible = [&](const Vec& th) {
        if (th.squaredNorm() > 1 + 2 * feas) return false;
        for (int i : idx)
            if (hs[i].a.dot(th) > hs[i].b + feas) return false;
        return true;
    };
    double best = -std::numeric_limits<double>::infinity();
    Vec th = x / nx;
    if (feasible(th)) return nx;

    std::vector<int> S;
    Mat A;
    Vec b, p0, u;
    bool degenerate = false;
    auto visit = [&]() {
        const int k = static_cast<int>(S.size());
        A.resize(k, d);
        b.resize(k);
        for (int r = 0; r < k; ++r) {
            A.row(r) = hs[S[r]].a.transpose();
            b(r) = hs[S[r]].b;
        }
        const Mat G = A * A.transpose();
        Eigen::LDLT<Mat> ldlt(G);
        if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < 1e-10) return;
        p0 = A.transpose() * ldlt.solve(b);
        const double r2 = 1.0 - p0.squaredNorm();
        if (r2 < -2 * feas) return;
        if (k == d) {
            if (feasible(p0)) best = std::max(best, x.dot(p0));
            return;
        }
        u = x - A.transpose() * ldlt.solve(A * x);
        const double nu = u.norm();
        if (nu < 1e-9 * nx) {
            degenerate = true;
            return;
        }
        th = p0 + std::sqrt(std::max(r2, 0.0)) / nu * u;
        if (feasible(th)) best = std::max(best, x.dot(th));
    };
    auto rec = [&](auto&& self, int from) -> void {
        if (degenerate) return;
        if (!S.empty()) visit();
        if (static_cast<int>(S.size()) == d) return;
        for (int i = from; i < K; ++i) {
            S.push_back(idx[i]);
            self(self, i + 1);
            S.pop_back();
        }
    };
    rec(rec, 0);
    if (degenerate || !std::isfinite(best)) return std::nullopt;
    return best;
}

double support_impl(const std::vector<Halfspace>& hs, int d, int skip, const Vec& start, const Vec& x,
                    double tol) {
    if (auto v = support_enum(hs, d, skip, x)) return *v + 1e-12;
    Mat G;
    Vec h;
    stack(hs, d, skip, 0, G, h);
    Barrier bar(d, G, h, Vec::Zero(d));
    auto r = bar.solve(x, start, tol);
    return r.value + r.gap;
}

}  // namespace

ConvexBody::ConvexBody(int d) : d_(d), center_(Vec::Zero(d)) {
    if (d < 1) throw Error(Errc::InvalidInput, "dimension must be positive");
}

double ConvexBody::support(const Vec& x, double tol) const {
    if (hs_.empty()) return x.norm();
    return support_impl(hs_, d_, -1, center_, x, tol);
}

bool ConvexBody::contains(const Vec& theta, double slack) const {
    if (theta.norm() > 1 + slack) return false;
    for (const auto& hsp : hs_)
        if (hsp.a.dot(theta) > hsp.b + slack) return false;
    return true;
}

void ConvexBody::recenter() {
    // maximize s subject to <a,theta> + s <= b and |theta| <= 1 - s
    Mat G;
    Vec h;
    stack(hs_, d_, -1, 1, G, h);
    Vec w = Vec::Zero(d_ + 1);
    w(d_) = 1.0;
    Vec z(d_ + 1);
    z.head(d_) = center_;
    double slack = 1.0 - center_.norm();
    for (const auto& hsp : hs_) slack = std::min(slack, hsp.b - hsp.a.dot(center_));
    z(d_) = slack - 1.0;
    Vec c = Vec::Zero(d_ + 1);
    c(d_) = 1.0;
    Barrier bar(d_, G, h, w);
    auto r = bar.solve(c, z, 1e-12);
    if (!(r.z(d_) > 0)) throw Error(Errc::EmptyBody, "cut leaves no interior");
    center_ = r.z.head(d_);
    inradius_ = r.z(d_);
}

void ConvexBody::prune() {
    for (int i = static_cast<int>(hs_.size()) - 1; i >= 0; --i) {
        const double s = support_impl(hs_, d_, i, center_, hs_[i].a, 1e-11);
        if (s <= hs_[i].b) hs_.erase(hs_.begin() + i);
    }
}

bool ConvexBody::cut_le(const Vec& a, double b) {
    const double na = a.norm();
    if (!(na > 0)) throw Error(Errc::DegenerateDirection, "zero cut normal");
    Halfspace hsp{a / na, b / na};
    if (support(hsp.a, 1e-12) <= hsp.b) return false;
    hs_.push_back(hsp);
    try {
        recenter();
    } catch (...) {
        hs_.pop_back();  // leave the body as it was
        throw;
    }
    prune();
    ++version_;
    return true;
}

bool ConvexBody::padded_member(const Vec& z, double rho) const {
    const double nz = z.norm();
    double worst = nz - 1.0;
    for (const auto& hsp : hs_) worst = std::max(worst, hsp.a.dot(z) - hsp.b);
    if (worst <= 0) return true;
    if (worst > rho) return false;

    // Where the segment from the center to z leaves the body gives an upper bound on the distance.
    const Vec dir = z - center_;
    double t = 1.0;
    for (const auto& hsp : hs_) {
        const double ad = hsp.a.dot(dir);
        if (ad > 0) t = std::min(t, (hsp.b - hsp.a.dot(center_)) / ad);
    }
    if (nz > 1.0) {
        const double A = dir.squaredNorm(), B = center_.dot(dir), C = center_.squaredNorm() - 1.0;
        t = std::min(t, (-B + std::sqrt(B * B - A * C)) / A);
    }
    if ((1.0 - std::max(t, 0.0)) * dir.norm() <= rho) return true;

    // Only constraints within rho of z can be active at a projection closer than rho.
    std::vector<const Halfspace*> near;
    for (const auto& hsp : hs_)
        if (hsp.a.dot(z) - hsp.b > -rho) near.push_back(&hsp);
    const bool ball = nz > 1.0 - rho;
    const int sets = static_cast<int>(near.size()) + (ball ? 1 : 0);
    Vec x = z;
    if (sets == 1) {
        if (ball) {
            if (nz > 1) x = z / nz;
        } else {
            const double v = near[0]->a.dot(z) - near[0]->b;
            if (v > 0) x -= v * near[0]->a;
        }
        return (x - z).norm() <= rho;
    }
    // Dykstra's alternating projections converge to the nearest point.
    Mat inc = Mat::Zero(d_, sets);
    Vec y(d_), before(d_);
    const double tol = rho * 1e-4;
    for (int cyc = 0; cyc < 200; ++cyc) {
        before = x;
        for (int k = 0; k < sets; ++k) {
            y = x + inc.col(k);
            x = y;
            if (ball && k == sets - 1) {
                const double ny = y.norm();
                if (ny > 1) x /= ny;
            } else {
                const double v = near[k]->a.dot(y) - near[k]->b;
                if (v > 0) x -= v * near[k]->a;
            }
            inc.col(k) = y - x;
        }
        if ((x - before).norm() < tol) break;
    }
    return (x - z).norm() <= rho;
}

double width(const ConvexBody& body, const Vec& x, double tol) {
    return body.support(x, tol / 2) + body.support(-x, tol / 2);
}

PaddedCloud::PaddedCloud(const ConvexBody& body, double rho, uint64_t seed)
    : body_(body), rho_(rho), rng_(seed), pts_(body.dim(), 0) {
    const int d = body.dim();
    auto set_frame = [&](const Mat& U) {
        frame_ = U;
        lo_.resize(d);
        hi_.resize(d);
        box_volume_ = 1.0;
        for (int k = 0; k < d; ++k) {
            Vec u = U.col(k);
            // support() is an upper bound, so a loose tolerance only enlarges the box
            const double tol = std::max(1e-10, 1e-3 * rho_);
            hi_(k) = body_.support(u, tol) + rho_;
            lo_(k) = -body_.support(-u, tol) - rho_;
            box_volume_ *= hi_(k) - lo_(k);
        }
    };
    Mat M = 1e-12 * Mat::Identity(d, d);
    for (const auto& hsp : body.halfspaces()) M += hsp.a * hsp.a.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    set_frame(es.eigenvectors());

    draw(2000);
    if (hits() < 500 && hits() >= static_cast<size_t>(2 * d + 2)) {
        Vec mean = pts_.rowwise().mean();
        Mat C = (pts_.colwise() - mean) * (pts_.colwise() - mean).transpose();
        Eigen::SelfAdjointEigenSolver<Mat> pca(C);
        set_frame(pca.eigenvectors());
        drawn_ = 0;
        pts_.resize(d, 0);
    }
}

void PaddedCloud::draw(size_t n) {
    const int d = body_.dim();
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> fresh;
    Vec w(d), z(d);
    for (size_t s = 0; s < n; ++s) {
        for (int k = 0; k < d; ++k) w(k) = lo_(k) + (hi_(k) - lo_(k)) * U(rng_);
        z.noalias() = frame_ * w;
        if (body_.padded_member(z, rho_)) fresh.insert(fresh.end(), z.data(), z.data() + d);
    }
    drawn_ += n;
    const Eigen::Index old = pts_.cols(), add = static_cast<Eigen::Index>(fresh.size()) / d;
    pts_.conservativeResize(d, old + add);
    pts_.rightCols(add) = Eigen::Map<const Mat>(fresh.data(), d, add);
}

VolumeEstimate PaddedCloud::volume() const {
    if (drawn_ == 0) return {};
    const double p = static_cast<double>(hits()) / static_cast<double>(drawn_);
    return {p * box_volume_, box_volume_ * std::sqrt(p * (1 - p) / static_cast<double>(drawn_))};
}

double PaddedCloud::fraction_at_least(const Vec& x, double y) const {
    if (hits() == 0) return 0;
    Vec proj = pts_.transpose() * x;
    return static_cast<double>((proj.array() >= y).count()) / static_cast<double>(hits());
}

double PaddedCloud::threshold(const Vec& x, double f, size_t min_tail, size_t max_draws) {
    const double side = std::min(f, 1 - f);
    while (static_cast<double>(hits()) * side < static_cast<double>(min_tail) && drawn_ < max_draws)
        draw(std::max<size_t>(drawn_, 1000));
    if (hits() == 0) throw Error(Errc::EmptyBody, "no sample landed in the padded body");
    Vec proj = pts_.transpose() * x;
    std::vector<double> v(proj.data(), proj.data() + proj.size());
    const size_t N = v.size();
    size_t cnt = static_cast<size_t>(std::llround(f * static_cast<double>(N)));
    cnt = std::clamp<size_t>(cnt, 1, N);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(N - cnt), v.end());
    return v[N - cnt];
}

VolumeEstimate padded_volume_estimate(const ConvexBody& body, double rho, size_t samples, uint64_t seed) {
    PaddedCloud cloud(body, rho, seed);
    cloud.draw(samples);
    return cloud.volume();
}

double padded_volume(const ConvexBody& body, double rho, size_t samples, uint64_t seed) {
    return padded_volume_estimate(body, rho, samples, seed).value;
}

double bisect_threshold(const ConvexBody& body, double rho, const Vec& x, double f, size_t samples,
                        uint64_t seed) {
    if (!(f > 0 && f < 1)) throw Error(Errc::InvalidInput, "fraction must lie in (0,1)");
    if (width(body, x) + 2 * rho * x.norm() < 1e-12)
        throw Error(Errc::DegenerateDirection, "padded width along x is zero");
    PaddedCloud cloud(body, rho, seed);
    cloud.draw(samples);
    return cloud.threshold(x, f);
}

double gft_padding(int ell, int d) { return std::ldexp(1.0, -ell) / (8.0 * d); }

double profit_padding(int ell, int d) { return std::exp2(-3.0 * std::exp2(ell)) / (16.0 * d); }

Ellipsoid Ellipsoid::ball(int d, double radius) {
    return {Vec::Zero(d), radius * radius * Mat::Identity(d, d)};
}

double Ellipsoid::volume_factor() const { return std::sqrt(A.determinant()); }

bool Ellipsoid::contains(const Vec& x, double slack) const {
    Vec r = x - c;
    return r.dot(A.ldlt().solve(r)) <= 1 + slack;
}

double ellipsoid_width(const Ellipsoid& e, const Vec& x) { return 2.0 * std::sqrt(x.dot(e.A * x)); }

double ellipsoid_support(const Ellipsoid& e, const Vec& x) { return e.c.dot(x) + std::sqrt(x.dot(e.A * x)); }

Ellipsoid lj_halfspace_update(const Ellipsoid& e, const Vec& a, Side keep, double y) {
    // normalise to keep {<g,theta> <= h}
    const Vec g = keep == Side::Le ? a : Vec(-a);
    const double h = keep == Side::Le ? y : -y;
    const double d = e.dim();
    const Vec Ag = e.A * g;
    const double s = std::sqrt(g.dot(Ag));
    if (!(s > 0)) throw Error(Errc::DegenerateDirection, "cut normal has zero extent");
    const double alpha = (g.dot(e.c) - h) / s;
    if (alpha >= 1) throw Error(Errc::CutMissesEllipsoid, "kept half misses the ellipsoid");
    if (e.dim() == 1) {
        // interval arithmetic
        const double lo = std::max(e.c(0) - std::sqrt(e.A(0, 0)), g(0) < 0 ? h / g(0) : -1e300);
        const double hi = std::min(e.c(0) + std::sqrt(e.A(0, 0)), g(0) > 0 ? h / g(0) : 1e300);
        Ellipsoid r = e;
        r.c(0) = 0.5 * (lo + hi);
        r.A(0, 0) = 0.25 * (hi - lo) * (hi - lo);
        return r;
    }
    if (alpha <= -1.0 / d) return e;
    const Vec b = Ag / s;
    Ellipsoid r;
    r.c = e.c - ((1 + d * alpha) / (d + 1)) * b;
    r.A = (d * d / (d * d - 1)) * (1 - alpha * alpha) *
          (e.A - (2 * (1 + d * alpha) / ((d + 1) * (1 + alpha))) * b * b.transpose());
    r.A = 0.5 * (r.A + r.A.transpose());
    return r;
}

double exploration_bound(int d, double R, double delta) {
    return 2.0 * d * d * std::log(20.0 * R * (d + 1) / delta);
}

}  // namespace tsm
