#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "tsm/market.hpp"

namespace tsm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Halfspace {
    Vec a;  // unit norm
    double b;
};

// Unit ball intersected with halfspaces <a, theta> <= b.
class ConvexBody {
public:
    explicit ConvexBody(int d);

    int dim() const { return d_; }
    const std::vector<Halfspace>& halfspaces() const { return hs_; }
    // Center of a large inscribed ball; strictly interior.
    const Vec& center() const { return center_; }
    double inradius() const { return inradius_; }
    // Bumped on every effective cut; used as a cache key.
    uint64_t version() const { return version_; }

    // Upper bound on max <theta, x>, at most tol above the true value.
    double support(const Vec& x, double tol = 1e-9) const;
    bool contains(const Vec& theta, double slack = 0) const;

    // Intersect with <a, theta> <= b. Returns false if the cut removes nothing.
    // Throws EmptyBody if nothing of positive volume is left.
    bool cut_le(const Vec& a, double b);
    bool cut_ge(const Vec& a, double y) { return cut_le(-a, -y); }

    // Is the distance from z to the body at most rho?
    bool padded_member(const Vec& z, double rho) const;

private:
    void recenter();
    void prune();

    int d_;
    std::vector<Halfspace> hs_;
    Vec center_;
    double inradius_ = 1.0;
    uint64_t version_ = 0;
};

// max <theta,x> - min <theta,x> over the body, within tol.
double width(const ConvexBody& body, const Vec& x, double tol = 1e-9);

struct VolumeEstimate {
    double value = 0;
    double std_error = 0;
};

// Uniform samples of an oriented bounding box of body + rho*ball, kept when they
// land in the padded body. Deterministic for a given seed.
class PaddedCloud {
public:
    PaddedCloud(const ConvexBody& body, double rho, uint64_t seed);

    void draw(size_t n);
    size_t drawn() const { return drawn_; }
    size_t hits() const { return static_cast<size_t>(pts_.cols()); }
    VolumeEstimate volume() const;

    double fraction_at_least(const Vec& x, double y) const;
    // y with the given fraction of hits on {<theta,x> >= y}; draws more points
    // until the smaller side holds at least min_tail hits.
    double threshold(const Vec& x, double f, size_t min_tail = 200, size_t max_draws = 4000000);

    const ConvexBody& body() const { return body_; }
    double rho() const { return rho_; }

private:
    void append(const Vec& z);

    ConvexBody body_;
    double rho_;
    std::mt19937_64 rng_;
    Mat frame_;  // columns are box axes
    Vec lo_, hi_;
    double box_volume_ = 0;
    size_t drawn_ = 0;
    Mat pts_;
};

VolumeEstimate padded_volume_estimate(const ConvexBody& body, double rho, size_t samples = 200000,
                                      uint64_t seed = 1);
double padded_volume(const ConvexBody& body, double rho, size_t samples = 200000, uint64_t seed = 1);
// Throws DegenerateDirection when the padded width along x is below 1e-12.
double bisect_threshold(const ConvexBody& body, double rho, const Vec& x, double f,
                        size_t samples = 200000, uint64_t seed = 1);

double gft_padding(int ell, int d);     // 2^-ell / (8d)
double profit_padding(int ell, int d);  // 2^(-3 * 2^ell) / (16d)

struct Ellipsoid {
    Vec c;
    Mat A;

    static Ellipsoid ball(int d, double radius = 1.0);
    int dim() const { return static_cast<int>(c.size()); }
    double volume_factor() const;  // sqrt(det A)
    bool contains(const Vec& x, double slack = 1e-9) const;
};

enum class Side { Le, Ge };

// Minimum-volume ellipsoid containing e intersected with {<a,theta> (<= | >=) y}.
Ellipsoid lj_halfspace_update(const Ellipsoid& e, const Vec& a, Side keep, double y);
double ellipsoid_width(const Ellipsoid& e, const Vec& x);
double ellipsoid_support(const Ellipsoid& e, const Vec& x);  // max <theta,x>

// Maximum number of width > delta cuts before every width is at most delta.
double exploration_bound(int d, double R, double delta);

}  // namespace tsm
