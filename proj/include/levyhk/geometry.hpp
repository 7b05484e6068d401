#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <string>
#include <vector>

namespace levyhk {

// up to three coordinates, stack storage
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

Point make_point(std::initializer_list<double> xs);
Point parse_point(const std::string& s);  // "x[,y,z]"

struct Interval {
    double a, b;
};

class Domain {
public:
    enum class Kind { IntervalUnion, Ball, Annulus };

    static Domain intervals(std::vector<Interval> parts, double R0 = 0.0);
    static Domain ball(const Point& center, double radius);
    static Domain annulus(const Point& center, double r_in, double r_out);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool bounded() const { return bounded_; }
    bool contains(const Point& x) const;
    double boundary_distance(const Point& x) const;

    // scale (r1, r2) with B(x1, r1) in D in B(x2, r2)
    double r1() const { return r1_; }
    double r2() const { return r2_; }
    const Point& x1() const { return x1_; }
    const Point& x2() const { return x2_; }
    // characteristics of the C^{1,1} condition; Lambda is metadata only
    double R0() const { return R0_; }
    double Lambda() const { return Lambda_; }
    double inradius() const { return r1_; }

    const std::vector<Interval>& parts() const { return parts_; }
    const Point& center() const { return center_; }
    double radius_in() const { return rin_; }
    double radius_out() const { return rout_; }

    std::string describe() const;

private:
    Kind kind_ = Kind::Ball;
    int dim_ = 1;
    bool bounded_ = true;
    std::vector<Interval> parts_;
    Point center_;
    double rin_ = 0.0, rout_ = 0.0;
    double r1_ = 0.0, r2_ = 0.0, R0_ = 0.0, Lambda_ = 0.0;
    Point x1_, x2_;
};

// interval:a,b[;a2,b2...]   ball:cx[,cy,cz],r   annulus:cx[,...],r_in,r_out
Domain parse_domain(const std::string& spec);

enum class SampleRule { Grid, BoundaryLayer };

struct SampleParams {
    int n = 8;                  // grid: points per axis (per interval in 1D)
    std::vector<double> deltas; // boundary layer: prescribed distances
    std::string side = "both";  // 1D: left|right|both; annulus: outer|inner
    Point direction;            // balls/annuli: unit direction (defaults to +e1)
};

std::vector<Point> sample_interior(const Domain& dom, SampleRule rule, const SampleParams& params);

}  // namespace levyhk
