#include "levyhk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "levyhk/errors.hpp"

namespace levyhk {

namespace {

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (tok.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("bad number '" + tok + "'");
        }
    }
    return out;
}

Point unit_e1(int dim) {
    Point e = Point::Zero(dim);
    e(0) = 1.0;
    return e;
}

}  // namespace

Point make_point(std::initializer_list<double> xs) {
    Point p(static_cast<Eigen::Index>(xs.size()));
    int i = 0;
    for (double x : xs) p(i++) = x;
    return p;
}

Point parse_point(const std::string& s) {
    auto v = parse_numbers(s);
    if (v.empty() || v.size() > 3) throw UsageError("point needs 1 to 3 coordinates: '" + s + "'");
    Point p(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) p(i) = v[i];
    return p;
}

Domain Domain::intervals(std::vector<Interval> parts, double R0) {
    if (parts.empty()) throw UsageError("interval union needs at least one interval");
    std::sort(parts.begin(), parts.end(), [](const Interval& x, const Interval& y) { return x.a < y.a; });
    double min_len = std::numeric_limits<double>::infinity(), min_gap = min_len;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (!(parts[i].a < parts[i].b)) throw UsageError("interval needs a < b");
        min_len = std::min(min_len, parts[i].b - parts[i].a);
        if (i > 0) {
            double gap = parts[i].a - parts[i - 1].b;
            if (!(gap > 0.0)) throw UsageError("intervals must be disjoint with positive gaps");
            min_gap = std::min(min_gap, gap);
        }
    }
    double r0 = std::min(min_len, min_gap);
    if (R0 > 0.0) {
        if (R0 > r0) throw UsageError("interval lengths and gaps must be at least R0");
        r0 = R0;
    }
    Domain d;
    d.kind_ = Kind::IntervalUnion;
    d.dim_ = 1;
    d.parts_ = parts;
    d.R0_ = r0;
    d.Lambda_ = 0.0;
    d.bounded_ = std::isfinite(parts.front().a) && std::isfinite(parts.back().b);
    // widest interval witnesses r1
    const Interval* w = &parts.front();
    for (auto& p : parts)
        if (p.b - p.a > w->b - w->a) w = &p;
    d.r1_ = 0.5 * (w->b - w->a);
    d.x1_ = make_point({0.5 * (w->a + w->b)});
    d.r2_ = 0.5 * (parts.back().b - parts.front().a);
    d.x2_ = make_point({0.5 * (parts.back().b + parts.front().a)});
    if (!d.bounded_) {
        d.x1_ = make_point({std::isfinite(w->a) ? w->a + 1.0 : (std::isfinite(w->b) ? w->b - 1.0 : 0.0)});
        d.x2_ = make_point({0.0});
    }
    d.center_ = d.x2_;
    return d;
}

Domain Domain::ball(const Point& center, double radius) {
    if (!(radius > 0.0)) throw UsageError("ball radius must be positive");
    if (center.size() < 1 || center.size() > 3) throw UsageError("ball center needs 1 to 3 coordinates");
    Domain d;
    d.kind_ = Kind::Ball;
    d.dim_ = static_cast<int>(center.size());
    d.center_ = center;
    d.rout_ = radius;
    d.r1_ = d.r2_ = radius;
    d.x1_ = d.x2_ = center;
    d.R0_ = radius;
    d.Lambda_ = 1.0 / radius;
    if (d.dim_ == 1) d.parts_ = {{center(0) - radius, center(0) + radius}};
    return d;
}

Domain Domain::annulus(const Point& center, double r_in, double r_out) {
    if (!(r_in > 0.0 && r_out > r_in)) throw UsageError("annulus needs 0 < r_in < r_out");
    if (center.size() < 2 || center.size() > 3) throw UsageError("annulus needs a 2 or 3 dimensional center");
    Domain d;
    d.kind_ = Kind::Annulus;
    d.dim_ = static_cast<int>(center.size());
    d.center_ = center;
    d.rin_ = r_in;
    d.rout_ = r_out;
    d.r1_ = 0.5 * (r_out - r_in);
    d.x1_ = center + 0.5 * (r_in + r_out) * unit_e1(d.dim_);
    d.r2_ = r_out;
    d.x2_ = center;
    d.R0_ = std::min(r_in, d.r1_);
    d.Lambda_ = 1.0 / r_in;
    return d;
}

bool Domain::contains(const Point& x) const {
    if (x.size() != dim_) throw UsageError("point dimension does not match domain");
    switch (kind_) {
        case Kind::IntervalUnion:
            for (auto& p : parts_)
                if (x(0) > p.a && x(0) < p.b) return true;
            return false;
        case Kind::Ball: return (x - center_).norm() < rout_;
        case Kind::Annulus: {
            double rho = (x - center_).norm();
            return rho > rin_ && rho < rout_;
        }
    }
    return false;
}

double Domain::boundary_distance(const Point& x) const {
    if (x.size() != dim_) throw UsageError("point dimension does not match domain");
    switch (kind_) {
        case Kind::IntervalUnion: {
            double best = std::numeric_limits<double>::infinity();
            for (auto& p : parts_) best = std::min({best, std::abs(x(0) - p.a), std::abs(x(0) - p.b)});
            return best;
        }
        case Kind::Ball: return std::abs((x - center_).norm() - rout_);
        case Kind::Annulus: {
            double rho = (x - center_).norm();
            return std::min(std::abs(rho - rin_), std::abs(rho - rout_));
        }
    }
    return 0.0;
}

std::string Domain::describe() const {
    std::ostringstream os;
    os.precision(10);
    switch (kind_) {
        case Kind::IntervalUnion:
            os << "interval:";
            for (size_t i = 0; i < parts_.size(); ++i) os << (i ? ";" : "") << parts_[i].a << ',' << parts_[i].b;
            break;
        case Kind::Ball:
        case Kind::Annulus:
            os << (kind_ == Kind::Ball ? "ball:" : "annulus:");
            for (int i = 0; i < dim_; ++i) os << center_(i) << ',';
            if (kind_ == Kind::Annulus) os << rin_ << ',';
            os << rout_;
            break;
    }
    return os.str();
}

Domain parse_domain(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("domain spec needs kind:params, got '" + spec + "'");
    std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
    if (kind == "interval") {
        std::vector<Interval> parts;
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ';')) {
            auto v = parse_numbers(item);
            if (v.size() != 2) throw UsageError("interval needs a,b: '" + item + "'");
            parts.push_back({v[0], v[1]});
        }
        return Domain::intervals(parts);
    }
    auto v = parse_numbers(rest);
    if (kind == "ball") {
        if (v.size() < 2 || v.size() > 4) throw UsageError("ball needs cx[,cy,cz],r");
        Point c(static_cast<Eigen::Index>(v.size() - 1));
        for (size_t i = 0; i + 1 < v.size(); ++i) c(i) = v[i];
        return Domain::ball(c, v.back());
    }
    if (kind == "annulus") {
        if (v.size() < 4 || v.size() > 5) throw UsageError("annulus needs cx,cy[,cz],r_in,r_out");
        Point c(static_cast<Eigen::Index>(v.size() - 2));
        for (size_t i = 0; i + 2 < v.size(); ++i) c(i) = v[i];
        return Domain::annulus(c, v[v.size() - 2], v.back());
    }
    throw UsageError("unknown domain kind '" + kind + "'");
}

std::vector<Point> sample_interior(const Domain& dom, SampleRule rule, const SampleParams& prm) {
    std::vector<Point> out;
    if (rule == SampleRule::Grid) {
        if (!dom.bounded()) throw UsageError("grid sampling needs a bounded domain");
        if (prm.n < 1) throw UsageError("grid sampling needs n >= 1");
        if (dom.kind() == Domain::Kind::IntervalUnion) {
            for (auto& p : dom.parts())
                for (int i = 0; i < prm.n; ++i) out.push_back(make_point({p.a + (i + 0.5) * (p.b - p.a) / prm.n}));
            return out;
        }
        // cell-centred grid on the bounding cube, kept where inside
        int d = dom.dim();
        double R = dom.radius_out();
        int total = 1;
        for (int k = 0; k < d; ++k) total *= prm.n;
        for (int idx = 0; idx < total; ++idx) {
            Point x(d);
            int rem = idx;
            for (int k = 0; k < d; ++k) {
                int i = rem % prm.n;
                rem /= prm.n;
                x(k) = dom.center()(k) - R + (i + 0.5) * 2.0 * R / prm.n;
            }
            if (dom.contains(x)) out.push_back(x);
        }
        return out;
    }
    if (prm.deltas.empty()) throw UsageError("boundary-layer sampling needs deltas");
    for (double delta : prm.deltas) {
        if (!(delta > 0.0)) throw UsageError("boundary-layer distance must be positive");
        if (delta >= dom.inradius()) throw UsageError("boundary-layer distance must be below the inradius");
    }
    if (dom.kind() == Domain::Kind::IntervalUnion) {
        // first interval, selectable side
        const Interval& p = dom.parts().front();
        if (prm.side != "left" && prm.side != "right" && prm.side != "both")
            throw UsageError("1D side must be left, right or both");
        for (double delta : prm.deltas) {
            if (2.0 * delta > p.b - p.a) throw UsageError("boundary-layer distance exceeds half the interval");
            if (prm.side != "right") out.push_back(make_point({p.a + delta}));
            if (prm.side != "left") out.push_back(make_point({p.b - delta}));
        }
        return out;
    }
    Point dir = prm.direction.size() == dom.dim() ? Point(prm.direction) : unit_e1(dom.dim());
    if (!(dir.norm() > 0.0)) throw UsageError("direction must be nonzero");
    dir /= dir.norm();
    for (double delta : prm.deltas) {
        double rho;
        if (dom.kind() == Domain::Kind::Ball) rho = dom.radius_out() - delta;
        else if (prm.side == "inner") rho = dom.radius_in() + delta;
        else rho = dom.radius_out() - delta;
        out.push_back(dom.center() + rho * dir);
    }
    return out;
}

}  // namespace levyhk
