#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "pvlab/exact2d.hpp"

namespace pvlab::exact2d {

namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;  // 2^-53
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kInCircleBound = (10.0 + 96.0 * kEps) * kEps;

template <class T>
int sign_of(const T& v)
{
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

int orient_exact(const Point<2>& a, const Point<2>& b, const Point<2>& c)
{
    const Rational acx = Rational(a.x()) - Rational(c.x());
    const Rational bcx = Rational(b.x()) - Rational(c.x());
    const Rational acy = Rational(a.y()) - Rational(c.y());
    const Rational bcy = Rational(b.y()) - Rational(c.y());
    return sign_of(Rational(acx * bcy - acy * bcx));
}

int incircle_exact(const Point<2>& a, const Point<2>& b, const Point<2>& c, const Point<2>& d)
{
    const Rational adx = Rational(a.x()) - Rational(d.x());
    const Rational ady = Rational(a.y()) - Rational(d.y());
    const Rational bdx = Rational(b.x()) - Rational(d.x());
    const Rational bdy = Rational(b.y()) - Rational(d.y());
    const Rational cdx = Rational(c.x()) - Rational(d.x());
    const Rational cdy = Rational(c.y()) - Rational(d.y());
    const Rational alift = adx * adx + ady * ady;
    const Rational blift = bdx * bdx + bdy * bdy;
    const Rational clift = cdx * cdx + cdy * cdy;
    const Rational det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy)
                         + clift * (adx * bdy - bdx * ady);
    return sign_of(det);
}

}  // namespace

int orient2d(const Point<2>& a, const Point<2>& b, const Point<2>& c)
{
    const double detleft = (a.x() - c.x()) * (b.y() - c.y());
    const double detright = (a.y() - c.y()) * (b.x() - c.x());
    const double det = detleft - detright;
    const double bound = kOrientBound * (std::abs(detleft) + std::abs(detright));
    if (det > bound || -det > bound)
        return sign_of(det);
    return orient_exact(a, b, c);
}

int incircle(const Point<2>& a, const Point<2>& b, const Point<2>& c, const Point<2>& d)
{
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double alift = adx * adx + ady * ady;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double blift = bdx * bdx + bdy * bdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift
                             + (std::abs(cdxady) + std::abs(adxcdy)) * blift
                             + (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = kInCircleBound * permanent;
    if (det > bound || -det > bound)
        return sign_of(det);
    return incircle_exact(a, b, c, d);
}

}  // namespace pvlab::exact2d
