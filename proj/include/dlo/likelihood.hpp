#pragma once

#include "dlo/geometry.hpp"

namespace dlo {

// Bradford density on [0, 1]: c / (ln(1 + c) (1 + c x)). Strictly decreasing in x.
double bradford_likelihood(double x, double c);

// Modified Bessel function of the first kind, order zero, by power series
// (asymptotic expansion above x = 500, where the series would overflow).
double bessel_i0(double x);
double log_bessel_i0(double x);

// von Mises density with zero mean: exp(m cos(theta)) / (2 pi I0(m)).
double von_mises(double theta, double m);
double log_von_mises(double theta, double m);

// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

// Orientation of the segment p_from -> p_to in (-pi, pi]. Throws on coincident points.
double edge_angle(Point2 from, Point2 to);

// Argument of the curvature term for two consecutive edge orientations:
// the wrapped turn between them, halved. Lies in (-pi/2, pi/2].
double half_turn(double previous_edge, double next_edge);

}  // namespace dlo
