// fresnel.hpp - Fresnel integrals C(x), S(x)
//
//   C(x) = int_0^x cos(pi t^2 / 2) dt,  S(x) = int_0^x sin(pi t^2 / 2) dt
//
// Power series for |x| <= 1.5, complementary error-function continued
// fraction beyond (modified Lentz).  Absolute error is near machine epsilon.

#pragma once

namespace isac::ambiguity {

struct FresnelCS {
    double c = 0.0;
    double s = 0.0;
};

FresnelCS fresnel(double x);

} // namespace isac::ambiguity
