/*
 * Copyright (c) 2026, the gmrflogdet authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <complex>

namespace gmrf {

/// Complete elliptic integrals of the first kind K(k) and K(k') for the
/// parameter m = k^2 = exp(-2*pi*L), 0 < L < inf. Working with L instead of
/// m keeps full accuracy when m underflows (k -> 0) or 1-m underflows
/// (k -> 1). Arithmetic-geometric mean iteration; for L > 10 the O(m)
/// asymptotics K = pi/2, K' = pi*L + log(4) are already at machine accuracy.
void ellipkkp(double big_l, double& k, double& kp);

/// Jacobi elliptic functions sn(u|m), cn(u|m), dn(u|m) for complex argument
/// u and parameter m = exp(-2*pi*L), evaluated by the descending Landen
/// transformation. The argument is expected inside the fundamental
/// rectangle |Re u| <= K, 0 <= Im u <= K'.
struct JacobiValues {
    std::complex<double> sn;
    std::complex<double> cn;
    std::complex<double> dn;
};

JacobiValues ellipjc(std::complex<double> u, double big_l);

}  // namespace gmrf
