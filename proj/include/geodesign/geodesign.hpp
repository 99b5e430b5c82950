#ifndef GEODESIGN_GEODESIGN_HPP
#define GEODESIGN_GEODESIGN_HPP

#include "geodesign/binomial.hpp"
#include "geodesign/covariance.hpp"
#include "geodesign/design.hpp"
#include "geodesign/errors.hpp"
#include "geodesign/estimation.hpp"
#include "geodesign/field.hpp"
#include "geodesign/geometry.hpp"
#include "geodesign/harness.hpp"
#include "geodesign/io.hpp"
#include "geodesign/rng.hpp"

#endif  // GEODESIGN_GEODESIGN_HPP
