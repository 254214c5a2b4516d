#ifndef MEDLI_MEDLI_HPP
#define MEDLI_MEDLI_HPP

#include "medli/tolerances.hpp"
#include "medli/error.hpp"
#include "medli/linalg.hpp"
#include "medli/ensembles.hpp"
#include "medli/pgm.hpp"
#include "medli/belavkin.hpp"
#include "medli/certify.hpp"
#include "medli/solver.hpp"
#include "medli/oracle.hpp"
#include "medli/fixed_point.hpp"

#endif  // MEDLI_MEDLI_HPP
