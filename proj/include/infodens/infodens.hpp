#ifndef INFODENS_INFODENS_HPP
#define INFODENS_INFODENS_HPP

#include "infodens/cca.hpp"
#include "infodens/errors.hpp"
#include "infodens/fasteval.hpp"
#include "infodens/kernels.hpp"
#include "infodens/oracle.hpp"
#include "infodens/series.hpp"
#include "infodens/specialfn.hpp"
#include "infodens/spectrum.hpp"

#endif // INFODENS_INFODENS_HPP
