#ifndef GPCC_GPCC_HPP_
#define GPCC_GPCC_HPP_

#include "gpcc/baselines.hpp"
#include "gpcc/commands.hpp"
#include "gpcc/config.hpp"
#include "gpcc/copula.hpp"
#include "gpcc/csv.hpp"
#include "gpcc/ep.hpp"
#include "gpcc/errors.hpp"
#include "gpcc/eval.hpp"
#include "gpcc/gp_prior.hpp"
#include "gpcc/marginals.hpp"
#include "gpcc/timeseries.hpp"

#endif // GPCC_GPCC_HPP_
