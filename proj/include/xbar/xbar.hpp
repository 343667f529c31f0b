#ifndef XBAR_XBAR_HPP
#define XBAR_XBAR_HPP

#include "analysis.hpp"
#include "config.hpp"
#include "engine.hpp"
#include "matching.hpp"
#include "policies.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "switch_core.hpp"

#endif // XBAR_XBAR_HPP
