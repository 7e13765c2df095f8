#pragma once

#include "gwpark/error.hpp"
#include "gwpark/rng.hpp"
#include "gwpark/distributions.hpp"
#include "gwpark/tree.hpp"
#include "gwpark/tree_sampling.hpp"
#include "gwpark/parking.hpp"
#include "gwpark/theory.hpp"
#include "gwpark/stats.hpp"
#include "gwpark/parallel.hpp"
#include "gwpark/montecarlo.hpp"
#include "gwpark/config.hpp"
#include "gwpark/report.hpp"
