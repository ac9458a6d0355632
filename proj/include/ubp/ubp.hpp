#ifndef UBP_UBP_HPP
#define UBP_UBP_HPP

// Universal H-linear portfolio selection: multilinear trading strategies,
// hindsight optima, performance-weighted universal portfolios, and their
// competitive-ratio guarantees.

#include "ubp/analysis.hpp"
#include "ubp/hindsight.hpp"
#include "ubp/hotstock.hpp"
#include "ubp/market_data.hpp"
#include "ubp/numerics.hpp"
#include "ubp/quadrature.hpp"
#include "ubp/strategy.hpp"
#include "ubp/universal.hpp"

#endif  // UBP_UBP_HPP
