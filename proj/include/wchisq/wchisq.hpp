#ifndef WCHISQ_WCHISQ_HPP
#define WCHISQ_WCHISQ_HPP

#include "wchisq/distribution.hpp"
#include "wchisq/error.hpp"
#include "wchisq/model.hpp"
#include "wchisq/oracles.hpp"
#include "wchisq/partial_fractions.hpp"
#include "wchisq/real.hpp"
#include "wchisq/spec_json.hpp"
#include "wchisq/special_functions.hpp"

#endif  // WCHISQ_WCHISQ_HPP
