#ifndef BBABC_BBABC_HPP
#define BBABC_BBABC_HPP

#include "bbabc/abc.hpp"
#include "bbabc/betabinom.hpp"
#include "bbabc/error.hpp"
#include "bbabc/estimation.hpp"
#include "bbabc/model.hpp"
#include "bbabc/numerics.hpp"
#include "bbabc/parallel.hpp"
#include "bbabc/priors.hpp"
#include "bbabc/random.hpp"
#include "bbabc/study.hpp"
#include "bbabc/summaries.hpp"

#endif  // BBABC_BBABC_HPP
