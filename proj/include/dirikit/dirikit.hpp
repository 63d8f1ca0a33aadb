#pragma once

#include "dirikit/beurling.hpp"
#include "dirikit/core.hpp"
#include "dirikit/error.hpp"
#include "dirikit/metrics.hpp"
#include "dirikit/orderiso.hpp"
#include "dirikit/random.hpp"
#include "dirikit/report.hpp"
#include "dirikit/search.hpp"
#include "dirikit/spectral.hpp"
