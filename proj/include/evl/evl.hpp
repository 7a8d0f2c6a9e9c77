#pragma once

// Umbrella header: pulls in the whole library.

#include "evl/cohort.hpp"
#include "evl/errors.hpp"
#include "evl/ingest.hpp"
#include "evl/model.hpp"
#include "evl/pnm.hpp"
#include "evl/sweep.hpp"
