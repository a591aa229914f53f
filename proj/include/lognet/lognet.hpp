#pragma once

#include "lognet/classifiers.hpp"
#include "lognet/core_data.hpp"
#include "lognet/csv_io.hpp"
#include "lognet/error.hpp"
#include "lognet/eval.hpp"
#include "lognet/experiment.hpp"
#include "lognet/gates.hpp"
#include "lognet/models.hpp"
#include "lognet/noise_sim.hpp"
#include "lognet/rng.hpp"
#include "lognet/serialize.hpp"
