#pragma once

// Everything except the harness and the allocation hook implementation.

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/math.hpp>
#include <adfsmc/core/model.hpp>
#include <adfsmc/core/rng.hpp>
#include <adfsmc/core/alloc_hook.hpp>

#include <adfsmc/approx/scheme.hpp>
#include <adfsmc/approx/gaussian.hpp>
#include <adfsmc/approx/mixture.hpp>
#include <adfsmc/approx/discrete.hpp>
#include <adfsmc/approx/param_approx.hpp>

#include <adfsmc/filter/resample.hpp>
#include <adfsmc/filter/particle_store.hpp>
#include <adfsmc/filter/config.hpp>
#include <adfsmc/filter/run_result.hpp>
#include <adfsmc/filter/summary.hpp>
#include <adfsmc/filter/api.hpp>
#include <adfsmc/filter/bootstrap.hpp>
#include <adfsmc/filter/pmmh.hpp>

#include <adfsmc/models/sin.hpp>
#include <adfsmc/models/linear_gaussian.hpp>
#include <adfsmc/models/slam.hpp>
#include <adfsmc/models/instances.hpp>

#include <adfsmc/oracles/kalman.hpp>
#include <adfsmc/oracles/grid_posterior.hpp>
#include <adfsmc/oracles/slam_exact.hpp>
#include <adfsmc/oracles/metrics.hpp>
