#pragma once
#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>
#include <dcpt/core/validate.hpp>
#include <dcpt/metrics/metrics.hpp>
#include <dcpt/pipeline.hpp>
#include <dcpt/sampler/gibbs.hpp>
#include <dcpt/select/projection.hpp>
#include <dcpt/sim/benchmark.hpp>
#include <dcpt/sim/generators.hpp>
#include <dcpt/sim/pelt.hpp>
#include <dcpt/solver/path.hpp>
