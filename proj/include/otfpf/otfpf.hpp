#pragma once

// Umbrella header for the otfpf library: exact mean-field particle filters
// for linear-Gaussian continuous-time filtering, the optimal-transport
// variant, and the replicated-run variance studies around them.

#include "otfpf/config.hpp"
#include "otfpf/ensemble.hpp"
#include "otfpf/errors.hpp"
#include "otfpf/experiments.hpp"
#include "otfpf/matrix_equations.hpp"
#include "otfpf/model.hpp"
#include "otfpf/report_io.hpp"
#include "otfpf/rng.hpp"
#include "otfpf/transport.hpp"
#include "otfpf/version.hpp"
