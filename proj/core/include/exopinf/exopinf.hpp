#pragma once

#include "exopinf/benchmarks.hpp"
#include "exopinf/config.hpp"
#include "exopinf/csv_io.hpp"
#include "exopinf/diagnostics.hpp"
#include "exopinf/errors.hpp"
#include "exopinf/exact_opinf.hpp"
#include "exopinf/experiment.hpp"
#include "exopinf/fom.hpp"
#include "exopinf/galerkin.hpp"
#include "exopinf/gappy_interp.hpp"
#include "exopinf/pod.hpp"
#include "exopinf/tensor_poly.hpp"
