#pragma once

// Umbrella header: everything except the MPFR-backed exact-tail oracle,
// which lives in tristat/exact_tail.hpp and needs -lmpfr -lgmp.

#include "tristat/errors.hpp"
#include "tristat/estimation.hpp"
#include "tristat/format.hpp"
#include "tristat/harness.hpp"
#include "tristat/io.hpp"
#include "tristat/multiplicity.hpp"
#include "tristat/parallel.hpp"
#include "tristat/preprocess.hpp"
#include "tristat/rng.hpp"
#include "tristat/significance.hpp"
#include "tristat/special.hpp"
#include "tristat/synthgen.hpp"
#include "tristat/tensor.hpp"
