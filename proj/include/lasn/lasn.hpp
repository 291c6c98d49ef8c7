#pragma once

#include "lasn/bench.hpp"
#include "lasn/bounds.hpp"
#include "lasn/dataset.hpp"
#include "lasn/errors.hpp"
#include "lasn/kernel.hpp"
#include "lasn/landmark.hpp"
#include "lasn/linalg.hpp"
#include "lasn/matrix.hpp"
#include "lasn/model.hpp"
#include "lasn/nystrom.hpp"
#include "lasn/oracle.hpp"
#include "lasn/rng.hpp"
#include "lasn/snewton.hpp"
#include "lasn/sparse.hpp"
#include "lasn/synth.hpp"
