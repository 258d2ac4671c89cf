#pragma once

#include "edgebound/bootstrap.hpp"
#include "edgebound/bounds.hpp"
#include "edgebound/distance.hpp"
#include "edgebound/distributions.hpp"
#include "edgebound/errors.hpp"
#include "edgebound/json_io.hpp"
#include "edgebound/moments.hpp"
#include "edgebound/parallel.hpp"
#include "edgebound/rng.hpp"
#include "edgebound/sample.hpp"
#include "edgebound/spd_matrix.hpp"
#include "edgebound/special.hpp"
#include "edgebound/tensor.hpp"
