#pragma once

#include "subspace_qsl/bounds.hpp"
#include "subspace_qsl/config.hpp"
#include "subspace_qsl/dynamics.hpp"
#include "subspace_qsl/error.hpp"
#include "subspace_qsl/geometry.hpp"
#include "subspace_qsl/operators.hpp"
#include "subspace_qsl/random.hpp"
#include "subspace_qsl/verify.hpp"
