#pragma once

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"
#include "finsler/tensor.hpp"
#include "finsler/kernel.hpp"
#include "finsler/local_geometry.hpp"
#include "finsler/metric.hpp"
#include "finsler/connection.hpp"
#include "finsler/curvature.hpp"
#include "finsler/submanifold.hpp"
#include "finsler/spec_io.hpp"
#include "finsler/harness.hpp"
