#pragma once

#include "specgeo/error.hpp"
#include "specgeo/jet.hpp"
#include "specgeo/expr.hpp"
#include "specgeo/linalg.hpp"
#include "specgeo/charts.hpp"
#include "specgeo/tensor.hpp"
#include "specgeo/finite_difference.hpp"
#include "specgeo/geometry.hpp"
#include "specgeo/cotangent.hpp"
#include "specgeo/verify.hpp"
#include "specgeo/spec_file.hpp"
#include "specgeo/report.hpp"
