#pragma once

#include "coarse/covering.hpp"
#include "coarse/dimension.hpp"
#include "coarse/error.hpp"
#include "coarse/group.hpp"
#include "coarse/json_io.hpp"
#include "coarse/multiscale.hpp"
#include "coarse/operators.hpp"
#include "coarse/report.hpp"
#include "coarse/scenario.hpp"
#include "coarse/space.hpp"
#include "coarse/trace.hpp"
#include "coarse/transfer.hpp"
