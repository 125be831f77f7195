#pragma once

// Umbrella header for the nonlocal interval eigenvalue toolkit.

#include "nlspec/assembly.hpp"
#include "nlspec/config.hpp"
#include "nlspec/experiments.hpp"
#include "nlspec/io.hpp"
#include "nlspec/kernel.hpp"
#include "nlspec/mesh.hpp"
#include "nlspec/minimax.hpp"
#include "nlspec/parallel.hpp"
#include "nlspec/pencil.hpp"
#include "nlspec/quadrature.hpp"
