#pragma once

#include "emacfem/common.hpp"
#include "emacfem/mesh.hpp"
#include "emacfem/elements.hpp"
#include "emacfem/space.hpp"
#include "emacfem/linear_solver.hpp"
#include "emacfem/forms.hpp"
#include "emacfem/diagnostics.hpp"
#include "emacfem/system.hpp"
#include "emacfem/vorticity.hpp"
#include "emacfem/bench.hpp"
#include "emacfem/io.hpp"
#include "emacfem/verify.hpp"
