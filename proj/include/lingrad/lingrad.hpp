#pragma once

// Umbrella header: the whole public surface.

#include "lingrad/cli.hpp"
#include "lingrad/core.hpp"
#include "lingrad/discrete_gradient.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/expr.hpp"
#include "lingrad/io.hpp"
#include "lingrad/linear_form.hpp"
#include "lingrad/multilinear.hpp"
#include "lingrad/reference.hpp"
#include "lingrad/sampling.hpp"
#include "lingrad/solver.hpp"
#include "lingrad/stepper.hpp"
#include "lingrad/system_file.hpp"
#include "lingrad/systems.hpp"
#include "lingrad/version.hpp"
