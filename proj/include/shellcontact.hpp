#pragma once

// Umbrella header for the shell/plate contact library.

#include "shellcontact/config.hpp"
#include "shellcontact/contact.hpp"
#include "shellcontact/errors.hpp"
#include "shellcontact/geometry.hpp"
#include "shellcontact/io.hpp"
#include "shellcontact/mechanics.hpp"
#include "shellcontact/observables.hpp"
#include "shellcontact/solver.hpp"
