#pragma once

#include "bbpd/adaptive.hpp"
#include "bbpd/adr.hpp"
#include "bbpd/bond_mechanics.hpp"
#include "bbpd/cg.hpp"
#include "bbpd/error.hpp"
#include "bbpd/geometry.hpp"
#include "bbpd/horizon.hpp"
#include "bbpd/implicit.hpp"
#include "bbpd/io.hpp"
#include "bbpd/material.hpp"
#include "bbpd/model.hpp"
#include "bbpd/runner.hpp"
#include "bbpd/scenario.hpp"
#include "bbpd/sparse.hpp"
#include "bbpd/vec.hpp"
