#pragma once

#include "vem/element.hpp"
#include "vem/errors.hpp"
#include "vem/geometry.hpp"
#include "vem/mesh.hpp"
#include "vem/mesh_generators.hpp"
#include "vem/mesh_io.hpp"
#include "vem/monomial.hpp"
#include "vem/postproc.hpp"
#include "vem/problems.hpp"
#include "vem/projection.hpp"
#include "vem/quadrature.hpp"
#include "vem/study.hpp"
#include "vem/system.hpp"
