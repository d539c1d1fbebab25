#pragma once

#include "fsiam/geom3d/box.hpp"
#include "fsiam/geom3d/camera.hpp"
#include "fsiam/geom3d/iou.hpp"
#include "fsiam/geom3d/polytope.hpp"
#include "fsiam/geom3d/types.hpp"
