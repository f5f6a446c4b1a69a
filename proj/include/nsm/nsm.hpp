#pragma once

#include "nsm/core/cloud_io.hpp"
#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/kdtree.hpp"
#include "nsm/core/log.hpp"
#include "nsm/core/segment_map.hpp"
#include "nsm/core/trajectory.hpp"
#include "nsm/config.hpp"
#include "nsm/eval.hpp"
#include "nsm/features.hpp"
#include "nsm/forest.hpp"
#include "nsm/ground_filter.hpp"
#include "nsm/matching.hpp"
#include "nsm/pipeline.hpp"
#include "nsm/registration.hpp"
#include "nsm/segmentation.hpp"
#include "nsm/synthgen.hpp"
