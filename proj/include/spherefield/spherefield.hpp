#pragma once

#include "common.hpp"
#include "geometry.hpp"
#include "harmonics.hpp"
#include "gaussian.hpp"
#include "mollifier.hpp"
#include "schedule.hpp"
#include "interaction.hpp"
#include "estimator.hpp"
#include "symmetry.hpp"
