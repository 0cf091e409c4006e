#pragma once

#include "idnc/core_model.hpp"
#include "idnc/coding.hpp"
#include "idnc/games.hpp"
#include "idnc/equilibrium.hpp"
#include "idnc/learning.hpp"
#include "idnc/lossy_feedback.hpp"
#include "idnc/episode.hpp"
#include "idnc/harness.hpp"
