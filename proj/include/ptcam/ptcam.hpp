#pragma once

#include "banded.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "reproduce.hpp"
#include "sensitivity.hpp"
#include "spectrum.hpp"
#include "validation.hpp"
