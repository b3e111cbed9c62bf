#pragma once

// Umbrella header.

#include "parrondo/classifier.hpp"
#include "parrondo/dynamics.hpp"
#include "parrondo/errors.hpp"
#include "parrondo/linalg.hpp"
#include "parrondo/model.hpp"
#include "parrondo/oracle.hpp"
#include "parrondo/profit.hpp"
#include "parrondo/real.hpp"
