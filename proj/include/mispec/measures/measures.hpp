#pragma once

#include "mispec/measures/density_ratio.hpp"
#include "mispec/measures/ensemble.hpp"
#include "mispec/measures/finite_distribution.hpp"
#include "mispec/measures/parametric.hpp"
#include "mispec/measures/tail_class.hpp"
