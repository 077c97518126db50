#pragma once

#include "mispec/rationalizer/construct.hpp"
#include "mispec/rationalizer/finite_check.hpp"
#include "mispec/rationalizer/model.hpp"
#include "mispec/rationalizer/partition.hpp"
#include "mispec/rationalizer/tails.hpp"
#include "mispec/rationalizer/verdict.hpp"
