#pragma once

#include "mispec/alt_notions/notions.hpp"
#include "mispec/alt_notions/simplex.hpp"
