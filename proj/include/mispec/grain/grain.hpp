#pragma once

#include "mispec/grain/certificate.hpp"
#include "mispec/grain/finite.hpp"
#include "mispec/grain/parametric.hpp"
