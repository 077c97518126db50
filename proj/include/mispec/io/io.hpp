#pragma once

#include "mispec/io/canonical_json.hpp"
#include "mispec/io/instance.hpp"
#include "mispec/io/panel.hpp"
#include "mispec/io/report.hpp"
#include "mispec/io/run.hpp"
