#pragma once

#include "dnscov/analytics.hpp"    // IWYU pragma: export
#include "dnscov/codecs.hpp"       // IWYU pragma: export
#include "dnscov/config.hpp"       // IWYU pragma: export
#include "dnscov/dns_record.hpp"   // IWYU pragma: export
#include "dnscov/errors.hpp"       // IWYU pragma: export
#include "dnscov/evaluation.hpp"   // IWYU pragma: export
#include "dnscov/features.hpp"     // IWYU pragma: export
#include "dnscov/filters.hpp"      // IWYU pragma: export
#include "dnscov/hostname.hpp"     // IWYU pragma: export
#include "dnscov/jaro_winkler.hpp" // IWYU pragma: export
#include "dnscov/model_io.hpp"     // IWYU pragma: export
#include "dnscov/ocsvm.hpp"        // IWYU pragma: export
#include "dnscov/pipeline.hpp"     // IWYU pragma: export
#include "dnscov/suffix_list.hpp"  // IWYU pragma: export
#include "dnscov/time.hpp"         // IWYU pragma: export
#include "dnscov/traffic_gen.hpp"  // IWYU pragma: export
