#pragma once

#include "gifts/error.hpp"
#include "gifts/text.hpp"
#include "gifts/random.hpp"
#include "gifts/attributes.hpp"
#include "gifts/types.hpp"
#include "gifts/json_io.hpp"
#include "gifts/wav.hpp"
#include "gifts/manifest.hpp"
#include "gifts/template.hpp"
#include "gifts/parsers.hpp"
#include "gifts/prompts.hpp"
#include "gifts/backends.hpp"
#include "gifts/mock_backend.hpp"
#include "gifts/http_backend.hpp"
#include "gifts/backend_config.hpp"
#include "gifts/icu.hpp"
#include "gifts/pipeline.hpp"
#include "gifts/metrics.hpp"
#include "gifts/report.hpp"
#include "gifts/jamming.hpp"
#include "gifts/commands.hpp"
