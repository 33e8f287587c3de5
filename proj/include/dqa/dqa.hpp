#pragma once

// Umbrella header.

#include "dqa/csv.hpp"
#include "dqa/cv.hpp"
#include "dqa/error.hpp"
#include "dqa/feasibility.hpp"
#include "dqa/forest.hpp"
#include "dqa/ingest.hpp"
#include "dqa/judge.hpp"
#include "dqa/labels.hpp"
#include "dqa/leakage.hpp"
#include "dqa/llm.hpp"
#include "dqa/metrics.hpp"
#include "dqa/parse.hpp"
#include "dqa/prompts.hpp"
#include "dqa/records.hpp"
#include "dqa/report.hpp"
#include "dqa/rng.hpp"
#include "dqa/sha256.hpp"
#include "dqa/strings.hpp"
#include "dqa/text.hpp"
#include "dqa/version.hpp"
