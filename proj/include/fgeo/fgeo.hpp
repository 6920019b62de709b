#pragma once

#include "fgeo/cdl_parser.hpp"
#include "fgeo/clock.hpp"
#include "fgeo/condition_set.hpp"
#include "fgeo/corpus.hpp"
#include "fgeo/error.hpp"
#include "fgeo/experiment.hpp"
#include "fgeo/frontier.hpp"
#include "fgeo/knowledge_base.hpp"
#include "fgeo/matcher.hpp"
#include "fgeo/pipeline.hpp"
#include "fgeo/polynomial.hpp"
#include "fgeo/predictor.hpp"
#include "fgeo/problem.hpp"
#include "fgeo/rational.hpp"
#include "fgeo/report.hpp"
#include "fgeo/search.hpp"
#include "fgeo/term.hpp"
