#pragma once

#include "kwseq/model.hpp"
#include "kwseq/plan.hpp"
#include "kwseq/backward.hpp"
#include "kwseq/scalar_min.hpp"
#include "kwseq/evaluate.hpp"
#include "kwseq/error_matching.hpp"
#include "kwseq/baselines.hpp"
#include "kwseq/solve.hpp"
#include "kwseq/plan_io.hpp"
#include "kwseq/report.hpp"
