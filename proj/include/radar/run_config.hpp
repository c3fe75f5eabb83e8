#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radar/funnel.hpp"
#include "radar/pipeline.hpp"
#include "radar/retrieval.hpp"
#include "radar/scorers.hpp"
#include "radar/world.hpp"

namespace radar {

struct EvalPlan {
    std::uint32_t k_eval = 200;
    std::uint32_t n_eval_per_user = 20;
    std::uint32_t eval_day = 27;  // holdouts drawn at 12:00 of this day
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    bool cohort_split = false;
};

void validate(const EvalPlan& plan);

// The single experiment configuration, one section per module. The defaults
// form the standard desk-scale setup, so an empty config file runs the full
// default experiment suite.
struct RunConfig {
    WorldConfig world;
    ScorerSet scorers = ScorerSet::defaults();
    RetrievalConfig retrieval;
    PipelineConfig pipeline;
    FunnelConfig funnel;
    EvalPlan eval;
    std::string output_dir = "out";
};

// Validates every section plus the cross-section rules (embedding_rank vs
// latent_dim, ranker vs pre-ranker noise, slate vs store_k).
void validate_run_config(const RunConfig& config);

}  // namespace radar
