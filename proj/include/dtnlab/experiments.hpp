#pragma once

#include "dtnlab/config.hpp"
#include "dtnlab/report.hpp"

namespace dtnlab::lab {

// Experiment runners. Each consumes a validated RunConfig, computes its rows
// and checks, and returns the report; writing files is the caller's concern.
// Failed checks mark the report, they do not throw; genuine numerical
// breakdowns (singular solves, eigensolver failure, a zero distance against a
// nonzero operator difference) surface as exceptions.

report::ExperimentReport run_eig(const config::RunConfig& cfg);
report::ExperimentReport run_dtn(const config::RunConfig& cfg);
report::ExperimentReport run_distance(const config::RunConfig& cfg);
report::ExperimentReport run_lemma_identity(const config::RunConfig& cfg);
report::ExperimentReport run_stability_sweep(const config::RunConfig& cfg);
report::ExperimentReport run_resolvent_limit(const config::RunConfig& cfg);
report::ExperimentReport run_incomplete_data(const config::RunConfig& cfg);
report::ExperimentReport run_uniqueness_probe(const config::RunConfig& cfg);
report::ExperimentReport run_series_convergence(const config::RunConfig& cfg);

// Dispatch by cfg.experiment name (the CLI subcommand names).
report::ExperimentReport run_experiment(const config::RunConfig& cfg);

}  // namespace dtnlab::lab
