#pragma once

#include "bridgewatch/comms.hpp"
#include "bridgewatch/ingest.hpp"
#include "bridgewatch/report.hpp"
#include "bridgewatch/simulate.hpp"
#include "test_support.hpp"

#include <memory>
#include <vector>

namespace bwtest {

struct PipelineRun {
    std::unique_ptr<TempDir> dir;
    bridgewatch::Scenario scenario;
    bridgewatch::GroundTruth truth;
    bridgewatch::LoadedSession loaded;
    bridgewatch::AnalysisConfig config;
    bridgewatch::EntityLexicon lexicon;
    std::vector<bridgewatch::ChecklistDefinition> checklists;
    bridgewatch::SessionReport report;
};

// simulate -> write -> load -> analyse, through the library API.
inline PipelineRun run_pipeline(const bridgewatch::Scenario& scenario) {
    using namespace bridgewatch;
    PipelineRun r;
    r.dir = std::make_unique<TempDir>("pipeline");
    r.scenario = scenario;
    r.truth = generate_session(scenario, r.dir->path());
    r.loaded = load_session(r.dir->path());
    r.config = load_config(r.dir->path() / "config.json");
    r.lexicon = parse_lexicon_json(read_file(r.config.entities_path));
    for (const std::string& p : r.config.checklist_paths) {
        r.checklists.push_back(parse_checklist_json(read_file(p)));
    }
    r.report = build_report(r.loaded.session, r.config, r.lexicon, r.checklists);
    return r;
}

inline const PipelineRun& default_run() {
    static const PipelineRun run = run_pipeline(bridgewatch::default_scenario());
    return run;
}

}  // namespace bwtest
