//! Scenario configuration, presets, the simulation pipeline and its outputs.

mod config;
mod output;
mod pipeline;
mod presets;
mod report;
mod series_file;
mod summary;

pub use config::{ScenarioConfig, Switching};
pub use output::{
    digest_file, run_scenario, FileDigest, OutputDir, RunManifest, ARTIFACT_VERSION, CONFIG_NAME,
    MANIFEST_NAME,
};
pub use pipeline::{simulate, PointOutcome, Readout, SimulationOutcome};
pub use presets::{
    gain_for_floor_rms, gain_opt_report, list_presets, preset_config, run_preset,
    write_preset_list, PresetInfo, PresetOutcome, PRESET_C_LO,
};
pub use report::{oracle_report, write_oracle_table, OracleRow};
pub use series_file::{read_series_column, SeriesColumn};
pub use summary::{
    projected_cross, summarize, DickeSummary, PointSummary, ResponseSummary, ScenarioSummary,
    SeriesSummary,
};
