//! File-level orchestration: scene manifests, the importance/prune/eval
//! stages and their on-disk artifacts.

mod commands;
mod oracle;
mod report;
mod scene;
mod stages;

pub use commands::{
    cmd_bdrate, cmd_eval, cmd_importance, cmd_oracle, cmd_pipeline, cmd_prune, cmd_synth, manifest_in,
    read_importance, read_spec, read_variant, variant_dir_name, write_report, write_variant, OracleSummary,
    SceneSource, IMPORTANCE_INDEX, ORACLE_FILE, ORACLE_SUMMARY_FILE, REPORT_FILE, SUMMARY_FILE, VARIANT_INDEX,
};
pub use oracle::{run_oracle, OracleResult, OracleRow, ORACLE_MAX_PIXELS};
pub use report::{aggregate, aggregate_psnr, format_db, render_csv, ReportRecord, REPORT_HEADER};
pub use scene::{view_file_stem, Manifest, ManifestView, Scene, MANIFEST_FILE};
pub use stages::{evaluate, make_variant, make_variants, run_importance, BaselineSpec, RunConfig, Variant};
