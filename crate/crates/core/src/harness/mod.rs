//! Experiment drivers, configuration and output.

pub mod config;
pub mod run;
pub mod semiclassical;

pub use config::{
    load_spec, validate_config, validate_spec, Experiment, ExperimentSpec, InitialSpec,
    MeanFieldSpec, Monitors, Overrides, RunSpec, SpinSpec,
};
pub use run::{
    build_initial, execute, write_meanfield, write_semiclassical, Manifest, MonitorSummary, Verdict,
};
pub use semiclassical::{
    monotone_in_hbar, run_semiclassical_study, GaugeSpec, InitialData, PairingRow,
    SemiclassicalConfig, SemiclassicalResult, SemiclassicalRow, VlasovSpec,
};
