//! Error measurement, bound checks, sweeps and size comparison reports.

pub mod norms;
pub mod sweep;
pub mod table1;

pub use norms::{
    check_bound, default_lp_nodes, default_sup_points, gauss_l2_error, lp_error, lp_errors, sup_error, ErrorReport,
    Measurement, NormKind, Resolution, PASS_SLACK,
};
pub use sweep::{
    default_bounds, default_norm, default_target, fit_and_check, measure, measure_net, monotone_anomalies, sweep, FitCheck,
    MeasureOpts, SweepRow, SweepTable,
};
pub use table1::{default_table1_configs, table1_report, Table1Config, Table1Point, Table1Report, Table1Row};
