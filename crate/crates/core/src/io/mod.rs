//! Text file formats, dataset bundles, PLY export and plot data.

pub mod bundle;
pub mod config;
pub mod export;
pub mod result;
pub mod text;
pub mod trajectory;

pub use bundle::{load_bundle, write_bundle, Bundle, DatasetManifest};
pub use config::RunConfig;
pub use export::{export_ply, format_csv, format_ply, write_csv};
pub use result::{evaluate, read_params, write_params, write_result, ParamErrors, ParamsFile};
pub use trajectory::{read_poses, read_scans, write_poses, write_scans};
