//! Multi-task time-series data: generation, CSV ingestion, normalization,
//! windowing and episodic splits.

mod csv_io;
mod series;
mod synth;
mod window;

pub use csv_io::{load_csv, read_csv, save_csv, write_csv, HEADER};
pub use series::{Normalization, SeriesKind, TimeSeries};
pub use synth::{
    generate_synthetic_tasks, generate_with_params, is_daylight, profile_value, sample_params,
    GeneratorParams,
};
pub use window::{
    build_bundle, make_windows, split_support_query, split_with_mode, support_size,
    windows_from_values, BundleOptions, DataBundle, SplitMode, TaskDataset, WindowPair,
    DEFAULT_TEST_HORIZON, DEFAULT_WINDOW,
};
