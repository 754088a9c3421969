//! File formats: the snapshot container (JSON), its CSV variant, and the
//! CSV tables written by the harness.
//!
//! Every CSV starts with a `# hetdoa <kind> v<version>` comment line.

mod container;
mod tables;

pub use container::{
    read_snapshots, read_snapshots_csv, snapshots_from_json, snapshots_to_json, write_snapshots,
    write_snapshots_csv, SnapshotFile, CONTAINER_FORMAT, CONTAINER_VERSION,
};
pub use tables::{
    read_rmse_csv, read_spectrum_csv, rmse_csv, sbl_gamma_csv, spectrum_csv, RmseRow, SblRunMeta,
    CSV_SCHEMA_VERSION,
};

/// Byte offset of a 1-based (line, column) position in `text`.
pub(crate) fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}
