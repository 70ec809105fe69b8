use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::bench::BenchRow;
use super::grid::{PhaseCell, PhaseGrid};
use super::trial::TrialRecord;
use crate::error::{DemixError, Result};

const TRIAL_HEADER: [&str; 17] = [
    "algorithm", "n", "s", "m", "basis_phi", "basis_psi", "ensemble", "link", "tau", "seed",
    "cosine", "cos_w", "cos_z", "l2_err", "iters", "time_ms", "success",
];
const PHASE_HEADER: [&str; 5] = ["s", "m", "trials", "successes", "prob"];
const BENCH_HEADER: [&str; 9] = [
    "algorithm", "n", "s", "m", "ensemble", "link", "median_ms", "min_ms", "max_ms",
];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> DemixError + '_ {
    move |source| DemixError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `header` and then `rows`; the header is written explicitly so an
/// empty table still produces it.
fn write_table<T: Serialize, W: Write>(out: W, header: &[&str], rows: &[T], path: &Path) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    wtr.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        wtr.serialize(r).map_err(csv_err(path))?;
    }
    wtr.flush().map_err(|source| DemixError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| DemixError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn export_trials(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_table(create(path)?, &TRIAL_HEADER, records, path)
}

pub fn export_grid(grid: &PhaseGrid, path: &Path) -> Result<()> {
    write_table(create(path)?, &PHASE_HEADER, &grid.cells, path)
}

pub fn export_bench(rows: &[BenchRow], path: &Path) -> Result<()> {
    write_table(create(path)?, &BENCH_HEADER, rows, path)
}

/// Writes the table form to any writer (used for stdout output).
pub fn write_trials_to<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    write_table(out, &TRIAL_HEADER, records, Path::new("<stdout>"))
}

pub fn write_grid_to<W: Write>(grid: &PhaseGrid, out: W) -> Result<()> {
    write_table(out, &PHASE_HEADER, &grid.cells, Path::new("<stdout>"))
}

pub fn write_bench_to<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    write_table(out, &BENCH_HEADER, rows, Path::new("<stdout>"))
}

fn read_table<T: serde::de::DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let found = rdr.headers().map_err(csv_err(path))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(DemixError::InvalidArgument(format!(
            "{}: unexpected header {:?}",
            path.display(),
            found
        )));
    }
    rdr.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_err(path))
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    read_table(path, &TRIAL_HEADER)
}

pub fn read_grid(path: &Path) -> Result<Vec<PhaseCell>> {
    read_table(path, &PHASE_HEADER)
}
