use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use relbelief::elicitation::Hyperparameters;
use relbelief::trial_data::TwoArmData;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_data(path: &Path) -> CliResult<TwoArmData> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    Ok(TwoArmData::from_csv_reader(file)?)
}

/// Reads a prior; unknown keys are ignored so `elicit` output can be used directly.
pub fn read_prior(path: &Path) -> CliResult<Hyperparameters> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let hyper: Hyperparameters = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    hyper.validate()?;
    Ok(hyper)
}

/// Writes `bytes` to `path`, or to stdout when there is none.
pub fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(io_err(p)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// CSV with the given header and stringified rows.
pub fn csv_bytes(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Core(relbelief::Error::Parse(e.to_string()));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Core(relbelief::Error::Parse(e.to_string())))
}
