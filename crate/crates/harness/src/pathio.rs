//! Binary path-set dump.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `LOOPATH1` |
//! | 8 | `N` paths (u64) |
//! | 8 | `I` dates (u64) |
//! | 8 | `J` assets (u64) |
//! | 8 | seed (u64) |
//! | 1 | antithetic flag (0 or 1) |
//! | 8 | discount rate (f64) |
//! | 8·I | exercise times (f64) |
//! | 8·N·I·J | values, path-major then date then asset (f64) |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use loolsm_core::market::{ExerciseSchedule, PathSet};

use crate::error::{HarnessError, Result};

const MAGIC: &[u8; 8] = b"LOOPATH1";

pub fn write_paths<W: Write>(paths: &PathSet, out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(MAGIC)?;
    for v in [paths.n_paths(), paths.n_dates(), paths.n_assets()] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    out.write_all(&paths.seed().to_le_bytes())?;
    out.write_all(&[u8::from(paths.antithetic())])?;
    out.write_all(&paths.rate().to_le_bytes())?;
    for v in paths.times().iter().chain(paths.values()) {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn read_paths<R: Read>(input: R) -> std::result::Result<PathSet, String> {
    let mut input = BufReader::new(input);
    let mut word = [0u8; 8];
    let mut next = |input: &mut BufReader<R>| -> std::result::Result<[u8; 8], String> {
        input.read_exact(&mut word).map_err(|e| format!("truncated header: {e}"))?;
        Ok(word)
    };
    if &next(&mut input)? != MAGIC {
        return Err("not a path dump (bad magic)".into());
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = usize::try_from(u64::from_le_bytes(next(&mut input)?)).map_err(|e| e.to_string())?;
    }
    let [n, dates, assets] = dims;
    let seed = u64::from_le_bytes(next(&mut input)?);
    let mut flag = [0u8; 1];
    input.read_exact(&mut flag).map_err(|e| format!("truncated header: {e}"))?;
    let antithetic = match flag[0] {
        0 => false,
        1 => true,
        other => return Err(format!("antithetic flag must be 0 or 1, found {other}")),
    };
    let rate = f64::from_le_bytes(next(&mut input)?);
    let count = n.checked_mul(dates).and_then(|v| v.checked_mul(assets)).ok_or("dimensions overflow")?;
    let mut read_reals = |len: usize, what: &str| -> std::result::Result<Vec<f64>, String> {
        let mut bytes = vec![0u8; len * 8];
        input.read_exact(&mut bytes).map_err(|e| format!("truncated {what}: {e}"))?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    };
    let times = read_reals(dates, "exercise times")?;
    let values = read_reals(count, "values")?;
    if input.read(&mut [0u8; 1]).map_err(|e| e.to_string())? != 0 {
        return Err("trailing bytes after the values".into());
    }
    let schedule = ExerciseSchedule::new(times).map_err(|e| e.to_string())?;
    PathSet::from_raw(&schedule, rate, assets, values, seed, antithetic).map_err(|e| e.to_string())
}

pub fn dump_paths(paths: &PathSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_paths(paths, file).map_err(|e| HarnessError::io(path, e))
}

pub fn load_paths(path: &Path) -> Result<PathSet> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_paths(file).map_err(|message| HarnessError::Format { path: path.to_path_buf(), message })
}
