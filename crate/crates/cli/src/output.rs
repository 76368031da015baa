use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::CliError;

/// Writes `body` to `path` through a temporary file in the same directory,
/// so that readers never see a partial file. Without a path, writes stdout.
pub fn emit(path: Option<&Path>, body: &[u8]) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(body)?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| e.error)?;
        }
    }
    Ok(())
}

pub fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(anyon_qism::error::Error::from)?;
    v.push(b'\n');
    Ok(v)
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// Shortest round-trip decimal form, with `-0.0` printed as `0.0`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

pub fn complex(z: Complex64) -> String {
    let z = Complex64::new(z.re + 0.0, z.im + 0.0);
    if z.im.is_sign_negative() {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}
