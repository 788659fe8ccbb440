//! CSV and key-value writers. Numbers use Rust's shortest round-trip
//! formatting, so equal inputs give byte-identical files.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use quasilin::solver::Solution;

use crate::CliError;

fn io_err(path: &Path, e: impl Display) -> CliError {
    CliError::validation(format!("output: cannot write {}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn write_csv<R, I, S>(path: &Path, header: &[&str], rows: R) -> Result<PathBuf, CliError>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(path.to_path_buf())
}

/// `x, u, u_prime, flux, dist` at every grid point of the solution.
pub fn write_curve(path: &Path, sol: &Solution) -> Result<PathBuf, CliError> {
    let (u, du, flux) = (sol.u(), sol.derivative(), sol.flux());
    let rows = u.points().iter().enumerate().map(|(i, pt)| {
        [pt.x(), u.values()[i], du.values()[i], flux.values()[i], pt.dist()].map(num)
    });
    write_csv(path, &["x", "u", "u_prime", "flux", "dist"], rows)
}

/// Shortest round-trip form, switching to exponent notation for very
/// small or large magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub trait Field {
    fn field(&self) -> String;
}

impl Field for f64 {
    fn field(&self) -> String {
        num(*self)
    }
}

macro_rules! display_field {
    ($($t:ty),*) => {
        $(impl Field for $t {
            fn field(&self) -> String {
                self.to_string()
            }
        })*
    };
}

display_field!(bool, usize, u32, u64, str, String);

impl<T: Field + ?Sized> Field for &T {
    fn field(&self) -> String {
        (**self).field()
    }
}

/// Flat `key=value` lines in insertion order.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn put(&mut self, key: &str, value: impl Field) -> &mut Self {
        self.entries.push((key.to_string(), value.field()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == key).map(|e| e.1.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf, CliError> {
        fs::write(path, self.render()).map_err(|e| io_err(path, e))?;
        Ok(path.to_path_buf())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_renders_in_order() {
        let mut r = Report::new();
        r.put("b", 1.5).put("a", true).put("c", f64::INFINITY);
        assert_eq!(r.render(), "b=1.5\na=true\nc=inf\n");
        r.put("d", 2.0).put("e", 3e-61);
        assert_eq!(r.get("d"), Some("2.0"));
        assert_eq!(r.get("e"), Some("3e-61"));
        assert_eq!(r.get("a"), Some("true"));
    }

    #[test]
    fn shortest_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e20] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.1), "0.1");
        assert!(num(6.2e-61).len() < 10);
    }
}
