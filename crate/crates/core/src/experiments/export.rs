use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::{pooled_shortage, IntensityEstimate};
use crate::io::read_realizations;
use crate::ode::SolverConfig;
use crate::policy::derive_critical_curves;

/// Rows in an exported curves file.
pub const CURVE_GRID_POINTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportPaths {
    pub intensity: PathBuf,
    pub mean_shortage: PathBuf,
    pub curves: PathBuf,
}

impl ExportPaths {
    pub fn for_prefix(prefix: &Path) -> Self {
        let with = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        Self {
            intensity: with("_intensity.csv"),
            mean_shortage: with("_phi.csv"),
            curves: with("_curves.csv"),
        }
    }
}

/// Fit both estimators on the realizations in `train_csv` and write
/// `<prefix>_intensity.csv`, `<prefix>_phi.csv` and `<prefix>_curves.csv`
/// (`n` curves on a 1024-point grid).
pub fn fit_and_export(
    train_csv: &Path,
    horizon: f64,
    n: usize,
    out_prefix: &Path,
    solver: &SolverConfig,
) -> Result<ExportPaths> {
    let train: Vec<_> = read_realizations(File::open(train_csv)?, horizon)?
        .into_iter()
        .map(|(_, r)| r)
        .collect();
    let intensity = IntensityEstimate::fit(&train, horizon)?;
    let phi = pooled_shortage(&train, |e| e.value)
        .map_err(|_| Error::Schema(format!("{} contains no events", train_csv.display())))?;
    let curves = derive_critical_curves(&intensity.to_intensity(), &phi, n, horizon, solver)?;

    let paths = ExportPaths::for_prefix(out_prefix);
    intensity.write_csv(BufWriter::new(File::create(&paths.intensity)?))?;
    phi.write_csv(BufWriter::new(File::create(&paths.mean_shortage)?))?;
    curves.write_csv(BufWriter::new(File::create(&paths.curves)?), CURVE_GRID_POINTS)?;
    Ok(paths)
}
