use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use nodesum_core::export::{critical_points_json, energies_json, kernel_csv, partner_table, spectrum_table};
use nodesum_core::waveanalysis::{find_extrema, find_nodes};
use nodesum_core::{GKernel, Spectrum};

pub fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes the spectrum, energies, critical points of every state, the
/// kernel of state `n` on a coarse mesh, and the partner table of state `n`
/// when it has a node. Returns the paths written.
pub fn export_all(spectrum: &Spectrum, n: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        write(&path, &text)?;
        written.push(path);
        Ok(())
    };
    put("spectrum.txt", spectrum_table(spectrum))?;
    put("energies.json", energies_json(spectrum))?;
    let mut points = Vec::new();
    for st in &spectrum.states {
        points.extend(find_nodes(st)?);
        points.extend(find_extrema(st)?);
    }
    put("critical_points.json", critical_points_json(&points))?;
    let g = &spectrum.grid;
    let mesh: Vec<f64> = (1..40).map(|k| g.x0 + (g.x1 - g.x0) * k as f64 / 40.0).collect();
    let kernel = GKernel::new(spectrum, n, spectrum.max_truncation())?;
    put("kernel.csv", kernel_csv(&kernel, &mesh)?)?;
    if n > 1 {
        put("partner.txt", partner_table(spectrum, n)?)?;
    }
    Ok(written)
}
