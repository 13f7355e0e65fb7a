//! Plain-text and JSON renderings of spectra, critical points, kernels and
//! partner problems.

use std::fmt::Write as _;

use serde::Serialize;

use crate::eigensolver::Spectrum;
use crate::error::Result;
use crate::greenfn::GKernel;
use crate::susy::{partner_potential_at, partner_solutions, walled_grid};
use crate::waveanalysis::{CriticalKind, CriticalPoint};

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns `x  V(x)  psi_1 ... psi_N`, one row per grid point.
pub fn spectrum_table(spectrum: &Spectrum) -> String {
    let mut out = String::from("# x  V(x)");
    for j in 1..=spectrum.count() {
        let _ = write!(out, "  psi_{j}");
    }
    out.push('\n');
    for k in 0..spectrum.grid.n_points {
        let x = spectrum.grid.point(k);
        out.push_str(&num(x));
        out.push_str("  ");
        out.push_str(&num(spectrum.potential.value(x)));
        for s in &spectrum.states {
            out.push_str("  ");
            out.push_str(&num(s.values[k]));
        }
        out.push('\n');
    }
    out
}

pub fn energies_json(spectrum: &Spectrum) -> String {
    serde_json::to_string_pretty(&spectrum.energies()).expect("finite energies serialize")
}

#[derive(Serialize)]
struct CensusEntry {
    kind: CriticalKind,
    location: f64,
    owner_index: usize,
}

pub fn critical_points_json(points: &[CriticalPoint]) -> String {
    let entries: Vec<CensusEntry> = points
        .iter()
        .map(|p| CensusEntry {
            kind: p.kind,
            location: p.location,
            owner_index: p.owner_index,
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("census serializes")
}

/// `r,r_tilde,G` rows over all ordered pairs of `points`.
pub fn kernel_csv(kernel: &GKernel<'_>, points: &[f64]) -> Result<String> {
    let table = kernel.table(points)?;
    let mut out = String::from("r,r_tilde,G\n");
    for (i, &r) in points.iter().enumerate() {
        for (k, &rt) in points.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", num(r), num(rt), num(table[i][k]));
        }
    }
    Ok(out)
}

/// Columns `r  V(r)  V1(r)  phi1  phi2` on the interior of the walled grid.
pub fn partner_table(spectrum: &Spectrum, n: usize) -> Result<String> {
    let grid = walled_grid(spectrum, n)?;
    let points: Vec<f64> = (1..grid.last()).map(|k| grid.point(k)).collect();
    let sol = partner_solutions(spectrum, n, &points)?;
    let mut out = String::from("# r  V(r)  V1(r)  phi1  phi2\n");
    for (i, &r) in points.iter().enumerate() {
        let v1 = partner_potential_at(spectrum, n, r)?;
        let _ = writeln!(
            out,
            "{}  {}  {}  {}  {}",
            num(r),
            num(spectrum.potential.value(r)),
            num(v1),
            num(sol.phi1[i]),
            num(sol.phi2[i])
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::analytic_box_spectrum;
    use crate::grid::build_grid;
    use crate::waveanalysis::find_nodes;
    use std::f64::consts::PI;

    #[test]
    fn spectrum_table_layout() {
        let s = analytic_box_spectrum(&build_grid(0.0, PI, 11).unwrap(), 2).unwrap();
        let text = spectrum_table(&s);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# x  V(x)  psi_1  psi_2");
        assert_eq!(lines.len(), 12);
        let row: Vec<f64> = lines[6].split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(row[0], s.grid.point(5));
        assert_eq!(row[2], s.states[0].values[5]);
        assert_eq!(energies_json(&s).replace(char::is_whitespace, ""), "[1.0,4.0]");
    }

    #[test]
    fn census_and_partner_exports() {
        let s = analytic_box_spectrum(&build_grid(0.0, PI, 201).unwrap(), 3).unwrap();
        let nodes = find_nodes(&s.states[2]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&critical_points_json(&nodes)).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
        assert_eq!(v[0]["kind"], "Node");
        assert_eq!(v[1]["owner_index"], 3);
        let t = partner_table(&s, 2).unwrap();
        assert!(t.lines().count() > 90);
        let k = GKernel::new(&s, 1, 3).unwrap();
        assert_eq!(kernel_csv(&k, &[1.0, 2.0]).unwrap().lines().count(), 5);
    }
}
