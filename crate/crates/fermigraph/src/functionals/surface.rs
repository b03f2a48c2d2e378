//! Tabulated F and F̃ over a lattice of interior densities.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{lieb_f, pure_f, LiebOptions, PureOptions, System};
use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceRow {
    pub rho: Vec<f64>,
    pub lieb: f64,
    pub pure: f64,
}

/// Interior points of {ρ ∈ (1/k)Z^M : Σρ = N, 0 < ρ_i < 1}.
pub fn interior_lattice(m: usize, n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; m];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<f64>>) {
        let m = cur.len();
        if i + 1 == m {
            if left >= 1 && left < k {
                cur[i] = left;
                out.push(cur.iter().map(|&c| c as f64 / k as f64).collect());
            }
            return;
        }
        for c in 1..k.min(left + 1) {
            cur[i] = c;
            rec(i + 1, left - c, cur, k, out);
        }
    }
    if m > 0 {
        rec(0, n * k, &mut cur, k, &mut out);
    }
    out
}

pub fn functional_surface(
    points: &[Vec<f64>],
    sys: &System,
    lieb: &LiebOptions,
    pure: &PureOptions,
) -> Result<Vec<SurfaceRow>> {
    points
        .par_iter()
        .map(|rho| {
            Ok(SurfaceRow {
                rho: rho.clone(),
                lieb: lieb_f(rho, sys, lieb)?.value,
                pure: pure_f(rho, sys, pure)?.value,
            })
        })
        .collect()
}

pub fn write_surface_csv<W: Write>(rows: &[SurfaceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let m = rows.first().map_or(0, |r| r.rho.len());
    let mut header: Vec<String> = (1..=m).map(|i| format!("rho_{i}")).collect();
    header.extend(["F".to_string(), "F_pure".to_string()]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<String> = r.rho.iter().map(|x| x.to_string()).collect();
        rec.push(r.lieb.to_string());
        rec.push(r.pure.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
