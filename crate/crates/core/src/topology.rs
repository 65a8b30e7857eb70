// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Chern numbers (lattice link-variable method), the Z₂ index from ribbon edge
//! crossings, and classification of points in the β-λ plane.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::Determinant;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{conj_t, eigh_into};
use crate::model::{bloch_hamiltonian, ribbon_hamiltonian, spin_sector, ModelParams, Spin};
use crate::spectra::{
    bulk_bands, periodic_grid, refine_gap, refined_gap_in_window, GapReport, DEFAULT_GAP_THRESHOLD,
};

/// Maximum distance of the field-strength sum from an integer.
pub const CHERN_ROUNDING_TOL: f64 = 0.01;

/// Minimum direct gap between selected and unselected bands at any grid point.
const BAND_SEPARATION_TOL: f64 = 1e-6;

/// Default Fermi energy: middle of the `(t0, 2t0)` window.
pub const DEFAULT_FERMI_ENERGY: f64 = 1.5;

pub const DEFAULT_WINDOW: (f64, f64) = (1.0, 2.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinSector {
    /// Full spinful Bloch Hamiltonian.
    Full,
    /// One spin block; requires β = 0.
    Only(Spin),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BandSelector {
    /// Every band below this energy.
    Below(f64),
    /// Explicit band indices counted from the bottom.
    Indices(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernNumber {
    pub value: i32,
    /// Field-strength sum before rounding.
    pub raw: f64,
}

impl ChernNumber {
    pub fn residual(&self) -> f64 {
        (self.raw - self.value as f64).abs()
    }
}

fn sector_hamiltonian(params: &ModelParams, sector: SpinSector, kx: f64, ky: f64) -> Result<Array2<C64>> {
    let h = bloch_hamiltonian(params, kx, ky)?;
    Ok(match sector {
        SpinSector::Full => h.to_dense(),
        SpinSector::Only(spin) => spin_sector(&h, spin)?.to_dense(),
    })
}

/// Chern number of the selected bands on a `grid.0 x grid.1` discretization of
/// the magnetic Brillouin zone.
///
/// Sign convention: curvature of the connection `A = i<u|grad u>`, so each
/// plaquette contributes minus the phase of its link-variable product.
pub fn chern_fhs(
    params: &ModelParams,
    sector: SpinSector,
    selector: &BandSelector,
    grid: (usize, usize),
) -> Result<ChernNumber> {
    let (nkx, nky) = grid;
    if nkx < 24 || nky < 24 {
        return Err(Error::param(format!("Chern grid must be at least 24x24, got {nkx}x{nky}")));
    }
    if matches!(sector, SpinSector::Only(_)) && params.beta != 0.0 {
        return Err(Error::Domain(format!(
            "spin-resolved Chern number needs beta = 0, got {}",
            params.beta
        )));
    }
    let cell = params.alpha.magnetic_cell_height() as f64;
    let kxs = periodic_grid(nkx);
    let kys: Vec<f64> = periodic_grid(nky).into_iter().map(|k| k / cell).collect();

    let solved = (0..nkx * nky)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nky, idx % nky);
            eigh_into(sector_hamiltonian(params, sector, kxs[i], kys[j])?)
        })
        .collect::<Result<Vec<_>>>()?;

    let selected: Vec<usize> = match selector {
        BandSelector::Indices(idx) => {
            let dim = solved[0].0.len();
            if idx.is_empty() || idx.iter().any(|&b| b >= dim) {
                return Err(Error::param(format!("band indices {idx:?} out of range 0..{dim}")));
            }
            let mut idx = idx.clone();
            idx.sort_unstable();
            idx.dedup();
            idx
        }
        BandSelector::Below(e) => {
            let counts: Vec<usize> = solved
                .iter()
                .map(|(w, _)| w.iter().filter(|&&x| x < *e).count())
                .collect();
            let n = counts[0];
            if counts.iter().any(|&c| c != n) {
                return Err(Error::Degeneracy(format!(
                    "energy {e} intersects a band: occupied count varies over the grid"
                )));
            }
            (0..n).collect()
        }
    };
    if selected.is_empty() {
        return Ok(ChernNumber { value: 0, raw: 0.0 });
    }

    // The selection must be separated from every other band at every grid point.
    for (w, _) in &solved {
        for &b in &selected {
            for nb in [b.wrapping_sub(1), b + 1] {
                if nb < w.len() && !selected.contains(&nb) && (w[nb] - w[b]).abs() < BAND_SEPARATION_TOL {
                    return Err(Error::Degeneracy(format!(
                        "band {b} touches band {nb} (separation {:.3e})",
                        (w[nb] - w[b]).abs()
                    )));
                }
            }
        }
    }

    let frames: Vec<Array2<C64>> = solved
        .into_iter()
        .map(|(_, v)| {
            let mut f = Array2::zeros((v.nrows(), selected.len()));
            for (c, &b) in selected.iter().enumerate() {
                f.column_mut(c).assign(&v.column(b));
            }
            f
        })
        .collect();
    let at = |i: usize, j: usize| &frames[(i % nkx) * nky + (j % nky)];
    let link = |a: &Array2<C64>, b: &Array2<C64>| -> Result<C64> {
        let d = conj_t(a).dot(b).det().map_err(|e| Error::Solver {
            message: format!("overlap determinant failed: {e}"),
            iterations: 0,
            residual: f64::NAN,
        })?;
        let norm = d.norm();
        if norm < 1e-12 {
            return Err(Error::Resolution { value: f64::NAN, residual: f64::NAN });
        }
        Ok(d / norm)
    };

    let mut total = 0.0;
    for i in 0..nkx {
        for j in 0..nky {
            let u1 = link(at(i, j), at(i + 1, j))?;
            let u2 = link(at(i + 1, j), at(i + 1, j + 1))?;
            let u3 = link(at(i, j + 1), at(i + 1, j + 1))?;
            let u4 = link(at(i, j), at(i, j + 1))?;
            total += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    let raw = -total / (2.0 * PI);
    let value = raw.round();
    let residual = (raw - value).abs();
    if residual >= CHERN_ROUNDING_TOL {
        return Err(Error::Resolution { value: raw, residual });
    }
    Ok(ChernNumber { value: value as i32, raw })
}

/// Groups of band indices separated from each other by a direct gap at every grid point.
pub fn band_groups(params: &ModelParams, sector: SpinSector, grid: (usize, usize)) -> Result<Vec<Vec<usize>>> {
    let cell = params.alpha.magnetic_cell_height() as f64;
    let kxs = periodic_grid(grid.0);
    let kys: Vec<f64> = periodic_grid(grid.1).into_iter().map(|k| k / cell).collect();
    let mut min_sep: Option<Vec<f64>> = None;
    for &kx in &kxs {
        for &ky in &kys {
            let (w, _) = eigh_into(sector_hamiltonian(params, sector, kx, ky)?)?;
            let seps: Vec<f64> = w.windows(2).into_iter().map(|p| p[1] - p[0]).collect();
            min_sep = Some(match min_sep {
                None => seps,
                Some(m) => m.iter().zip(&seps).map(|(a, b)| a.min(*b)).collect(),
            });
        }
    }
    let min_sep = min_sep.unwrap_or_default();
    let mut groups = vec![vec![0usize]];
    for (b, &s) in min_sep.iter().enumerate() {
        if s > BAND_SEPARATION_TOL.max(1e-3) {
            groups.push(vec![b + 1]);
        } else {
            groups.last_mut().unwrap().push(b + 1);
        }
    }
    Ok(groups)
}

/// Chern numbers of the spin-up and spin-down sectors below `fermi_energy`.
pub fn spin_chern(params: &ModelParams, fermi_energy: f64, grid: (usize, usize)) -> Result<(i32, i32)> {
    if params.beta != 0.0 {
        return Err(Error::Domain(format!(
            "spin Chern numbers need conserved spin (beta = 0), got beta = {}",
            params.beta
        )));
    }
    let sel = BandSelector::Below(fermi_energy);
    let up = chern_fhs(params, SpinSector::Only(Spin::Up), &sel, grid)?.value;
    let down = chern_fhs(params, SpinSector::Only(Spin::Down), &sel, grid)?.value;
    Ok((up, down))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Z2Options {
    /// Ribbon height in rows.
    pub ribbon_rows: usize,
    /// Momenta sampled on `[0, π]`.
    pub kx_points: usize,
    pub bulk_grid: (usize, usize),
    /// Minimum weight in the bottom half of the ribbon for a crossing state to count
    /// as a bottom-edge branch. Inside a bulk gap every state is edge-bound, so the
    /// half-ribbon split stays sharp even for weakly localized branches.
    pub edge_threshold: f64,
    pub gap_threshold: f64,
    /// Number of ×2 grid refinements allowed to resolve tangencies.
    pub max_refinements: usize,
}

impl Default for Z2Options {
    fn default() -> Self {
        Z2Options {
            ribbon_rows: 42,
            kx_points: 201,
            bulk_grid: (32, 32),
            edge_threshold: 0.5,
            gap_threshold: DEFAULT_GAP_THRESHOLD,
            max_refinements: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Z2Result {
    pub nu: u8,
    /// Bottom-edge crossings of the Fermi energy on `kx ∈ [0, π]`.
    pub crossings: usize,
    /// True when tangencies remained after all refinements.
    pub flagged: bool,
}

/// Bulk gap around `e`: nearest bulk eigenvalues below and above must be at least
/// `threshold` apart.
fn bulk_gap_at(params: &ModelParams, e: f64, opts: &Z2Options) -> Result<(f64, f64)> {
    let bands = bulk_bands(params, opts.bulk_grid)?;
    let below = bands.all_energies().filter(|&x| x <= e).fold(f64::NEG_INFINITY, f64::max);
    let (below, above) = refine_gap(params, &bands, below)?.unwrap_or((e, e));
    if !(below < e && e < above) || above - below < opts.gap_threshold {
        return Err(Error::Domain(format!(
            "no bulk gap at E_F = {e}: nearest bulk levels {below:.4} and {above:.4}"
        )));
    }
    Ok((below, above))
}

/// Z₂ index from the parity of bottom-edge branches crossing `fermi_energy`
/// on half the ribbon Brillouin zone.
pub fn z2_invariant(params: &ModelParams, fermi_energy: f64, opts: &Z2Options) -> Result<Z2Result> {
    let min_rows = 2 * params.alpha.magnetic_cell_height();
    if opts.ribbon_rows < min_rows {
        return Err(Error::param(format!(
            "ribbon needs at least {min_rows} rows, got {}",
            opts.ribbon_rows
        )));
    }
    if opts.kx_points < 2 {
        return Err(Error::param("need at least two kx points"));
    }
    let (below, above) = bulk_gap_at(params, fermi_energy, opts)?;
    let ribbon = params.clone().with_size(params.nx.max(2), opts.ribbon_rows);
    // The index is constant across the gap, so a coincidence at one Fermi energy
    // is sidestepped by moving to another inside the same gap.
    // Outside the spectrum the "gap" is unbounded; any unit step stays inside it.
    let width = if (above - below).is_finite() { above - below } else { 1.0 };
    let shifts = [0.0, 0.125, -0.125, 0.25, -0.25];
    let mut first = None;
    for e in shifts.iter().map(|s| fermi_energy + s * width).filter(|e| *e > below && *e < above) {
        let result = z2_at(&ribbon, e, opts)?;
        if !result.flagged {
            return Ok(result);
        }
        first.get_or_insert(result);
    }
    log::warn!("edge-crossing count at E_F = {fermi_energy} still has tangencies after refinement");
    Ok(first.expect("the requested Fermi energy lies inside the gap"))
}

fn z2_at(ribbon: &ModelParams, fermi_energy: f64, opts: &Z2Options) -> Result<Z2Result> {
    let mut points = opts.kx_points;
    let mut refinements = 0;
    loop {
        let (count, tangent) = count_edge_crossings(ribbon, fermi_energy, points, opts)?;
        if !tangent || refinements >= opts.max_refinements {
            return Ok(Z2Result {
                nu: (count % 2) as u8,
                crossings: count,
                flagged: tangent,
            });
        }
        refinements += 1;
        points = 2 * points - 1;
    }
}

fn count_edge_crossings(
    ribbon: &ModelParams,
    fermi_energy: f64,
    points: usize,
    opts: &Z2Options,
) -> Result<(usize, bool)> {
    let ny = ribbon.ny;
    let kxs: Vec<f64> = (0..points).map(|i| PI * i as f64 / (points - 1) as f64).collect();
    let solved = kxs
        .par_iter()
        .map(|&kx| {
            let (w, v) = eigh_into(ribbon_hamiltonian(ribbon, kx)?.to_dense())?;
            let bottom: Vec<f64> = (0..w.len())
                .map(|b| (0..2 * (ny / 2)).map(|i| v[[i, b]].norm_sqr()).sum())
                .collect();
            Ok((w.to_vec(), bottom))
        })
        .collect::<Result<Vec<_>>>()?;

    let tangency = 1e-9;
    let mut tangent = false;
    let mut count = 0;
    for pair in solved.windows(2) {
        let ((w0, b0), (w1, b1)) = (&pair[0], &pair[1]);
        let mut bottom_changes = 0;
        for b in 0..w0.len() {
            let (d0, d1) = (w0[b] - fermi_energy, w1[b] - fermi_energy);
            if d0.abs() < tangency || d1.abs() < tangency {
                tangent = true;
            }
            if d0 * d1 < 0.0 {
                // A band whose edge character flips across the crossing has swapped
                // branches inside the interval, so neither endpoint speaks for it.
                if (b0[b] >= opts.edge_threshold) != (b1[b] >= opts.edge_threshold) {
                    tangent = true;
                }
                let weight = if d0.abs() <= d1.abs() { b0[b] } else { b1[b] };
                if weight >= opts.edge_threshold {
                    bottom_changes += 1;
                    count += 1;
                }
            }
        }
        // Two bottom-edge branches crossing in the same interval can hide each other;
        // a top-edge branch crossing alongside is harmless.
        if bottom_changes > 1 {
            tangent = true;
        }
        // Branches crossing each other and the Fermi energy in one interval leave
        // no sign change; they show up as bottom-edge weight handed across E_F.
        let edge = |w: &[f64], x: usize| w[x] >= opts.edge_threshold;
        for b in 1..w0.len() {
            let brackets = |w: &[f64]| w[b - 1] < fermi_energy && w[b] > fermi_energy;
            let handed = (edge(b0, b - 1) && !edge(b0, b) && edge(b1, b) && !edge(b1, b - 1))
                || (edge(b0, b) && !edge(b0, b - 1) && edge(b1, b - 1) && !edge(b1, b));
            if handed && brackets(w0) && brackets(w1) {
                tangent = true;
            }
        }
    }
    Ok((count, tangent))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Topological,
    Metal,
    Trivial,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Topological => "topological",
            Phase::Metal => "metal",
            Phase::Trivial => "trivial",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub beta: f64,
    pub lambda: f64,
    pub phase: Phase,
    /// Present unless the point is metallic.
    pub nu: Option<u8>,
    pub gap: GapReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub window: (f64, f64),
    pub z2: Z2Options,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            window: DEFAULT_WINDOW,
            z2: Z2Options::default(),
        }
    }
}

/// Metal if the window has no bulk gap, otherwise topological or trivial by the Z₂ index.
///
/// The Fermi energy is the window midpoint, or the centre of the detected gap when
/// the midpoint falls inside a band.
pub fn classify_point(params: &ModelParams, opts: &ClassifyOptions) -> Result<PhasePoint> {
    let bands = bulk_bands(params, opts.z2.bulk_grid)?;
    let gap = refined_gap_in_window(params, &bands, opts.window, opts.z2.gap_threshold)?;
    let mut point = PhasePoint {
        beta: params.beta,
        lambda: params.lambda,
        phase: Phase::Metal,
        nu: None,
        gap,
    };
    if !gap.is_gapped {
        return Ok(point);
    }
    let mid = 0.5 * (opts.window.0 + opts.window.1);
    let fermi = if gap.contains(mid) {
        mid
    } else {
        let (a, b) = gap.gap.expect("gapped report has an interval");
        0.5 * (a + b)
    };
    let z2 = z2_invariant(params, fermi, &opts.z2)?;
    point.nu = Some(z2.nu);
    point.phase = if z2.nu == 1 { Phase::Topological } else { Phase::Trivial };
    Ok(point)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseMap {
    pub beta_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// `points[i][j]` at `(beta_grid[i], lambda_grid[j])`; failures keep their message.
    pub points: Vec<Vec<std::result::Result<PhasePoint, String>>>,
}

impl PhaseMap {
    pub fn phase_at(&self, i: usize, j: usize) -> Option<Phase> {
        self.points[i][j].as_ref().ok().map(|p| p.phase)
    }
}

/// Evenly spaced samples including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn phase_diagram(
    base: &ModelParams,
    beta_range: (f64, f64),
    lambda_range: (f64, f64),
    resolution: (usize, usize),
    opts: &ClassifyOptions,
) -> Result<PhaseMap> {
    if resolution.0 < 16 || resolution.1 < 16 {
        return Err(Error::param(format!(
            "phase diagram resolution must be at least 16x16, got {}x{}",
            resolution.0, resolution.1
        )));
    }
    let beta_grid = linspace(beta_range.0, beta_range.1, resolution.0);
    let lambda_grid = linspace(lambda_range.0, lambda_range.1, resolution.1);
    let flat: Vec<_> = (0..resolution.0 * resolution.1)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / resolution.1, idx % resolution.1);
            let mut p = base.clone();
            p.beta = beta_grid[i];
            p.lambda = lambda_grid[j];
            classify_point(&p, opts).map_err(|e| e.to_string())
        })
        .collect();
    let points = flat.chunks(resolution.1).map(|c| c.to_vec()).collect();
    Ok(PhaseMap {
        beta_grid,
        lambda_grid,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Flux;

    fn hofstadter() -> ModelParams {
        ModelParams::new(Flux::new(1, 3).unwrap(), 0.0, 0.0)
    }

    #[test]
    fn flux_free_bands_have_zero_chern() {
        let p = ModelParams::new(Flux::zero(), 0.0, 0.0);
        let c = chern_fhs(&p, SpinSector::Only(Spin::Up), &BandSelector::Indices(vec![0]), (24, 24));
        // The two folded cosine bands touch; select both.
        assert!(matches!(c, Err(Error::Degeneracy(_))));
        let c = chern_fhs(&p, SpinSector::Only(Spin::Up), &BandSelector::Indices(vec![0, 1]), (24, 24)).unwrap();
        assert_eq!(c.value, 0);
        assert_eq!(spin_chern(&p, -5.0, (24, 24)).unwrap(), (0, 0));
    }

    #[test]
    fn spin_chern_rejects_mixing() {
        let mut p = hofstadter();
        p.beta = 0.1;
        assert!(matches!(spin_chern(&p, 1.5, (24, 24)), Err(Error::Domain(_))));
    }

    #[test]
    fn energy_inside_band_is_a_degeneracy() {
        let p = hofstadter();
        let r = chern_fhs(&p, SpinSector::Only(Spin::Up), &BandSelector::Below(0.0), (24, 24));
        assert!(matches!(r, Err(Error::Degeneracy(_))));
    }

    #[test]
    fn hofstadter_bands_form_three_groups() {
        let g = band_groups(&hofstadter(), SpinSector::Only(Spin::Up), (24, 24)).unwrap();
        assert_eq!(g, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
    }

    #[test]
    fn no_crossings_below_the_spectrum() {
        let opts = Z2Options {
            ribbon_rows: 12,
            kx_points: 101,
            bulk_grid: (16, 16),
            ..Z2Options::default()
        };
        let r = z2_invariant(&hofstadter(), -5.0, &opts).unwrap();
        assert_eq!((r.nu, r.crossings), (0, 0));
    }

    #[test]
    fn z2_requires_bulk_gap() {
        let opts = Z2Options {
            ribbon_rows: 12,
            kx_points: 101,
            bulk_grid: (16, 16),
            ..Z2Options::default()
        };
        assert!(matches!(z2_invariant(&hofstadter(), 0.0, &opts), Err(Error::Domain(_))));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.0, 2.0, 5);
        assert_eq!(v, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
