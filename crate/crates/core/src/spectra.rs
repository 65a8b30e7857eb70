// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Eigensolves, band structures over momentum grids and gap detection.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, InteriorOptions};
use crate::model::{bloch_hamiltonian, ribbon_hamiltonian, HermitianOperator, ModelParams, SPARSE_THRESHOLD};

/// Minimum width of an eigenvalue-free interval counted as a gap, in units of t0.
pub const DEFAULT_GAP_THRESHOLD: f64 = 0.05;

/// Rows on each ribbon edge counted by the localization tag.
pub const RIBBON_EDGE_ROWS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EigenRange {
    All,
    Window(f64, f64),
    Nearest { energy: f64, count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Dense LAPACK up to the sparse threshold, shift-invert above it.
    #[default]
    Auto,
    Dense,
    Iterative,
}

/// Eigenvalues ascending with eigenvectors in matching columns.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

impl EigenPairs {
    fn sorted(values: Vec<f64>, vectors: Array2<C64>) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut v = Array2::zeros((vectors.nrows(), order.len()));
        for (k, &i) in order.iter().enumerate() {
            v.column_mut(k).assign(&vectors.column(i));
        }
        EigenPairs {
            values: order.iter().map(|&i| values[i]).collect(),
            vectors: v,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Array1<C64> {
        self.vectors.column(k).to_owned()
    }
}

pub fn eig_hermitian(h: &HermitianOperator, range: EigenRange) -> Result<EigenPairs> {
    eig_hermitian_with(h, range, SolverChoice::Auto, &InteriorOptions::default())
}

pub fn eig_hermitian_with(
    h: &HermitianOperator,
    range: EigenRange,
    choice: SolverChoice,
    opts: &InteriorOptions,
) -> Result<EigenPairs> {
    if let EigenRange::Window(lo, hi) = range {
        if !(hi > lo) {
            return Err(Error::param(format!("empty eigenvalue window ({lo}, {hi})")));
        }
    }
    if let EigenRange::Nearest { count, .. } = range {
        if count == 0 || count > h.dim() {
            return Err(Error::param(format!(
                "requested {count} eigenpairs of a {}-dimensional operator",
                h.dim()
            )));
        }
    }
    let iterative = match (choice, range) {
        (_, EigenRange::All) => false,
        (SolverChoice::Dense, _) => false,
        (SolverChoice::Iterative, _) => true,
        (SolverChoice::Auto, _) => h.dim() > SPARSE_THRESHOLD,
    };
    if iterative {
        let csr = h.to_csr();
        let (values, vectors) = match range {
            EigenRange::Window(lo, hi) => linalg::window_eigenpairs(&csr, lo, hi, opts)?,
            EigenRange::Nearest { energy, count } => {
                linalg::nearest_eigenpairs(&csr, energy, count, opts)?
            }
            EigenRange::All => unreachable!(),
        };
        return Ok(EigenPairs::sorted(values, vectors));
    }
    let (w, v) = linalg::eigh_into(h.to_dense())?;
    let keep: Vec<usize> = match range {
        EigenRange::All => (0..w.len()).collect(),
        EigenRange::Window(lo, hi) => (0..w.len()).filter(|&i| w[i] >= lo && w[i] <= hi).collect(),
        EigenRange::Nearest { energy, count } => {
            let mut idx: Vec<usize> = (0..w.len()).collect();
            idx.sort_by(|&a, &b| (w[a] - energy).abs().total_cmp(&(w[b] - energy).abs()).then(a.cmp(&b)));
            idx.truncate(count);
            idx
        }
    };
    let mut vectors = Array2::zeros((v.nrows(), keep.len()));
    for (k, &i) in keep.iter().enumerate() {
        vectors.column_mut(k).assign(&v.column(i));
    }
    Ok(EigenPairs::sorted(keep.iter().map(|&i| w[i]).collect(), vectors))
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(h: &HermitianOperator) -> Result<Vec<f64>> {
    Ok(linalg::eigh_into(h.to_dense())?.0.to_vec())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum KGrid {
    /// Ribbon momenta `kx`.
    Line(Vec<f64>),
    /// Bulk momenta `(kx, ky)`, row-major over `(kx index, ky index)`.
    Plane { nkx: usize, nky: usize, points: Vec<(f64, f64)> },
}

impl KGrid {
    pub fn len(&self) -> usize {
        match self {
            KGrid::Line(k) => k.len(),
            KGrid::Plane { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Weight of a ribbon state on the bottom (`n` small) and top rows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTag {
    pub bottom: f64,
    pub top: f64,
}

impl EdgeTag {
    pub fn max(&self) -> f64 {
        self.bottom.max(self.top)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandData {
    pub kgrid: KGrid,
    /// `energies[k]` ascending.
    pub energies: Vec<Vec<f64>>,
    pub localization: Option<Vec<Vec<EdgeTag>>>,
}

impl BandData {
    pub fn band_count(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    pub fn all_energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.energies.iter().flatten().copied()
    }

    /// `(min, max)` of band `b` over the grid.
    pub fn band_range(&self, b: usize) -> (f64, f64) {
        self.energies
            .iter()
            .map(|e| e[b])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)))
    }
}

/// Uniform grid of `n` momenta spanning `[-π, π)`. For even `n` it contains 0 and -π.
pub fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect()
}

/// Bulk bands over the magnetic Brillouin zone `[-π, π) x [-π/Q, π/Q)`.
pub fn bulk_bands(params: &ModelParams, grid: (usize, usize)) -> Result<BandData> {
    let (nkx, nky) = grid;
    if nkx < 16 || nky < 16 {
        return Err(Error::param(format!("bulk grid must be at least 16x16, got {nkx}x{nky}")));
    }
    params.validate()?;
    let cell = params.alpha.magnetic_cell_height() as f64;
    let kxs = periodic_grid(nkx);
    let kys: Vec<f64> = periodic_grid(nky).into_iter().map(|k| k / cell).collect();
    let points: Vec<(f64, f64)> = kxs
        .iter()
        .flat_map(|&kx| kys.iter().map(move |&ky| (kx, ky)))
        .collect();
    let energies = points
        .par_iter()
        .map(|&(kx, ky)| eigenvalues(&bloch_hamiltonian(params, kx, ky)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandData {
        kgrid: KGrid::Plane { nkx, nky, points },
        energies,
        localization: None,
    })
}

/// Fractions of `|ψ|²` on the outermost `RIBBON_EDGE_ROWS` rows of each edge.
pub fn ribbon_edge_tag(state: ndarray::ArrayView1<C64>, ny: usize) -> EdgeTag {
    let rows = RIBBON_EDGE_ROWS.min(ny / 2);
    let row_weight = |n: usize| state[2 * n].norm_sqr() + state[2 * n + 1].norm_sqr();
    EdgeTag {
        bottom: (0..rows).map(row_weight).sum(),
        top: (ny - rows..ny).map(row_weight).sum(),
    }
}

/// Ribbon bands for `ny` rows with edge-localization tags.
pub fn ribbon_bands(params: &ModelParams, ny: usize, kx_grid: &[f64]) -> Result<BandData> {
    let min_rows = 2 * params.alpha.magnetic_cell_height();
    if ny < min_rows {
        return Err(Error::param(format!("ribbon needs at least {min_rows} rows, got {ny}")));
    }
    if kx_grid.len() < 101 {
        return Err(Error::param(format!(
            "ribbon kx grid needs at least 101 points, got {}",
            kx_grid.len()
        )));
    }
    let p = params.clone().with_size(params.nx.max(2), ny);
    let rows = kx_grid
        .par_iter()
        .map(|&kx| {
            let pairs = eig_hermitian(&ribbon_hamiltonian(&p, kx)?, EigenRange::All)?;
            let tags = (0..pairs.len())
                .map(|b| ribbon_edge_tag(pairs.vectors.column(b), ny))
                .collect::<Vec<_>>();
            Ok((pairs.values, tags))
        })
        .collect::<Result<Vec<_>>>()?;
    let (energies, tags): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(BandData {
        kgrid: KGrid::Line(kx_grid.to_vec()),
        energies,
        localization: Some(tags),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub window: (f64, f64),
    /// Largest eigenvalue-free interval inside the window.
    pub gap: Option<(f64, f64)>,
    pub is_gapped: bool,
}

impl GapReport {
    pub fn width(&self) -> f64 {
        self.gap.map_or(0.0, |(a, b)| b - a)
    }

    /// True when `e` lies strictly inside the detected gap.
    pub fn contains(&self, e: f64) -> bool {
        self.is_gapped && self.gap.is_some_and(|(a, b)| e > a && e < b)
    }
}

/// Largest empty subinterval of `window` in the merged eigenvalue set.
pub fn gap_in_window(bands: &BandData, window: (f64, f64), threshold: f64) -> Result<GapReport> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::param(format!("empty energy window ({lo}, {hi})")));
    }
    let mut inside: Vec<f64> = bands.all_energies().filter(|&e| e > lo && e < hi).collect();
    inside.sort_by(f64::total_cmp);
    let mut edges = Vec::with_capacity(inside.len() + 2);
    edges.push(lo);
    edges.extend(inside);
    edges.push(hi);
    let mut best = (lo, lo);
    for w in edges.windows(2) {
        if w[1] - w[0] > best.1 - best.0 {
            best = (w[0], w[1]);
        }
    }
    let width = best.1 - best.0;
    Ok(GapReport {
        window,
        gap: (width > 0.0).then_some(best),
        is_gapped: width >= threshold,
    })
}

/// Like [`gap_in_window`], but with the band extrema bounding each candidate gap
/// located by local search instead of read off the grid.
///
/// Sorted bands make a gap above `j` bands exactly `[max E_{j-1}, min E_j]`; a
/// uniform grid overestimates it wherever an extremum falls between samples.
pub fn refined_gap_in_window(
    params: &ModelParams,
    bands: &BandData,
    window: (f64, f64),
    threshold: f64,
) -> Result<GapReport> {
    gap_in_window(bands, window, threshold)?;
    let (lo, hi) = window;
    let mut inside: Vec<f64> = bands.all_energies().filter(|&e| e > lo && e < hi).collect();
    inside.sort_by(f64::total_cmp);
    let mut edges = vec![lo];
    edges.extend(inside);
    edges.push(hi);
    let mut best: Option<(f64, f64)> = None;
    for w in edges.windows(2).filter(|w| w[1] - w[0] >= threshold) {
        if let Some((a, b)) = refine_gap(params, bands, w[0])? {
            let (a, b) = (a.max(lo), b.min(hi));
            if b > a && best.map_or(true, |g| b - a > g.1 - g.0) {
                best = Some((a, b));
            }
        }
    }
    Ok(match best {
        Some(gap) => GapReport { window, gap: Some(gap), is_gapped: gap.1 - gap.0 >= threshold },
        None => GapReport { window, gap: None, is_gapped: false },
    })
}

/// Tightens the eigenvalue-free interval of a bulk band grid whose lower end is
/// `a` to the true band extrema; `None` when bands cross it between grid points.
pub(crate) fn refine_gap(params: &ModelParams, bands: &BandData, a: f64) -> Result<Option<(f64, f64)>> {
    let KGrid::Plane { nkx, nky, .. } = &bands.kgrid else {
        return Err(Error::param("gap refinement needs a bulk momentum grid"));
    };
    let below = bands.energies[0].iter().filter(|&&e| e <= a).count();
    if bands.energies.iter().any(|w| w.iter().filter(|&&e| e <= a).count() != below) {
        return Ok(None);
    }
    let step = (2.0 * PI / *nkx as f64, 2.0 * PI / (params.alpha.magnetic_cell_height() * nky) as f64);
    let top = if below == 0 {
        f64::NEG_INFINITY
    } else {
        band_extremum(params, bands, below - 1, step, 1.0)?
    };
    let bottom = if below == bands.band_count() {
        f64::INFINITY
    } else {
        band_extremum(params, bands, below, step, -1.0)?
    };
    Ok((bottom > top).then_some((top, bottom)))
}

/// Maximum of `sign * E_band` by pattern search from the grid's local maxima.
fn band_extremum(params: &ModelParams, bands: &BandData, band: usize, step: (f64, f64), sign: f64) -> Result<f64> {
    const STARTS: usize = 12;
    const LEVELS: usize = 10;
    let KGrid::Plane { nkx, nky, points } = &bands.kgrid else {
        return Err(Error::param("gap refinement needs a bulk momentum grid"));
    };
    let (nkx, nky) = (*nkx as isize, *nky as isize);
    let grid_value = |i: isize, j: isize| sign * bands.energies[(i.rem_euclid(nkx) * nky + j.rem_euclid(nky)) as usize][band];
    let mut starts: Vec<usize> = Vec::new();
    for i in 0..nkx {
        for j in 0..nky {
            let v = grid_value(i, j);
            let peak = (-1..=1).all(|di| (-1..=1).all(|dj| grid_value(i + di, j + dj) <= v));
            if peak {
                starts.push((i * nky + j) as usize);
            }
        }
    }
    starts.sort_by(|&a, &b| (sign * bands.energies[b][band]).total_cmp(&(sign * bands.energies[a][band])));
    starts.truncate(STARTS);

    let value = |k: (f64, f64)| -> Result<f64> { Ok(sign * eigenvalues(&bloch_hamiltonian(params, k.0, k.1)?)?[band]) };
    let mut best = f64::NEG_INFINITY;
    for start in starts {
        let mut centre = points[start];
        let mut value_at = sign * bands.energies[start][band];
        let mut h = (step.0 / 2.0, step.1 / 2.0);
        for _ in 0..LEVELS {
            for i in -2..=2 {
                for j in -2..=2 {
                    let k = (centre.0 + i as f64 * h.0, centre.1 + j as f64 * h.1);
                    let v = value(k)?;
                    if v > value_at {
                        (centre, value_at) = (k, v);
                    }
                }
            }
            h = (h.0 / 2.0, h.1 / 2.0);
        }
        best = best.max(value_at);
    }
    Ok(sign * best)
}
