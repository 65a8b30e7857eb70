// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Open-lattice eigenstates near the Fermi energy, site densities and edge weights.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{open_hamiltonian, ModelParams};
use crate::spectra::{bulk_bands, eig_hermitian, EigenRange};

/// Outermost rows/columns counted as edge by default.
pub const DEFAULT_RING_DEPTH: usize = 2;

/// Smallest lattice side for which edge physics is considered reliable.
pub const RELIABLE_SIDE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinChannel {
    Up,
    Down,
    Both,
}

#[derive(Clone, Debug)]
pub struct EdgeState {
    pub energy: f64,
    pub state: Array1<C64>,
}

/// The `count` eigenpairs of the open lattice closest to `fermi_energy`, ordered by
/// `|E - E_F|` (ties by energy).
pub fn edge_eigenstates(params: &ModelParams, fermi_energy: f64, count: usize) -> Result<Vec<EdgeState>> {
    if count == 0 {
        return Err(Error::param("count must be at least 1"));
    }
    let h = open_hamiltonian(params)?;
    let pairs = eig_hermitian(
        &h,
        EigenRange::Nearest {
            energy: fermi_energy,
            count,
        },
    )?;
    let mut states: Vec<EdgeState> = (0..pairs.len())
        .map(|k| EdgeState {
            energy: pairs.values[k],
            state: pairs.vector(k),
        })
        .collect();
    states.sort_by(|a, b| {
        (a.energy - fermi_energy)
            .abs()
            .total_cmp(&(b.energy - fermi_energy).abs())
            .then(a.energy.total_cmp(&b.energy))
    });
    Ok(states)
}

/// Per-site probability of one state. `density[(n, m)]` with 0-based row `n` and
/// column `m`; exported tables use 1-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMap {
    pub nx: usize,
    pub ny: usize,
    pub density: Array2<f64>,
    pub energy: f64,
    pub spin_channel: SpinChannel,
}

impl DensityMap {
    pub fn total(&self) -> f64 {
        self.density.sum()
    }

    /// Rows `(m, n, density)` with 1-based site indices, row-major in `n` then `m`.
    pub fn rows(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for n in 0..self.ny {
            for m in 0..self.nx {
                out.push((m + 1, n + 1, self.density[(n, m)]));
            }
        }
        out
    }

    /// Elementwise sum, used for degenerate pairs.
    pub fn summed(&self, other: &DensityMap) -> DensityMap {
        DensityMap {
            density: &self.density + &other.density,
            ..self.clone()
        }
    }
}

pub fn site_density(
    state: ArrayView1<C64>,
    nx: usize,
    ny: usize,
    energy: f64,
    spin_channel: SpinChannel,
) -> Result<DensityMap> {
    if state.len() != 2 * nx * ny {
        return Err(Error::Contract(format!(
            "state of length {} does not fit a {nx}x{ny} lattice",
            state.len()
        )));
    }
    let density = Array2::from_shape_fn((ny, nx), |(n, m)| {
        let base = 2 * (n * nx + m);
        let up = state[base].norm_sqr();
        let down = state[base + 1].norm_sqr();
        match spin_channel {
            SpinChannel::Up => up,
            SpinChannel::Down => down,
            SpinChannel::Both => up + down,
        }
    });
    Ok(DensityMap {
        nx,
        ny,
        density,
        energy,
        spin_channel,
    })
}

/// True if `(m, n)` lies within `depth` of the lattice boundary.
pub fn in_ring(m: usize, n: usize, nx: usize, ny: usize, depth: usize) -> bool {
    m.min(n).min(nx - 1 - m).min(ny - 1 - n) < depth
}

/// Fraction of the map's weight in the `ring_depth` outermost rows and columns.
pub fn edge_weight(map: &DensityMap, ring_depth: usize) -> Result<f64> {
    if ring_depth == 0 || 2 * ring_depth >= map.nx.min(map.ny) {
        return Err(Error::param(format!(
            "ring depth {ring_depth} invalid for a {}x{} lattice",
            map.nx, map.ny
        )));
    }
    let total = map.total();
    if total <= 0.0 {
        return Ok(0.0);
    }
    let ring: f64 = map
        .density
        .indexed_iter()
        .filter(|((n, m), _)| in_ring(*m, *n, map.nx, map.ny, ring_depth))
        .map(|(_, d)| *d)
        .sum();
    Ok(ring / total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeEffectRow {
    pub nx: usize,
    pub ny: usize,
    pub energy: f64,
    pub edge_weight: f64,
    /// Nearest state lies strictly inside the bulk gap around `E_F`.
    pub midgap: bool,
    pub ny_multiple_of_q: bool,
    /// Either side is below the reliability threshold of 6 sites.
    pub below_reliability: bool,
}

/// Edge weight of the state nearest `fermi_energy` for each lattice size.
pub fn size_effect_scan(
    sizes: &[(usize, usize)],
    params: &ModelParams,
    fermi_energy: f64,
    ring_depth: usize,
) -> Result<Vec<SizeEffectRow>> {
    if let Some(&(nx, ny)) = sizes.iter().find(|&&(nx, ny)| nx < 4 || ny < 4) {
        return Err(Error::param(format!("size {nx}x{ny} below the 4x4 minimum")));
    }
    let bulk = bulk_bands(params, (32, 32))?;
    let below = bulk
        .all_energies()
        .filter(|&e| e <= fermi_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let above = bulk
        .all_energies()
        .filter(|&e| e > fermi_energy)
        .fold(f64::INFINITY, f64::min);
    let q = params.alpha.denominator() as usize;
    sizes
        .par_iter()
        .map(|&(nx, ny)| {
            let p = params.clone().with_size(nx, ny);
            let nearest = edge_eigenstates(&p, fermi_energy, 1)?.remove(0);
            let map = site_density(nearest.state.view(), nx, ny, nearest.energy, SpinChannel::Both)?;
            Ok(SizeEffectRow {
                nx,
                ny,
                energy: nearest.energy,
                edge_weight: edge_weight(&map, ring_depth.min((nx.min(ny) - 1) / 2))?,
                midgap: nearest.energy > below && nearest.energy < above,
                ny_multiple_of_q: ny % q == 0,
                below_reliability: nx < RELIABLE_SIDE || ny < RELIABLE_SIDE,
            })
        })
        .collect()
}
