// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lindblad dynamics of the single-excitation sector with photon loss, transmon
//! loss and transmon dephasing on every cell.
//!
//! Evolution runs in the rotating frame of the effective lattice model. Loss
//! channels there are exactly `γ D[|G><up_r|] + γ D[|G><down_r|]` (the cross terms
//! of photon and transmon loss cancel). Dephasing keeps its secular part
//! `D[P'_r] + D[|down_r><up_r|] + D[|up_r><down_r|]`, with `P'_r` the identity
//! outside cell `r`; its dropped terms oscillate at `2 g_r`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{populations, DensityMatrix, Invariants, Populations, SubspaceBasis};
use crate::circuit::T0_MHZ;
use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::model::{open_hamiltonian, CsrMatrix, Flux, HermitianOperator, ModelParams, SiteIndex, Spin};

/// Default integration step in units of `1/t0`.
pub const DEFAULT_DT: f64 = 0.01;

/// Steps must satisfy `dt · max(‖H‖, γ) ≤ STABILITY_FACTOR`.
pub const STABILITY_FACTOR: f64 = 0.05;

/// Detection time of 2 μs in units of `1/t0` (`t0/2π = 3 MHz`).
pub fn detection_time() -> f64 {
    2.0 * PI * T0_MHZ * 2.0
}

/// Rate `γ` (units of `t0`) expressed as `γ/2π` in kHz.
pub fn gamma_khz(gamma: f64) -> f64 {
    gamma * T0_MHZ * 1e3
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladSpec {
    /// Common rate of all channels, units of `t0`.
    pub gamma: f64,
    pub photon_loss: bool,
    pub transmon_loss: bool,
    pub dephasing: bool,
}

impl LindbladSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        let spec = Self { gamma, photon_loss: true, transmon_loss: true, dephasing: true };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dephasing_only(gamma: f64) -> Result<Self> {
        Ok(Self { photon_loss: false, transmon_loss: false, ..Self::new(gamma)? })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param(format!("decay rate must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Literal jump operators per site, in order photon loss, transmon loss, dephasing,
/// each scaled by `√γ`.
pub fn subspace_jump_operators(basis: &SubspaceBasis, gamma: f64) -> Vec<CsrMatrix> {
    let dim = basis.dim();
    let amp = gamma.max(0.0).sqrt();
    let r = C64::new(amp * FRAC_1_SQRT_2, 0.0);
    let mut ops = Vec::with_capacity(3 * basis.sites());
    for n in 0..basis.ny {
        for m in 0..basis.nx {
            let up = basis.site_index(m, n, Spin::Up);
            let down = basis.site_index(m, n, Spin::Down);
            ops.push(CsrMatrix::from_triplets(dim, vec![(0, up, r), (0, down, -r)]));
            ops.push(CsrMatrix::from_triplets(dim, vec![(0, up, r), (0, down, r)]));
            // σz is -1 wherever cell r is in its ground state and swaps up/down on r.
            let mut t: Vec<(usize, usize, C64)> = (0..dim)
                .filter(|&i| i != up && i != down)
                .map(|i| (i, i, C64::new(-amp, 0.0)))
                .collect();
            t.push((down, up, C64::new(amp, 0.0)));
            t.push((up, down, C64::new(amp, 0.0)));
            ops.push(CsrMatrix::from_triplets(dim, t));
        }
    }
    ops
}

/// `ρ̇ = -i(H_nh ρ - ρ H_nh†) + W∘ρ + Σ_k γ_k ρ_{b_k b_k} |a_k><a_k|`, where
/// `H_nh = H - (i/2) diag(κ)`, `W` collects the diagonal jump operators and the
/// transfers `(a_k, b_k, γ_k)` are the single-entry ones.
struct Generator {
    h: CsrMatrix,
    kappa: Array1<f64>,
    weight: Array2<f64>,
    transfers: Vec<(usize, usize, f64)>,
}

impl Generator {
    fn secular(h: CsrMatrix, basis: &SubspaceBasis, spec: &LindbladSpec) -> Self {
        let dim = basis.dim();
        let g = spec.gamma;
        let mut kappa = Array1::zeros(dim);
        let mut weight = Array2::zeros((dim, dim));
        let mut transfers = Vec::new();
        let site_of = |i: usize| if i == 0 { None } else { Some((i - 1) / 2) };
        let loss = (spec.photon_loss as u8 + spec.transmon_loss as u8) as f64 * 0.5 * g;
        for r in 0..basis.sites() {
            let (up, down) = (1 + 2 * r, 2 + 2 * r);
            if loss > 0.0 {
                transfers.push((0, up, loss));
                transfers.push((0, down, loss));
                kappa[up] += loss;
                kappa[down] += loss;
            }
            if spec.dephasing && g > 0.0 {
                transfers.push((down, up, g));
                transfers.push((up, down, g));
                kappa[up] += g;
                kappa[down] += g;
                for i in 0..dim {
                    if site_of(i) == Some(r) {
                        continue;
                    }
                    kappa[i] += g;
                    for j in 0..dim {
                        if site_of(j) != Some(r) {
                            weight[[i, j]] += g;
                        }
                    }
                }
            }
        }
        Self { h, kappa, weight, transfers }
    }

    fn rhs(&self, rho: &Array2<C64>) -> Array2<C64> {
        let n = rho.nrows();
        let mut hr = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for (k, v) in self.h.row(i) {
                let src = rho.row(k);
                let mut dst = hr.row_mut(i);
                dst.zip_mut_with(&src, |d, &s| *d += v * s);
            }
        }
        let mut out = Array2::<C64>::zeros((n, n));
        let mi = C64::new(0.0, -1.0);
        for i in 0..n {
            for j in 0..n {
                // ρH = (Hρ)† for Hermitian ρ.
                let comm = hr[[i, j]] - hr[[j, i]].conj();
                let damp = -0.5 * (self.kappa[i] + self.kappa[j]);
                out[[i, j]] = mi * comm + rho[[i, j]] * (damp + self.weight[[i, j]]);
            }
        }
        for &(a, b, g) in &self.transfers {
            out[[a, a]] += rho[[b, b]] * g;
        }
        out
    }

    fn step(&self, rho: &Array2<C64>, dt: f64, stepper: Stepper) -> Array2<C64> {
        match stepper {
            Stepper::Rk4 => self.rk4_step(rho, dt),
            Stepper::Taylor(order) => {
                let mut term = rho.clone();
                let mut acc = rho.clone();
                for k in 1..=order {
                    term = self.rhs(&term) * C64::new(dt / k as f64, 0.0);
                    acc += &term;
                }
                acc
            }
        }
    }

    fn rk4_step(&self, rho: &Array2<C64>, dt: f64) -> Array2<C64> {
        let half = C64::new(dt / 2.0, 0.0);
        let full = C64::new(dt, 0.0);
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&(rho + &(&k1 * half)));
        let k3 = self.rhs(&(rho + &(&k2 * half)));
        let k4 = self.rhs(&(rho + &(&k3 * full)));
        let sixth = C64::new(dt / 6.0, 0.0);
        rho + &((&k1 + &(&k2 * C64::new(2.0, 0.0)) + &(&k3 * C64::new(2.0, 0.0)) + &k4) * sixth)
    }
}

/// One-step map of the (time-independent, linear) master equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepper {
    Rk4,
    /// Taylor series of the exact step map truncated at the given order.
    Taylor(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladOptions {
    pub dt: f64,
    /// Number of equally spaced samples after `t = 0`.
    pub samples: usize,
    pub stepper: Stepper,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        // RK4 leaves eigenvalues of order -1e-8 on pure states over the 2 μs protocol;
        // the order-8 Taylor map keeps them at rounding level for the same dt.
        Self { dt: DEFAULT_DT, samples: 10, stepper: Stepper::Taylor(8) }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub rho: DensityMatrix,
    pub invariants: Invariants,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Step actually used.
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory holds at least the initial state")
    }
}

/// Embeds a single-excitation Hamiltonian (dimension `dim - 1`) into the subspace,
/// with zero on `|G>`.
fn embed(h: &HermitianOperator, dim: usize) -> Result<CsrMatrix> {
    if h.dim() + 1 != dim {
        return Err(Error::Contract(format!(
            "Hamiltonian dimension {} does not match the excited block {}",
            h.dim(),
            dim - 1
        )));
    }
    Ok(CsrMatrix::from_triplets(dim, h.entries().into_iter().map(|(i, j, v)| (i + 1, j + 1, v)).collect()))
}

fn spectral_radius(h: &HermitianOperator) -> Result<f64> {
    let (w, _) = eigh(&h.to_dense())?;
    Ok(w.iter().fold(0.0f64, |a, &e| a.max(e.abs())))
}

/// Integrates the master equation and returns `samples + 1` equally spaced states
/// including `t = 0`. A sample that breaks the density-matrix invariants triggers
/// one rerun at `dt/2`; a second failure is an accuracy error.
pub fn lindblad_evolve(
    rho0: &DensityMatrix,
    h_eff: &HermitianOperator,
    basis: &SubspaceBasis,
    spec: &LindbladSpec,
    duration: f64,
    opts: &LindbladOptions,
) -> Result<Trajectory> {
    let LindbladOptions { dt, samples, stepper } = *opts;
    spec.validate()?;
    if rho0.dim() != basis.dim() {
        return Err(Error::Contract(format!(
            "initial state dimension {} does not match basis dimension {}",
            rho0.dim(),
            basis.dim()
        )));
    }
    let inv0 = rho0.invariants()?;
    if !inv0.hold() {
        return Err(Error::param(format!("initial state is not a density matrix: {inv0:?}")));
    }
    if !(duration >= 0.0 && duration.is_finite()) || samples == 0 {
        return Err(Error::param("duration must be non-negative and at least one sample requested"));
    }
    let scale = spectral_radius(h_eff)?.max(spec.gamma);
    if !(dt > 0.0) || dt * scale > STABILITY_FACTOR * (1.0 + 1e-12) {
        return Err(Error::param(format!(
            "time step {dt} exceeds {STABILITY_FACTOR}/max(‖H‖, γ) = {:.4e}",
            STABILITY_FACTOR / scale
        )));
    }
    let generator = Generator::secular(embed(h_eff, basis.dim())?, basis, spec);
    match run(&generator, rho0, inv0, duration, dt, samples, stepper) {
        Ok(t) => Ok(t),
        Err(Error::Accuracy(first)) => {
            log::warn!("{first}; retrying with dt = {}", dt / 2.0);
            run(&generator, rho0, inv0, duration, dt / 2.0, samples, stepper)
        }
        Err(e) => Err(e),
    }
}

fn run(
    generator: &Generator,
    rho0: &DensityMatrix,
    inv0: Invariants,
    duration: f64,
    dt: f64,
    samples: usize,
    stepper: Stepper,
) -> Result<Trajectory> {
    let per_sample = ((duration / samples as f64) / dt).ceil().max(1.0) as usize;
    let step = duration / (per_sample * samples) as f64;
    let mut points = vec![TrajectoryPoint { time: 0.0, rho: rho0.clone(), invariants: inv0 }];
    let mut rho = rho0.data.clone();
    for s in 1..=samples {
        if duration > 0.0 {
            for _ in 0..per_sample {
                rho = generator.step(&rho, step, stepper);
            }
        }
        let time = duration * s as f64 / samples as f64;
        let state = DensityMatrix { data: rho.clone() };
        let invariants = state.invariants()?;
        if !invariants.hold() {
            return Err(Error::Accuracy(format!(
                "density-matrix invariants violated at t = {time:.4}: {invariants:?}"
            )));
        }
        points.push(TrajectoryPoint { time, rho: state, invariants });
    }
    Ok(Trajectory { points, dt: step })
}

/// Detection protocol: excite one site and let the lattice evolve for a fixed time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProtocol {
    pub params: ModelParams,
    pub initial: (usize, usize, Spin),
    pub duration: f64,
    pub options: LindbladOptions,
}

impl DecayProtocol {
    /// 6x6 lattice at α = 1/3, β = λ = 0, `|up>` on site (1,1) (the corner), 2 μs.
    pub fn standard() -> Self {
        Self {
            params: ModelParams::new(Flux::new(1, 3).expect("1/3 is a valid flux"), 0.0, 0.0).with_size(6, 6),
            initial: (0, 0, Spin::Up),
            duration: detection_time(),
            options: LindbladOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub gamma: f64,
    pub populations: Populations,
    /// Smallest density-matrix eigenvalue seen along the trajectory.
    pub min_eigenvalue: f64,
    /// Largest trace error seen along the trajectory.
    pub max_trace_error: f64,
}

/// One master-equation run per rate, final populations at the protocol time.
pub fn decay_scan(gammas: &[f64], protocol: &DecayProtocol) -> Result<Vec<DecayRow>> {
    let basis = SubspaceBasis::new(protocol.params.nx, protocol.params.ny)?;
    let h = open_hamiltonian(&protocol.params)?;
    let (m, n, spin) = protocol.initial;
    if m >= basis.nx || n >= basis.ny {
        return Err(Error::param(format!("initial site ({}, {}) lies outside the lattice", m + 1, n + 1)));
    }
    let rho0 = DensityMatrix::basis_state(basis.dim(), basis.index(SiteIndex::new(m, n, spin)))?;
    gammas
        .par_iter()
        .map(|&gamma| {
            let spec = LindbladSpec::new(gamma)?;
            let traj = lindblad_evolve(&rho0, &h, &basis, &spec, protocol.duration, &protocol.options)?;
            let min_eigenvalue = traj.points.iter().map(|p| p.invariants.min_eigenvalue).fold(f64::INFINITY, f64::min);
            let max_trace_error = traj.points.iter().map(|p| p.invariants.trace_error).fold(0.0, f64::max);
            Ok(DecayRow { gamma, populations: populations(&traj.last().rho, &basis)?, min_eigenvalue, max_trace_error })
        })
        .collect()
}
