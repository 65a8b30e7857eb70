// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-dependent evolution of a driven circuit without the rotating-wave
//! approximation, and comparison with the effective lattice propagator.
//!
//! Integration runs in the interaction picture of `Σ h_r`, where the Hamiltonian
//! only holds the coupler terms, using the fourth-order commutator-free Magnus
//! scheme with Gauss-Legendre nodes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

use super::cell::photon_sign;
use super::tones::{Plaquette, TonePlan};
use crate::error::{Error, Result};
use crate::linalg::{conj_t, max_abs_diff, unitarity_defect, unitary_exp};
use crate::model::Spin;

/// Points per fastest oscillation period.
pub const POINTS_PER_PERIOD: f64 = 40.0;

/// Allowed unitarity defect of the propagator at every checkpoint.
pub const UNITARITY_TOL: f64 = 1e-8;

/// Largest product space handled by [`product_space_evolve`] (`3^4`).
pub const MAX_PRODUCT_CELLS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Requested step; `None` uses the resolution bound of the drive.
    pub dt: Option<f64>,
    /// Number of equally spaced checkpoints in `(0, T]`.
    pub samples: usize,
    /// Max entry difference between the final propagators at `dt` and `dt/2`.
    pub tolerance: f64,
    pub max_halvings: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { dt: None, samples: 1, tolerance: 1e-6, max_halvings: 3 }
    }
}

/// Diagonal free energies plus coupler terms `J_b(t)·c·|i><j| + h.c.`.
struct DrivenSystem<'a> {
    energies: Vec<f64>,
    terms: Vec<(usize, usize, f64, usize)>,
    plans: &'a [TonePlan],
}

impl DrivenSystem<'_> {
    fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Highest angular frequency present in the interaction-picture Hamiltonian.
    fn max_frequency(&self) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, _, b)| (self.energies[i] - self.energies[j]).abs() + self.plans[b].max_freq())
            .fold(0.0, f64::max)
    }

    fn hamiltonian(&self, t: f64) -> Array2<C64> {
        let n = self.dim();
        let mut h = Array2::zeros((n, n));
        let j: Vec<f64> = self.plans.iter().map(|p| p.waveform(t)).collect();
        for &(a, b, c, bond) in &self.terms {
            let v = C64::from_polar(j[bond] * c, (self.energies[a] - self.energies[b]) * t);
            h[[a, b]] += v;
            h[[b, a]] += v.conj();
        }
        h
    }

    fn propagate(&self, duration: f64, steps: usize, samples: usize) -> Result<Vec<Array2<C64>>> {
        let (a1, a2) = ((3.0 - 2.0 * 3f64.sqrt()) / 12.0, (3.0 + 2.0 * 3f64.sqrt()) / 12.0);
        let (c1, c2) = (0.5 - 3f64.sqrt() / 6.0, 0.5 + 3f64.sqrt() / 6.0);
        let h = duration / steps as f64;
        let per_sample = steps / samples;
        let mut u = Array2::<C64>::eye(self.dim());
        let mut out = Vec::with_capacity(samples);
        for k in 0..steps {
            let t = k as f64 * h;
            let h1 = self.hamiltonian(t + c1 * h);
            let h2 = self.hamiltonian(t + c2 * h);
            let first = unitary_exp(&(&h1 * a2 + &h2 * a1), h)?;
            let second = unitary_exp(&(&h1 * a1 + &h2 * a2), h)?;
            u = second.dot(&first.dot(&u));
            if (k + 1) % per_sample == 0 {
                let defect = unitarity_defect(&u);
                if defect > UNITARITY_TOL {
                    return Err(Error::Accuracy(format!(
                        "propagator unitarity defect {defect:.3e} at t = {:.6}",
                        (k + 1) as f64 * h
                    )));
                }
                out.push(u.clone());
            }
        }
        Ok(out)
    }

    /// Runs at the resolved step and keeps halving until two successive final
    /// propagators agree within the tolerance.
    fn evolve(&self, duration: f64, opts: &EvolveOptions) -> Result<Evolution> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::param(format!("duration must be non-negative, got {duration}")));
        }
        if opts.samples == 0 {
            return Err(Error::param("at least one checkpoint is required"));
        }
        let max_tone = self.plans.iter().map(|p| p.max_freq()).fold(0.0, f64::max);
        if let Some(dt) = opts.dt {
            let bound = if max_tone > 0.0 { 2.0 * PI / (POINTS_PER_PERIOD * max_tone) } else { f64::INFINITY };
            if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
                return Err(Error::param(format!(
                    "time step {dt} exceeds 1/{POINTS_PER_PERIOD} of the fastest tone period ({bound:.3e})"
                )));
            }
        }
        let times: Vec<f64> = (1..=opts.samples).map(|k| duration * k as f64 / opts.samples as f64).collect();
        if duration == 0.0 || self.terms.is_empty() {
            // Nothing drives the system: the interaction-picture propagator is the identity.
            let id = Array2::eye(self.dim());
            return Ok(Evolution { times, propagators: vec![id; opts.samples], dt: duration, steps: 0 });
        }
        let fmax = self.max_frequency();
        let resolved = if fmax > 0.0 { 2.0 * PI / (POINTS_PER_PERIOD * fmax) } else { duration };
        let dt = opts.dt.map_or(resolved, |d| d.min(resolved));
        let blocks = (duration / dt / opts.samples as f64).ceil().max(1.0) as usize;
        let mut steps = blocks * opts.samples;
        let mut coarse = self.propagate(duration, steps, opts.samples)?;
        for _ in 0..=opts.max_halvings {
            let fine = self.propagate(duration, 2 * steps, opts.samples)?;
            let diff = max_abs_diff(coarse.last().unwrap(), fine.last().unwrap());
            steps *= 2;
            if diff <= opts.tolerance {
                return Ok(Evolution { times, propagators: fine, dt: duration / steps as f64, steps });
            }
            log::debug!("step halving: difference {diff:.3e} at {steps} steps");
            coarse = fine;
        }
        Err(Error::Accuracy(format!(
            "propagator did not converge to {:.1e} after {} halvings ({} steps)",
            opts.tolerance, opts.max_halvings, steps
        )))
    }
}

struct Evolution {
    times: Vec<f64>,
    propagators: Vec<Array2<C64>>,
    dt: f64,
    steps: usize,
}

/// Propagators of the full driven circuit on the at-most-one-excitation space.
///
/// Dressed basis: index 0 is the global ground state `|G>`, index `1 + 2·cell + spin`
/// the dressed excitation `|spin>` of `cell`.
#[derive(Clone, Debug)]
pub struct FullEvolution {
    pub times: Vec<f64>,
    /// Interaction-picture propagators `e^{i H0 t} U(t)` at each checkpoint.
    pub interaction: Vec<Array2<C64>>,
    /// Dressed free energies `[0, E_{1,up}, E_{1,down}, ...]`.
    pub energies: Vec<f64>,
    /// Step actually used after the halving check.
    pub dt: f64,
    pub steps: usize,
}

impl FullEvolution {
    pub fn n_cells(&self) -> usize {
        (self.energies.len() - 1) / 2
    }

    /// Lab-frame propagator in the dressed basis at checkpoint `k`.
    pub fn lab_dressed(&self, k: usize) -> Array2<C64> {
        let t = self.times[k];
        let mut u = self.interaction[k].clone();
        for (mut row, &e) in u.rows_mut().into_iter().zip(&self.energies) {
            let p = C64::from_polar(1.0, -e * t);
            row.mapv_inplace(|x| x * p);
        }
        u
    }

    /// Lab-frame propagator in the bare basis `[|G>, (|1g>, |0e>) per cell]`.
    pub fn lab_bare(&self, k: usize) -> Array2<C64> {
        let b = dressed_to_bare(self.n_cells());
        b.dot(&self.lab_dressed(k)).dot(&conj_t(&b))
    }

    /// Single-excitation block in the rotating frame that leaves the on-site
    /// terms `onsite[cell]` static; comparable with [`effective_propagator`].
    pub fn rotating_block(&self, k: usize, onsite: &[f64]) -> Result<Array2<C64>> {
        let n = 2 * self.n_cells();
        if onsite.len() * 2 != n {
            return Err(Error::Contract(format!("{} on-site terms for {} cells", onsite.len(), n / 2)));
        }
        let t = self.times[k];
        let mut u = self.interaction[k].slice(s![1.., 1..]).to_owned();
        for (i, mut row) in u.rows_mut().into_iter().enumerate() {
            let p = C64::from_polar(1.0, -onsite[i / 2] * t);
            row.mapv_inplace(|x| x * p);
        }
        Ok(u)
    }

    pub fn final_rotating_block(&self, onsite: &[f64]) -> Result<Array2<C64>> {
        self.rotating_block(self.times.len() - 1, onsite)
    }
}

/// Columns are dressed states expressed in the bare basis.
pub fn dressed_to_bare(n_cells: usize) -> Array2<C64> {
    let n = 1 + 2 * n_cells;
    let mut b = Array2::zeros((n, n));
    b[[0, 0]] = C64::new(1.0, 0.0);
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    for c in 0..n_cells {
        let (g1, e0) = (1 + 2 * c, 2 + 2 * c);
        let (up, down) = (1 + 2 * c, 2 + 2 * c);
        b[[g1, up]] = r;
        b[[e0, up]] = r;
        b[[g1, down]] = -r;
        b[[e0, down]] = r;
    }
    b
}

fn coupler_element(eta: Spin, eta_s: Spin) -> f64 {
    photon_sign(eta) * photon_sign(eta_s) / 2.0
}

/// Time-ordered evolution of the circuit under the full coupler drive.
pub fn full_evolve(plaquette: &Plaquette, duration: f64, opts: &EvolveOptions) -> Result<FullEvolution> {
    let spectra = plaquette.spectra();
    let mut energies = vec![0.0];
    for s in &spectra {
        energies.push(s.e_up);
        energies.push(s.e_down);
    }
    let mut terms = Vec::new();
    for (b, plan) in plaquette.plans.iter().enumerate() {
        for eta in Spin::BOTH {
            for eta_s in Spin::BOTH {
                let i = 1 + 2 * plan.bond.target + eta.index();
                let j = 1 + 2 * plan.bond.source + eta_s.index();
                terms.push((i, j, coupler_element(eta, eta_s), b));
            }
        }
    }
    let system = DrivenSystem { energies, terms, plans: &plaquette.plans };
    let ev = system.evolve(duration, opts)?;
    Ok(FullEvolution {
        times: ev.times,
        interaction: ev.propagators,
        energies: system.energies,
        dt: ev.dt,
        steps: ev.steps,
    })
}

/// Evolution on the full product space of three-level cells `{|0g>, |up>, |down>}`,
/// index `Σ_c level_c · 3^c`. Used to check excitation-number conservation.
#[derive(Clone, Debug)]
pub struct ProductEvolution {
    pub n_cells: usize,
    pub interaction: Array2<C64>,
}

impl ProductEvolution {
    pub fn excitation(&self, index: usize) -> usize {
        excitation_number(index, self.n_cells)
    }

    /// Largest propagator entry connecting different excitation numbers.
    pub fn leakage(&self) -> f64 {
        let n = self.interaction.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if self.excitation(i) != self.excitation(j) {
                    worst = worst.max(self.interaction[[i, j]].norm());
                }
            }
        }
        worst
    }
}

fn excitation_number(mut index: usize, n_cells: usize) -> usize {
    let mut count = 0;
    for _ in 0..n_cells {
        if index % 3 != 0 {
            count += 1;
        }
        index /= 3;
    }
    count
}

pub fn product_space_evolve(plaquette: &Plaquette, duration: f64, opts: &EvolveOptions) -> Result<ProductEvolution> {
    let n_cells = plaquette.cells.len();
    if n_cells == 0 || n_cells > MAX_PRODUCT_CELLS {
        return Err(Error::param(format!(
            "product-space evolution supports 1..={MAX_PRODUCT_CELLS} cells, got {n_cells}"
        )));
    }
    let spectra = plaquette.spectra();
    let dim = 3usize.pow(n_cells as u32);
    let level = |index: usize, c: usize| (index / 3usize.pow(c as u32)) % 3;
    let energies: Vec<f64> = (0..dim)
        .map(|idx| {
            (0..n_cells)
                .map(|c| match level(idx, c) {
                    1 => spectra[c].e_up,
                    2 => spectra[c].e_down,
                    _ => 0.0,
                })
                .sum()
        })
        .collect();
    let spin_of = |l: usize| if l == 1 { Spin::Up } else { Spin::Down };
    let mut terms = Vec::new();
    for (b, plan) in plaquette.plans.iter().enumerate() {
        let (src, tgt) = (plan.bond.source, plan.bond.target);
        let (ps, pt) = (3usize.pow(src as u32), 3usize.pow(tgt as u32));
        // a†_tgt a_src moves the excitation of `src` onto an empty `tgt`.
        for j in 0..dim {
            if level(j, src) == 0 || level(j, tgt) != 0 {
                continue;
            }
            let ls = level(j, src);
            for lt in [1, 2] {
                let i = j - ls * ps + lt * pt;
                terms.push((i, j, coupler_element(spin_of(lt), spin_of(ls)), b));
            }
        }
    }
    let system = DrivenSystem { energies, terms, plans: &plaquette.plans };
    let ev = system.evolve(duration, &EvolveOptions { samples: 1, ..*opts })?;
    Ok(ProductEvolution { n_cells, interaction: ev.propagators.into_iter().last().unwrap() })
}

/// `exp(-i H_eff t)` of the rotating-wave lattice model on the single-excitation block.
pub fn effective_propagator(plaquette: &Plaquette, t: f64) -> Result<Array2<C64>> {
    unitary_exp(&plaquette.effective_hamiltonian(), t)
}

/// `|tr(U_eff† U_full)| / dim`.
pub fn rwa_fidelity(full: &Array2<C64>, effective: &Array2<C64>) -> Result<f64> {
    if full.dim() != effective.dim() || full.nrows() != full.ncols() || full.nrows() == 0 {
        return Err(Error::Contract(format!(
            "propagator shapes {:?} and {:?} differ",
            full.dim(),
            effective.dim()
        )));
    }
    let tr: C64 = (0..full.nrows())
        .map(|i| (0..full.nrows()).map(|k| effective[[k, i]].conj() * full[[k, i]]).sum::<C64>())
        .sum();
    Ok(tr.norm() / full.nrows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{device_cells, Bond, Direction, Tone};
    use crate::model::{Flux, ModelParams};

    fn pair(params: &ModelParams) -> Plaquette {
        Plaquette::device_pair(params, 1).unwrap()
    }

    #[test]
    fn undriven_circuit_evolves_freely() {
        let cells = device_cells()[..2].to_vec();
        let plaq = Plaquette { cells, onsite: vec![0.0, 0.0], plans: vec![] };
        let ev = full_evolve(&plaq, 0.37, &EvolveOptions::default()).unwrap();
        let u = ev.lab_dressed(0);
        for (i, &e) in ev.energies.iter().enumerate() {
            for j in 0..u.ncols() {
                let expect = if i == j { C64::from_polar(1.0, -e * 0.37) } else { C64::new(0.0, 0.0) };
                assert!((u[[i, j]] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_duration_has_unit_fidelity() {
        let p = ModelParams::new(Flux::new(1, 3).unwrap(), 0.0, 0.0);
        let plaq = pair(&p);
        let ev = full_evolve(&plaq, 0.0, &EvolveOptions::default()).unwrap();
        let eff = effective_propagator(&plaq, 0.0).unwrap();
        let f = rwa_fidelity(&ev.final_rotating_block(&plaq.onsite).unwrap(), &eff).unwrap();
        assert!((f - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_resonant_tone_transfers_in_a_quarter_period() {
        let cells = device_cells()[..2].to_vec();
        let bond = Bond { source: 0, target: 1, direction: Direction::X };
        let z = C64::new(0.0, 0.0);
        let block = [[C64::new(1.0, 0.0), z], [z, z]];
        let plaq = Plaquette::new(cells, vec![0.0, 0.0], &[(bond, block)]).unwrap();
        assert_eq!(plaq.plans[0].tones.len(), 1);
        let samples = 200;
        let opts = EvolveOptions { samples, ..Default::default() };
        let ev = full_evolve(&plaq, PI, &opts).unwrap();
        // |up>_1 is dressed index 1, |up>_2 is 3.
        let pop: Vec<f64> = ev.interaction.iter().map(|u| u[[3, 1]].norm_sqr()).collect();
        let (kmax, pmax) = pop
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc });
        assert!(pmax > 0.99, "peak transfer {pmax}");
        let t_peak = ev.times[kmax];
        assert!((t_peak - PI / 2.0).abs() / (PI / 2.0) < 0.02, "peak at {t_peak}");
        for u in &ev.interaction {
            assert!(unitarity_defect(u) < 1e-8);
        }
    }

    #[test]
    fn bare_and_dressed_frames_agree() {
        let p = ModelParams::new(Flux::new(1, 3).unwrap(), 0.0, 0.0);
        let plaq = pair(&p);
        let ev = full_evolve(&plaq, 0.05, &EvolveOptions::default()).unwrap();
        let b = dressed_to_bare(2);
        assert!(unitarity_defect(&b) < 1e-15);
        let bare = ev.lab_bare(0);
        assert!(unitarity_defect(&bare) < 1e-8);
        assert!(max_abs_diff(&conj_t(&b).dot(&bare).dot(&b), &ev.lab_dressed(0)) < 1e-12);
    }

    #[test]
    fn product_space_conserves_excitations() {
        let p = ModelParams::new(Flux::new(1, 3).unwrap(), 0.0, 0.0);
        let plaq = pair(&p);
        let ev = product_space_evolve(&plaq, 0.3, &EvolveOptions::default()).unwrap();
        assert_eq!(ev.interaction.nrows(), 9);
        assert!(ev.leakage() < 1e-10);
        // The single-excitation sector agrees with the restricted evolution.
        let small = full_evolve(&plaq, 0.3, &EvolveOptions::default()).unwrap();
        let map = [0usize, 1, 2, 3, 6];
        for (a, &i) in map.iter().enumerate() {
            for (b, &j) in map.iter().enumerate() {
                assert!((ev.interaction[[i, j]] - small.interaction[0][[a, b]]).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn coarse_requested_step_is_rejected() {
        let p = ModelParams::new(Flux::new(1, 3).unwrap(), 0.0, 0.0);
        let plaq = pair(&p);
        let opts = EvolveOptions { dt: Some(0.01), ..Default::default() };
        assert!(matches!(full_evolve(&plaq, 0.1, &opts), Err(Error::Parameter(_))));
    }

    #[test]
    fn fidelity_shape_mismatch() {
        let a = Array2::<C64>::eye(4);
        let b = Array2::<C64>::eye(5);
        assert!(matches!(rwa_fidelity(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn detuned_tone_leaves_populations() {
        let cells = device_cells()[..2].to_vec();
        let bond = Bond { source: 0, target: 1, direction: Direction::X };
        // Transitions of this pair sit at 100, 200, 400 and 700.
        let tone = Tone { freq: 300.0, amplitude: 4.0, phase: 0.0, sign: 1, channel: (Spin::Up, Spin::Up) };
        let plan = crate::circuit::TonePlan::new(bond, vec![tone]).unwrap();
        let plaq = Plaquette { cells, onsite: vec![0.0, 0.0], plans: vec![plan] };
        let ev = full_evolve(&plaq, PI / 2.0, &EvolveOptions::default()).unwrap();
        let u = &ev.interaction[0];
        for i in 1..5 {
            assert!(1.0 - u[[i, i]].norm_sqr() < 0.01);
        }
    }
}
