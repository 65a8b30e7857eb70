// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Multi-tone coupler drives that realize a target 2x2 hopping block between two
//! neighbouring cells.
//!
//! A coupler term `J(t)(a†_r a_r' + h.c.)` has dressed matrix elements
//! `ζ_η ζ_η' / 2` with `ζ_up = +1`, `ζ_down = -1`. Keeping only the resonant part of
//! a tone `A cos(ω t + s φ)` with `ω = |E_rη - E_r'η'|` and `s = sgn(E_r'η' - E_rη)`
//! leaves the rotating-frame element `ζ_η ζ_η' (A/4) e^{iφ}`.

use std::f64::consts::PI;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::cell::{dressed_energies, photon_sign, CellParams, DressedSpectrum};
use crate::error::{Error, Result};
use crate::model::{x_hop_block, y_hop_block, ModelParams, Spin, SpinBlock};

/// Channels with a smaller target magnitude get no tone.
pub const CHANNEL_CUTOFF: f64 = 1e-12;

/// Two tone frequencies closer than this are treated as equal.
pub const FREQUENCY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
}

/// Directed bond `source -> target` between cells of a circuit, by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub source: usize,
    pub target: usize,
    pub direction: Direction,
}

impl fmt::Display for Bond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.direction {
            Direction::X => 'x',
            Direction::Y => 'y',
        };
        write!(f, "{}-{}{}", self.source + 1, self.target + 1, d)
    }
}

/// One drive tone, addressing the transition `|η'>_source -> |η>_target`
/// where `channel = (η, η')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub freq: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub sign: i8,
    pub channel: (Spin, Spin),
}

impl Tone {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.freq * t + self.sign as f64 * self.phase).cos()
    }

    pub fn channel_label(&self) -> String {
        let s = |x: Spin| match x {
            Spin::Up => "up",
            Spin::Down => "down",
        };
        format!("{}{}", s(self.channel.0), s(self.channel.1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TonePlan {
    pub bond: Bond,
    pub tones: Vec<Tone>,
}

impl TonePlan {
    /// Validates the tone set: at most four tones, positive frequencies, non-negative
    /// amplitudes and pairwise distinct frequencies.
    pub fn new(bond: Bond, tones: Vec<Tone>) -> Result<Self> {
        if tones.len() > 4 {
            return Err(Error::param(format!("a bond carries at most 4 tones, got {}", tones.len())));
        }
        for tone in &tones {
            if !(tone.freq > 0.0) || !(tone.amplitude >= 0.0) || tone.sign.abs() != 1 {
                return Err(Error::param(format!("invalid tone {tone:?} on bond {bond}")));
            }
        }
        let mut collisions = Vec::new();
        for (i, a) in tones.iter().enumerate() {
            for b in &tones[i + 1..] {
                if (a.freq - b.freq).abs() < FREQUENCY_TOL {
                    collisions.push(format!("{}/{} at {}", a.channel_label(), b.channel_label(), a.freq));
                }
            }
        }
        if !collisions.is_empty() {
            return Err(Error::Degeneracy(format!(
                "tone frequencies collide on bond {bond}: {}",
                collisions.join(", ")
            )));
        }
        Ok(Self { bond, tones })
    }

    /// Coupler waveform `J(t)`.
    pub fn waveform(&self, t: f64) -> f64 {
        self.tones.iter().map(|tone| tone.value(t)).sum()
    }

    /// Rotating-wave hopping block realized by this plan, indexed `[target][source]`.
    pub fn effective_block(&self) -> SpinBlock {
        let mut block = [[C64::new(0.0, 0.0); 2]; 2];
        for tone in &self.tones {
            let (eta, eta_s) = tone.channel;
            let z = photon_sign(eta) * photon_sign(eta_s);
            block[eta.index()][eta_s.index()] += C64::from_polar(z * tone.amplitude / 4.0, tone.phase);
        }
        block
    }

    pub fn max_freq(&self) -> f64 {
        self.tones.iter().map(|t| t.freq).fold(0.0, f64::max)
    }
}

/// Coupler waveform `J(t)` of a plan.
pub fn waveform(plan: &TonePlan, t: f64) -> f64 {
    plan.waveform(t)
}

/// All four transitions `|η'>_source -> |η>_target` with their frequencies.
pub fn bond_transitions(source: &DressedSpectrum, target: &DressedSpectrum) -> Vec<((Spin, Spin), f64)> {
    let mut out = Vec::with_capacity(4);
    for eta in Spin::BOTH {
        for eta_s in Spin::BOTH {
            out.push(((eta, eta_s), (target.energy(eta) - source.energy(eta_s)).abs()));
        }
    }
    out
}

/// Tones realizing `target_hop` (indexed `[target spin][source spin]`, units of `t0`,
/// entries of magnitude at most 1) between cells with the given frame energies.
pub fn tone_plan(
    bond: Bond,
    source: &DressedSpectrum,
    target: &DressedSpectrum,
    target_hop: &SpinBlock,
) -> Result<TonePlan> {
    let mut tones = Vec::with_capacity(4);
    for eta in Spin::BOTH {
        for eta_s in Spin::BOTH {
            let t = target_hop[eta.index()][eta_s.index()];
            if !(t.norm() <= 1.0 + 1e-12) {
                return Err(Error::param(format!(
                    "target hopping {t} on bond {bond} exceeds t0 in magnitude"
                )));
            }
            if t.norm() < CHANNEL_CUTOFF {
                continue;
            }
            let delta = target.energy(eta) - source.energy(eta_s);
            if delta.abs() < FREQUENCY_TOL {
                return Err(Error::Degeneracy(format!(
                    "transition {eta:?}<-{eta_s:?} on bond {bond} has zero frequency"
                )));
            }
            let z = photon_sign(eta) * photon_sign(eta_s);
            tones.push(Tone {
                freq: delta.abs(),
                amplitude: 4.0 * t.norm(),
                phase: (z * t).arg().rem_euclid(2.0 * PI),
                sign: if delta < 0.0 { 1 } else { -1 },
                channel: (eta, eta_s),
            });
        }
    }
    TonePlan::new(bond, tones)
}

/// `(min tone frequency, min pairwise tone separation within any single bond)`.
/// A bond with fewer than two tones does not constrain the separation.
pub fn addressing_margin(plans: &[TonePlan]) -> Result<(f64, f64)> {
    if plans.is_empty() {
        return Err(Error::param("addressing margin needs at least one tone plan"));
    }
    let mut min_freq = f64::INFINITY;
    let mut min_sep = f64::INFINITY;
    for plan in plans {
        for (i, a) in plan.tones.iter().enumerate() {
            min_freq = min_freq.min(a.freq);
            for b in &plan.tones[i + 1..] {
                min_sep = min_sep.min((a.freq - b.freq).abs());
            }
        }
    }
    Ok((min_freq, min_sep))
}

/// Same margins over all four transitions of each `(source, target)` pair,
/// whether or not they are driven.
pub fn transition_margin(pairs: &[(DressedSpectrum, DressedSpectrum)]) -> (f64, f64) {
    let mut min_freq = f64::INFINITY;
    let mut min_sep = f64::INFINITY;
    for (s, t) in pairs {
        let freqs: Vec<f64> = bond_transitions(s, t).into_iter().map(|(_, f)| f).collect();
        for (i, a) in freqs.iter().enumerate() {
            min_freq = min_freq.min(*a);
            for b in &freqs[i + 1..] {
                min_sep = min_sep.min((a - b).abs());
            }
        }
    }
    (min_freq, min_sep)
}

/// Cells, rotating-frame on-site terms and driven bonds of a small circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plaquette {
    pub cells: Vec<CellParams>,
    pub onsite: Vec<f64>,
    pub plans: Vec<TonePlan>,
}

impl Plaquette {
    /// Plans every bond against its target block, using frame energies `E - onsite`.
    pub fn new(cells: Vec<CellParams>, onsite: Vec<f64>, bonds: &[(Bond, SpinBlock)]) -> Result<Self> {
        if onsite.len() != cells.len() {
            return Err(Error::Contract(format!(
                "{} on-site terms for {} cells",
                onsite.len(),
                cells.len()
            )));
        }
        for cell in &cells {
            cell.validate()?;
        }
        let frame = |i: usize| dressed_energies(&cells[i]).with_onsite(onsite[i]);
        let mut plans = Vec::with_capacity(bonds.len());
        for (bond, block) in bonds {
            if bond.source >= cells.len() || bond.target >= cells.len() || bond.source == bond.target {
                return Err(Error::param(format!("bond {bond} does not join two distinct cells")));
            }
            plans.push(tone_plan(*bond, &frame(bond.source), &frame(bond.target), block)?);
        }
        Ok(Self { cells, onsite, plans })
    }

    /// The device plaquette at rows `row` (cells 1, 2) and `row + 1` (cells 3, 4):
    /// x bonds 1->2 and 3->4, y bonds 1->3 and 2->4.
    pub fn device(params: &ModelParams, row: usize) -> Result<Self> {
        params.validate()?;
        let cells = device_cells_vec();
        let onsite = vec![
            params.staggered_potential(row),
            params.staggered_potential(row),
            params.staggered_potential(row + 1),
            params.staggered_potential(row + 1),
        ];
        let y = y_hop_block(params);
        let bonds = [
            (Bond { source: 0, target: 1, direction: Direction::X }, x_hop_block(params, row)),
            (Bond { source: 2, target: 3, direction: Direction::X }, x_hop_block(params, row + 1)),
            (Bond { source: 0, target: 2, direction: Direction::Y }, y),
            (Bond { source: 1, target: 3, direction: Direction::Y }, y),
        ];
        Self::new(cells, onsite, &bonds)
    }

    /// Cells 1 and 2 of the device joined by their x bond at `row`.
    pub fn device_pair(params: &ModelParams, row: usize) -> Result<Self> {
        params.validate()?;
        let cells = device_cells_vec()[..2].to_vec();
        let e = params.staggered_potential(row);
        let bond = Bond { source: 0, target: 1, direction: Direction::X };
        Self::new(cells, vec![e, e], &[(bond, x_hop_block(params, row))])
    }

    pub fn spectra(&self) -> Vec<DressedSpectrum> {
        self.cells.iter().map(dressed_energies).collect()
    }

    /// Rotating-wave Hamiltonian on the dressed single-excitation block,
    /// basis index `2·cell + spin`.
    pub fn effective_hamiltonian(&self) -> Array2<C64> {
        let n = 2 * self.cells.len();
        let mut h = Array2::zeros((n, n));
        for (c, &e) in self.onsite.iter().enumerate() {
            h[[2 * c, 2 * c]] += C64::new(e, 0.0);
            h[[2 * c + 1, 2 * c + 1]] += C64::new(e, 0.0);
        }
        for plan in &self.plans {
            let block = plan.effective_block();
            for a in 0..2 {
                for b in 0..2 {
                    let (i, j) = (2 * plan.bond.target + a, 2 * plan.bond.source + b);
                    h[[i, j]] += block[a][b];
                    h[[j, i]] += block[a][b].conj();
                }
            }
        }
        h
    }
}

fn device_cells_vec() -> Vec<CellParams> {
    super::cell::device_cells().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Flux;

    fn spectra() -> Vec<DressedSpectrum> {
        super::super::cell::device_cells().iter().map(dressed_energies).collect()
    }

    fn block_close(a: &SpinBlock, b: &SpinBlock) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((a[i][j] - b[i][j]).norm());
            }
        }
        d
    }

    #[test]
    fn x_bond_tone_carries_the_row_phase() {
        let p = ModelParams::new(Flux::new(1, 3).unwrap(), 0.0, 0.0);
        let s = spectra();
        let bond = Bond { source: 0, target: 1, direction: Direction::X };
        let plan = tone_plan(bond, &s[0], &s[1], &x_hop_block(&p, 1)).unwrap();
        assert_eq!(plan.tones.len(), 2);
        let up = plan.tones.iter().find(|t| t.channel == (Spin::Up, Spin::Up)).unwrap();
        assert_eq!(up.freq, 200.0);
        assert!((up.amplitude - 4.0).abs() < 1e-12);
        // -t0 e^{i 2π/3}: the minus sign contributes π.
        assert!((up.phase - (PI + 2.0 * PI / 3.0)).abs() < 1e-12);
        assert_eq!(up.sign, -1);
    }

    #[test]
    fn y_bond_tone_count_follows_beta() {
        let s = spectra();
        let bond = Bond { source: 0, target: 2, direction: Direction::Y };
        let p0 = ModelParams::new(Flux::new(1, 3).unwrap(), 0.0, 0.0);
        assert_eq!(tone_plan(bond, &s[0], &s[2], &y_hop_block(&p0)).unwrap().tones.len(), 2);
        let p = ModelParams::new(Flux::new(1, 3).unwrap(), 0.1, 0.0);
        let plan = tone_plan(bond, &s[0], &s[2], &y_hop_block(&p)).unwrap();
        let f: Vec<f64> = plan.tones.iter().map(|t| t.freq).collect();
        assert_eq!(f, vec![150.0, 350.0, 450.0, 50.0]);
        let b = 2.0 * PI * 0.1;
        for t in &plan.tones {
            if t.channel.0 == t.channel.1 {
                assert!((t.amplitude - 4.0 * b.cos()).abs() < 1e-12);
                assert!((t.phase - PI).abs() < 1e-12);
            } else {
                assert!((t.amplitude - 4.0 * b.sin()).abs() < 1e-12);
                assert!((t.phase - PI / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_reproduces_target() {
        let s = spectra();
        for beta in [0.0, 0.07, 0.1, 0.25] {
            let p = ModelParams::new(Flux::new(1, 3).unwrap(), beta, 0.0);
            for (src, tgt, block) in [
                (0, 1, x_hop_block(&p, 1)),
                (2, 3, x_hop_block(&p, 2)),
                (0, 2, y_hop_block(&p)),
                (1, 3, y_hop_block(&p)),
            ] {
                let bond = Bond { source: src, target: tgt, direction: Direction::X };
                let plan = tone_plan(bond, &s[src], &s[tgt], &block).unwrap();
                assert!(block_close(&plan.effective_block(), &block) < 1e-14);
            }
        }
    }

    #[test]
    fn device_margins() {
        let p = ModelParams::new(Flux::new(1, 3).unwrap(), 0.1, 0.0);
        let plaq = Plaquette::device(&p, 1).unwrap();
        assert_eq!(addressing_margin(&plaq.plans).unwrap(), (50.0, 100.0));
        let s = spectra();
        let pairs = [(s[0], s[1]), (s[2], s[3]), (s[0], s[2]), (s[1], s[3])];
        assert_eq!(transition_margin(&pairs), (50.0, 100.0));
    }

    #[test]
    fn identical_cells_collide() {
        let s = spectra();
        assert_eq!(transition_margin(&[(s[0], s[0])]).1, 0.0);
        let p = ModelParams::new(Flux::new(1, 3).unwrap(), 0.0, 0.0);
        let bond = Bond { source: 0, target: 1, direction: Direction::X };
        assert!(matches!(tone_plan(bond, &s[0], &s[0], &x_hop_block(&p, 1)), Err(Error::Degeneracy(_))));
        // Equal up-up and down-down gaps with distinct energies.
        let a = DressedSpectrum { e_up: 10.0, e_down: 0.0 };
        let b = DressedSpectrum { e_up: 15.0, e_down: 5.0 };
        match tone_plan(bond, &a, &b, &x_hop_block(&p, 1)) {
            Err(Error::Degeneracy(msg)) => assert!(msg.contains("upup/downdown")),
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn waveform_examples() {
        let bond = Bond { source: 0, target: 1, direction: Direction::X };
        let mk = |freq, channel| Tone { freq, amplitude: 4.0, phase: 0.0, sign: 1, channel };
        let plan = TonePlan::new(
            bond,
            vec![
                mk(100.0, (Spin::Up, Spin::Up)),
                mk(200.0, (Spin::Up, Spin::Down)),
                mk(300.0, (Spin::Down, Spin::Up)),
                mk(400.0, (Spin::Down, Spin::Down)),
            ],
        )
        .unwrap();
        assert!((waveform(&plan, 0.0) - 16.0).abs() < 1e-12);

        let single = TonePlan::new(bond, vec![mk(200.0, (Spin::Up, Spin::Up))]).unwrap();
        let period = 2.0 * PI / 200.0;
        for t in [0.013, 0.4, 1.7] {
            assert!((single.waveform(t) - single.waveform(t + period)).abs() < 1e-9);
        }
        let n = 200_000;
        let horizon = 50.0 * 2.0 * PI / 100.0;
        let mean: f64 = (0..n).map(|i| plan.waveform(horizon * i as f64 / n as f64)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-3);
    }

    #[test]
    fn oversized_target_is_rejected() {
        let s = spectra();
        let bond = Bond { source: 0, target: 1, direction: Direction::X };
        let z = C64::new(0.0, 0.0);
        let big = [[C64::new(1.5, 0.0), z], [z, z]];
        assert!(matches!(tone_plan(bond, &s[0], &s[1], &big), Err(Error::Parameter(_))));
    }
}
