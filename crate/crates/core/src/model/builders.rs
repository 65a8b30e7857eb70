// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Real-space, ribbon and magnetic-Bloch forms of the spinful flux lattice.
//!
//! Hopping blocks act on the local spin doublet. For a bond from `source` to
//! `target` the matrix element is `H[target, source] = block`, with the Hermitian
//! conjugate on the reverse entry:
//!
//! * x bond `(m,n) -> (m+1,n)`: `-t0 · exp(i 2πα n σz)`
//! * y bond `(m,n) -> (m,n+1)`: `-t0 · exp(i 2πβ σx)`
//! * on site: `(-1)^n λ`

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::operator::{BasisLabel, HermitianOperator};
use super::params::{ModelParams, SiteIndex, Spin};
use crate::error::{Error, Result};

/// 2x2 spin block, indexed `[target spin][source spin]`.
pub type SpinBlock = [[C64; 2]; 2];

pub fn x_hop_block(params: &ModelParams, n: usize) -> SpinBlock {
    let phi = params.alpha.phase_at_row(n as i64);
    let z = C64::new(0.0, 0.0);
    [
        [-params.t0 * C64::from_polar(1.0, phi), z],
        [z, -params.t0 * C64::from_polar(1.0, -phi)],
    ]
}

pub fn y_hop_block(params: &ModelParams) -> SpinBlock {
    let b = 2.0 * PI * params.beta;
    let diag = C64::new(-params.t0 * b.cos(), 0.0);
    let off = C64::new(0.0, -params.t0 * b.sin());
    [[diag, off], [off, diag]]
}

fn push_bond(
    triplets: &mut Vec<(usize, usize, C64)>,
    target: usize,
    source: usize,
    block: &SpinBlock,
    phase: C64,
) {
    for (st, row) in block.iter().enumerate() {
        for (ss, &v) in row.iter().enumerate() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let v = v * phase;
            triplets.push((target + st, source + ss, v));
            triplets.push((source + ss, target + st, v.conj()));
        }
    }
}

fn push_onsite(triplets: &mut Vec<(usize, usize, C64)>, base: usize, e: f64) {
    if e != 0.0 {
        triplets.push((base, base, C64::new(e, 0.0)));
        triplets.push((base + 1, base + 1, C64::new(e, 0.0)));
    }
}

fn row_basis(rows: usize) -> Vec<BasisLabel> {
    (0..rows)
        .flat_map(|n| Spin::BOTH.map(|spin| BasisLabel::Row { n, spin }))
        .collect()
}

/// Open-boundary real-space Hamiltonian of dimension `2·nx·ny`.
pub fn open_hamiltonian(params: &ModelParams) -> Result<HermitianOperator> {
    params.validate_lattice()?;
    let (nx, ny) = (params.nx, params.ny);
    let basis: Vec<BasisLabel> = (0..2 * nx * ny)
        .map(|i| BasisLabel::Site(SiteIndex::from_linear(i, nx)))
        .collect();
    let y_block = y_hop_block(params);
    let one = C64::new(1.0, 0.0);
    let mut t = Vec::with_capacity(2 * nx * ny * 7);
    for n in 0..ny {
        let x_block = x_hop_block(params, n);
        for m in 0..nx {
            let here = SiteIndex::new(m, n, Spin::Up).linear(nx);
            push_onsite(&mut t, here, params.staggered_potential(n));
            if m + 1 < nx {
                let right = SiteIndex::new(m + 1, n, Spin::Up).linear(nx);
                push_bond(&mut t, right, here, &x_block, one);
            }
            if n + 1 < ny {
                let up = SiteIndex::new(m, n + 1, Spin::Up).linear(nx);
                push_bond(&mut t, up, here, &y_block, one);
            }
        }
    }
    HermitianOperator::from_triplets(basis, t)
}

/// Wraps a momentum into `[-π, π)`.
pub fn wrap_momentum(k: f64) -> f64 {
    (k + PI).rem_euclid(2.0 * PI) - PI
}

/// Ribbon periodic in x with open y edges; dimension `2·ny`, basis `(row, spin)`.
pub fn ribbon_hamiltonian(params: &ModelParams, kx: f64) -> Result<HermitianOperator> {
    params.validate_lattice()?;
    let kx = wrap_momentum(kx);
    let ny = params.ny;
    let y_block = y_hop_block(params);
    let one = C64::new(1.0, 0.0);
    let mut t = Vec::with_capacity(ny * 12);
    for n in 0..ny {
        let base = 2 * n;
        push_onsite(&mut t, base, params.staggered_potential(n));
        push_bond(
            &mut t,
            base,
            base,
            &x_hop_block(params, n),
            C64::from_polar(1.0, kx),
        );
        if n + 1 < ny {
            push_bond(&mut t, base + 2, base, &y_block, one);
        }
    }
    HermitianOperator::from_triplets(row_basis(ny), t)
}

/// Bloch Hamiltonian over the magnetic cell of height `Q = lcm(q, 2)`; dimension `2Q`.
///
/// The y-momentum enters only through the wrap bond `Q-1 -> 0` as `exp(i·ky·Q)`,
/// so `H(kx + 2π, ky) = H(kx, ky + 2π/Q) = H(kx, ky)` exactly.
pub fn bloch_hamiltonian(params: &ModelParams, kx: f64, ky: f64) -> Result<HermitianOperator> {
    params.validate()?;
    let cell = params.alpha.magnetic_cell_height();
    let y_block = y_hop_block(params);
    let one = C64::new(1.0, 0.0);
    let mut t = Vec::with_capacity(cell * 12);
    for n in 0..cell {
        let base = 2 * n;
        push_onsite(&mut t, base, params.staggered_potential(n));
        push_bond(
            &mut t,
            base,
            base,
            &x_hop_block(params, n),
            C64::from_polar(1.0, kx),
        );
        let (target, phase) = if n + 1 < cell {
            (base + 2, one)
        } else {
            (0, C64::from_polar(1.0, ky * cell as f64))
        };
        push_bond(&mut t, target, base, &y_block, phase);
    }
    HermitianOperator::from_triplets(row_basis(cell), t)
}

/// Extracts one spin sector of an operator whose basis alternates up/down.
/// Only meaningful when the operator has no spin-flip entries.
pub fn spin_sector(op: &HermitianOperator, spin: Spin) -> Result<HermitianOperator> {
    let leak = op
        .entries()
        .into_iter()
        .filter(|&(i, j, _)| i % 2 != j % 2)
        .map(|(_, _, v)| v.norm())
        .fold(0.0, f64::max);
    if leak > 0.0 {
        return Err(Error::Domain(format!(
            "spin is not conserved (largest spin-flip element {leak:.3e})"
        )));
    }
    let s = spin.index();
    let basis: Vec<BasisLabel> = op.basis().iter().skip(s).step_by(2).copied().collect();
    let t = op
        .entries()
        .into_iter()
        .filter(|&(i, j, _)| i % 2 == s && j % 2 == s)
        .map(|(i, j, v)| (i / 2, j / 2, v))
        .collect();
    HermitianOperator::from_triplets(basis, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Flux;

    fn third() -> Flux {
        Flux::new(1, 3).unwrap()
    }

    fn block_of(op: &HermitianOperator, target: usize, source: usize) -> SpinBlock {
        let mut b = [[C64::new(0.0, 0.0); 2]; 2];
        for (st, row) in b.iter_mut().enumerate() {
            for (ss, v) in row.iter_mut().enumerate() {
                *v = op.get(target + st, source + ss);
            }
        }
        b
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn open_flux_only_two_by_two() {
        let p = ModelParams::new(third(), 0.0, 0.0).with_size(2, 2);
        let h = open_hamiltonian(&p).unwrap();
        assert_eq!(h.dim(), 8);
        let b = block_of(&h, 2, 0);
        assert!(close(b[0][0], C64::new(-1.0, 0.0)));
        assert!(close(b[1][1], C64::new(-1.0, 0.0)));
        for (i, j, _) in h.entries() {
            assert_eq!(i % 2, j % 2, "spin-flip entry at ({i},{j})");
        }
    }

    #[test]
    fn y_block_and_staggered_onsite() {
        let p = ModelParams::new(third(), 0.1, 1.0).with_size(3, 3);
        let h = open_hamiltonian(&p).unwrap();
        let (c, s) = ((0.2 * PI).cos(), (0.2 * PI).sin());
        let src = SiteIndex::new(1, 0, Spin::Up).linear(3);
        let dst = SiteIndex::new(1, 1, Spin::Up).linear(3);
        let b = block_of(&h, dst, src);
        assert!(close(b[0][0], C64::new(-c, 0.0)));
        assert!(close(b[0][1], C64::new(0.0, -s)));
        assert!(close(b[1][0], C64::new(0.0, -s)));
        assert!(close(b[1][1], C64::new(-c, 0.0)));
        let on = block_of(&h, dst, dst);
        assert!(close(on[0][0], C64::new(-1.0, 0.0)));
        assert!(close(on[1][1], C64::new(-1.0, 0.0)));
        assert!(close(on[0][1], C64::new(0.0, 0.0)));
    }

    #[test]
    fn x_block_carries_row_phase() {
        let p = ModelParams::new(third(), 0.0, 0.0).with_size(3, 3);
        let h = open_hamiltonian(&p).unwrap();
        let src = SiteIndex::new(0, 1, Spin::Up).linear(3);
        let dst = SiteIndex::new(1, 1, Spin::Up).linear(3);
        let b = block_of(&h, dst, src);
        let phi = 2.0 * PI / 3.0;
        assert!(close(b[0][0], -C64::from_polar(1.0, phi)));
        assert!(close(b[1][1], -C64::from_polar(1.0, -phi)));
    }

    #[test]
    fn no_wrap_bonds_in_open_lattice() {
        let p = ModelParams::new(third(), 0.1, 0.0).with_size(3, 3);
        let h = open_hamiltonian(&p).unwrap();
        let a = SiteIndex::new(0, 0, Spin::Up).linear(3);
        let b = SiteIndex::new(2, 0, Spin::Up).linear(3);
        let c = SiteIndex::new(0, 2, Spin::Up).linear(3);
        assert_eq!(h.get(a, b), C64::new(0.0, 0.0));
        assert_eq!(h.get(a, c), C64::new(0.0, 0.0));
    }

    #[test]
    fn ribbon_is_spin_block_diagonal_without_mixing() {
        let p = ModelParams::new(third(), 0.0, 0.7).with_size(4, 12);
        for k in [-3.0, -0.4, 0.0, 1.3, 7.0] {
            let h = ribbon_hamiltonian(&p, k).unwrap();
            assert_eq!(h.dim(), 24);
            assert!(h.entries().iter().all(|&(i, j, _)| i % 2 == j % 2));
        }
    }

    #[test]
    fn ribbon_momentum_is_two_pi_periodic() {
        let p = ModelParams::new(third(), 0.13, 0.4).with_size(4, 6);
        let a = ribbon_hamiltonian(&p, 0.3).unwrap().to_dense();
        let b = ribbon_hamiltonian(&p, 0.3 + 2.0 * PI).unwrap().to_dense();
        assert!((&a - &b).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn bloch_dimension_and_zone_periodicity() {
        let p = ModelParams::new(third(), 0.1, 1.0);
        let h = bloch_hamiltonian(&p, 0.4, 0.2).unwrap();
        assert_eq!(h.dim(), 12);
        let h2 = bloch_hamiltonian(&p, 0.4 + 2.0 * PI, 0.2 + 2.0 * PI / 6.0).unwrap();
        let d = &h.to_dense() - &h2.to_dense();
        assert!(d.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn spin_sector_requires_conservation() {
        let p = ModelParams::new(third(), 0.1, 0.0);
        let h = bloch_hamiltonian(&p, 0.0, 0.0).unwrap();
        assert!(matches!(spin_sector(&h, Spin::Up), Err(Error::Domain(_))));
        let p = ModelParams::new(third(), 0.0, 0.0);
        let h = bloch_hamiltonian(&p, 0.0, 0.0).unwrap();
        assert_eq!(spin_sector(&h, Spin::Down).unwrap().dim(), 6);
    }
}
