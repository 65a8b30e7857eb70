// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! Independent reference computations checked against the library.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use qsh_core::edge::{edge_eigenstates, edge_weight, site_density, SpinChannel};
use qsh_core::linalg::{eigh, max_abs_diff, InteriorOptions};
use qsh_core::model::{apply_time_reversal, open_hamiltonian, Flux, ModelParams, Spin};
use qsh_core::spectra::{eig_hermitian_with, EigenRange, SolverChoice};
use qsh_core::topology::{band_groups, chern_fhs, spin_chern, z2_invariant, BandSelector, SpinSector, Z2Options};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Q: usize = 3;

/// Spin-up Harper model at flux 1/3 on a 3-row cell with Bloch phases on every bond:
/// `H_nn = -2 cos(kx - 2π n/3)`, `H_{n+1,n} = -e^{-i ky}` (cyclic).
fn harper(kx: f64, ky: f64) -> (Array2<C64>, Array2<C64>, Array2<C64>) {
    let mut h = Array2::<C64>::zeros((Q, Q));
    let mut dx = Array2::<C64>::zeros((Q, Q));
    let mut dy = Array2::<C64>::zeros((Q, Q));
    for n in 0..Q {
        let theta = 2.0 * PI * n as f64 / Q as f64;
        h[[n, n]] = C64::new(-2.0 * (kx - theta).cos(), 0.0);
        dx[[n, n]] = C64::new(2.0 * (kx - theta).sin(), 0.0);
        let up = (n + 1) % Q;
        let hop = -C64::from_polar(1.0, -ky);
        h[[up, n]] += hop;
        h[[n, up]] += hop.conj();
        dy[[up, n]] += -C64::i() * hop;
        dy[[n, up]] += (-C64::i() * hop).conj();
    }
    (h, dx, dy)
}

/// Chern numbers from the Kubo formula for the curvature of `A = i<u|grad u>`:
/// `Ω_n = i Σ_{m≠n} (<n|∂x H|m><m|∂y H|n> - c.c.) / (E_n - E_m)²`, midpoint rule.
fn kubo_cherns(n: usize) -> Vec<f64> {
    let (lx, ly) = (2.0 * PI, 2.0 * PI / Q as f64);
    let mut c = vec![0.0; Q];
    for i in 0..n {
        for j in 0..n {
            let kx = (i as f64 + 0.5) * lx / n as f64;
            let ky = (j as f64 + 0.5) * ly / n as f64;
            let (h, dx, dy) = harper(kx, ky);
            let (w, v) = eigh(&h).unwrap();
            let vd = v.t().mapv(|x| x.conj());
            let mx = vd.dot(&dx).dot(&v);
            let my = vd.dot(&dy).dot(&v);
            for b in 0..Q {
                let mut omega = C64::new(0.0, 0.0);
                for m in (0..Q).filter(|&m| m != b) {
                    let x = mx[[b, m]] * my[[m, b]];
                    omega += C64::i() * (x - x.conj()) / (w[b] - w[m]).powi(2);
                }
                c[b] += omega.re * lx * ly / (n * n) as f64 / (2.0 * PI);
            }
        }
    }
    c
}

fn third() -> Flux {
    Flux::new(1, 3).unwrap()
}

#[test]
fn kubo_oracle_matches_lattice_chern_numbers() {
    let oracle = kubo_cherns(120);
    let rounded: Vec<i32> = oracle.iter().map(|c| c.round() as i32).collect();
    for c in &oracle {
        assert!((c - c.round()).abs() < 0.02, "{oracle:?}");
    }
    assert_eq!(rounded, vec![1, -2, 1]);

    let params = ModelParams::new(third(), 0.0, 0.0);
    for spin in Spin::BOTH {
        let sector = SpinSector::Only(spin);
        let groups = band_groups(&params, sector, (24, 24)).unwrap();
        assert_eq!(groups.len(), 3);
        let lib: Vec<i32> = groups
            .iter()
            .map(|g| chern_fhs(&params, sector, &BandSelector::Indices(g.clone()), (24, 24)).unwrap().value)
            .collect();
        let expected: Vec<i32> = match spin {
            Spin::Up => rounded.clone(),
            Spin::Down => rounded.iter().map(|c| -c).collect(),
        };
        assert_eq!(lib, expected, "{spin:?}");
    }
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
    let mut a = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        a[[i, i]] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            a[[i, j]] = z;
            a[[j, i]] = z.conj();
        }
    }
    a
}

#[test]
fn dense_eigensolver_reconstructs_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let a = random_hermitian(100, &mut rng);
        let (w, v) = eigh(&a).unwrap();
        assert!(w.windows(2).into_iter().all(|p| p[0] <= p[1]));
        let vd = v.t().mapv(|x| x.conj());
        let rebuilt = v.dot(&Array2::from_diag(&w.mapv(|x| C64::new(x, 0.0)))).dot(&vd);
        assert!(max_abs_diff(&rebuilt, &a) < 1e-12);
        assert!(max_abs_diff(&vd.dot(&v), &Array2::eye(100)) < 1e-12);
        let trace: f64 = (0..100).map(|i| a[[i, i]].re).sum();
        assert!((w.sum() - trace).abs() < 1e-10);
    }
}

#[test]
fn interior_solver_agrees_with_dense() {
    for (beta, lambda, side) in [(0.0, 0.0, 12), (0.1, 1.0, 12), (0.05, 0.5, 10)] {
        let params = ModelParams::new(third(), beta, lambda).with_size(side, side);
        let h = open_hamiltonian(&params).unwrap();
        let range = EigenRange::Nearest { energy: 1.5, count: 6 };
        let opts = InteriorOptions::default();
        let dense = eig_hermitian_with(&h, range, SolverChoice::Dense, &opts).unwrap();
        let iter = eig_hermitian_with(&h, range, SolverChoice::Iterative, &opts).unwrap();
        for (a, b) in dense.values.iter().zip(&iter.values) {
            assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", dense.values, iter.values);
        }
        for k in 0..iter.len() {
            let v = iter.vector(k);
            let r = h.matvec(v.view()) - v.mapv(|x| x * iter.values[k]);
            assert!(r.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-8);
        }
    }
}

#[test]
fn open_lattice_levels_come_in_kramers_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let params = ModelParams::new(third(), rng.gen_range(0.0..0.25), rng.gen_range(0.0..2.0));
        let h = open_hamiltonian(&params).unwrap().to_dense();
        let (w, v) = eigh(&h).unwrap();
        for k in (0..w.len()).step_by(2) {
            assert!((w[k + 1] - w[k]).abs() < 1e-10, "level {k}: {} {}", w[k], w[k + 1]);
        }
        // The time-reversed partner is orthogonal and lies in the same level.
        let psi: Array1<C64> = v.column(0).to_owned();
        let partner = apply_time_reversal(psi.view());
        let overlap: C64 = psi.iter().zip(partner.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!(overlap.norm() < 1e-10);
        let hp = h.dot(&partner);
        let resid = (&hp - &partner.mapv(|x| x * w[0])).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(resid < 1e-9);
    }
}

/// Edge weight of the state nearest 1.5 t0 recomputed from a dense solve and a
/// hand-counted ring.
#[test]
fn edge_weight_oracle_on_six_by_six() {
    let params = ModelParams::new(third(), 0.0, 0.0);
    let h = open_hamiltonian(&params).unwrap().to_dense();
    let (w, v) = eigh(&h).unwrap();
    let k = (0..w.len()).min_by(|&a, &b| (w[a] - 1.5).abs().total_cmp(&(w[b] - 1.5).abs())).unwrap();
    let ring: f64 = (0..36)
        .filter(|&site| {
            let (m, n) = (site % 6, site / 6);
            m < 2 || n < 2 || m > 3 || n > 3
        })
        .map(|site| v[[2 * site, k]].norm_sqr() + v[[2 * site + 1, k]].norm_sqr())
        .sum();
    let lib = edge_eigenstates(&params, 1.5, 1).unwrap();
    assert!((lib[0].energy - w[k]).abs() < 1e-12);
    // The ring projector is time-reversal even, so both members of a Kramers pair
    // carry the same ring weight and the choice of basis in the pair is irrelevant.
    let map = site_density(lib[0].state.view(), 6, 6, lib[0].energy, SpinChannel::Both).unwrap();
    let lib_w = edge_weight(&map, 2).unwrap();
    assert!((lib_w - ring).abs() < 1e-9, "{lib_w} vs {ring}");
    assert!(ring >= 0.6);
}

/// With conserved spin the Z2 index is the parity of the spin-up Chern number. At
/// λ = 60/31 a bottom branch and an opposite-spin top branch cross each other right
/// at E_F, which a plain sign-change count misses.
#[test]
fn z2_matches_spin_chern_parity_without_mixing() {
    for lambda in [0.0, 1.0, 60.0 / 31.0, 2.0] {
        let params = ModelParams::new(third(), 0.0, lambda);
        let (up, down) = spin_chern(&params, 1.5, (24, 24)).unwrap();
        assert_eq!(up, -down);
        let z2 = z2_invariant(&params, 1.5, &Z2Options::default()).unwrap();
        assert!(!z2.flagged, "λ = {lambda}");
        assert_eq!(z2.nu as i32, up.rem_euclid(2), "λ = {lambda}: {} crossings", z2.crossings);
    }
}
