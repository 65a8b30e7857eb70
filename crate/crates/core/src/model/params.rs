// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rational flux parameter `p/q` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Flux {
    p: i64,
    q: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Flux {
    /// Builds `p/q` reduced to lowest terms.
    pub fn new(p: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("flux denominator must be positive"));
        }
        let g = gcd(p.unsigned_abs(), q).max(1);
        Ok(Flux {
            p: p / g as i64,
            q: q / g,
        })
    }

    pub const fn zero() -> Self {
        Flux { p: 0, q: 1 }
    }

    /// Parses `"p/q"` (or a bare integer). The boolean is true when the input was
    /// not already in lowest terms.
    pub fn parse_reporting(s: &str) -> Result<(Self, bool)> {
        let s = s.trim();
        let (ps, qs) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let p: i64 = ps
            .parse()
            .map_err(|_| Error::param(format!("invalid flux numerator in {s:?}")))?;
        let q: u64 = qs
            .parse()
            .map_err(|_| Error::param(format!("invalid flux denominator in {s:?}")))?;
        let flux = Flux::new(p, q)?;
        let reduced = flux.q != q;
        Ok((flux, reduced))
    }

    pub fn numerator(&self) -> i64 {
        self.p
    }

    pub fn denominator(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Height of the magnetic unit cell: the staggered potential has period 2 in `n`,
    /// the Peierls phases period `q`.
    pub fn magnetic_cell_height(&self) -> usize {
        let q = self.q;
        (q / gcd(q, 2) * 2) as usize
    }

    /// Shift by an integer number of flux quanta.
    pub fn shifted(&self, k: i64) -> Self {
        Flux {
            p: self.p + k * self.q as i64,
            q: self.q,
        }
    }

    /// Peierls angle `2π α n` with the integer part of `α n` removed before scaling,
    /// so that fluxes differing by an integer give bit-identical phases.
    pub fn phase_at_row(&self, n: i64) -> f64 {
        let q = self.q as i64;
        let num = (self.p * n).rem_euclid(q);
        2.0 * std::f64::consts::PI * num as f64 / q as f64
    }
}

impl fmt::Display for Flux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Flux {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Flux::parse_reporting(s).map(|(f, _)| f)
    }
}

impl Serialize for Flux {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Flux {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up = 0,
    Down = 1,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Site and spin of a real-space basis state. `m` is the column, `n` the row (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SiteIndex {
    pub m: usize,
    pub n: usize,
    pub spin: Spin,
}

impl SiteIndex {
    pub fn new(m: usize, n: usize, spin: Spin) -> Self {
        SiteIndex { m, n, spin }
    }

    /// Linear index `2·(n·nx + m) + spin`.
    pub fn linear(&self, nx: usize) -> usize {
        2 * (self.n * nx + self.m) + self.spin.index()
    }

    pub fn from_linear(i: usize, nx: usize) -> Self {
        let cell = i / 2;
        let spin = if i % 2 == 0 { Spin::Up } else { Spin::Down };
        SiteIndex {
            m: cell % nx,
            n: cell / nx,
            spin,
        }
    }
}

/// Parameters of the spinful flux lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Nearest-neighbour hopping; sets the energy unit.
    pub t0: f64,
    pub alpha: Flux,
    /// Spin-mixing angle of the y hops, in units of 2π.
    pub beta: f64,
    /// Amplitude of the on-site potential `(-1)^n λ`.
    pub lambda: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ModelParams {
    pub fn new(alpha: Flux, beta: f64, lambda: f64) -> Self {
        ModelParams {
            t0: 1.0,
            alpha,
            beta,
            lambda,
            nx: 6,
            ny: 6,
        }
    }

    pub fn with_size(mut self, nx: usize, ny: usize) -> Self {
        self.nx = nx;
        self.ny = ny;
        self
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// Checks the parameters needed by every representation.
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) || !self.t0.is_finite() {
            return Err(Error::param(format!("t0 must be positive, got {}", self.t0)));
        }
        if !self.beta.is_finite() || !self.lambda.is_finite() {
            return Err(Error::param("beta and lambda must be finite"));
        }
        Ok(())
    }

    /// Checks the lattice extent used by real-space and ribbon builds.
    pub fn validate_lattice(&self) -> Result<()> {
        self.validate()?;
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::param(format!(
                "lattice must be at least 2x2, got {}x{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn staggered_potential(&self, n: usize) -> f64 {
        if n % 2 == 0 {
            self.lambda
        } else {
            -self.lambda
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_reduces_to_lowest_terms() {
        let (f, reduced) = Flux::parse_reporting("2/4").unwrap();
        assert_eq!((f.numerator(), f.denominator()), (1, 2));
        assert!(reduced);
        let (f, reduced) = Flux::parse_reporting("1/3").unwrap();
        assert_eq!(f.to_string(), "1/3");
        assert!(!reduced);
        assert!(Flux::parse_reporting("1/0").is_err());
        assert!(Flux::parse_reporting("x/3").is_err());
    }

    #[test]
    fn magnetic_cell_is_lcm_with_two() {
        assert_eq!(Flux::new(1, 3).unwrap().magnetic_cell_height(), 6);
        assert_eq!(Flux::new(1, 4).unwrap().magnetic_cell_height(), 4);
        assert_eq!(Flux::zero().magnetic_cell_height(), 2);
    }

    #[test]
    fn integer_flux_shift_leaves_phases_unchanged() {
        let a = Flux::new(1, 3).unwrap();
        let b = a.shifted(1);
        for n in 0..12 {
            assert_eq!(a.phase_at_row(n), b.phase_at_row(n));
        }
    }

    #[test]
    fn linear_index_is_a_bijection() {
        let (nx, ny) = (5, 3);
        let mut seen = vec![false; 2 * nx * ny];
        for n in 0..ny {
            for m in 0..nx {
                for s in Spin::BOTH {
                    let site = SiteIndex::new(m, n, s);
                    let i = site.linear(nx);
                    assert!(!seen[i]);
                    seen[i] = true;
                    assert_eq!(SiteIndex::from_linear(i, nx), site);
                }
            }
        }
        assert!(seen.into_iter().all(|x| x));
    }

    #[test]
    fn small_lattices_rejected() {
        let p = ModelParams::new(Flux::zero(), 0.0, 0.0).with_size(1, 4);
        assert!(p.validate_lattice().is_err());
        let p = p.with_size(2, 2).with_t0(-1.0);
        assert!(p.validate_lattice().is_err());
    }
}
