// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{EighInto, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

fn lapack_error(e: ndarray_linalg::error::LinalgError) -> Error {
    Error::Solver {
        message: format!("LAPACK eigensolver failed: {e}"),
        iterations: 0,
        residual: f64::NAN,
    }
}

/// Full Hermitian eigendecomposition; eigenvalues ascending, eigenvectors in columns.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    eigh_into(a.clone())
}

// ndarray-linalg returns conjugated eigenvectors for row-major complex input,
// so the matrix is always handed over in column-major order.
pub fn eigh_into(a: Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let a = if a.t().is_standard_layout() {
        a
    } else {
        let mut f = Array2::zeros(a.raw_dim().f());
        f.assign(&a);
        f
    };
    a.eigh_into(UPLO::Lower).map_err(lapack_error)
}

/// `exp(-i·h·t)` for Hermitian `h`.
pub fn unitary_exp(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let (w, v) = eigh(h)?;
    let phases = w.mapv(|e| C64::from_polar(1.0, -e * t));
    let mut vp = v.clone();
    for (mut col, p) in vp.columns_mut().into_iter().zip(phases.iter()) {
        col.mapv_inplace(|x| x * p);
    }
    Ok(vp.dot(&conj_t(&v)))
}

pub fn conj_t(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|x| x.conj())
}

/// `max |A_ij - B_ij|`.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `‖U†U - I‖_max`.
pub fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let p = conj_t(u).dot(u);
    let id = Array2::<C64>::eye(u.nrows());
    max_abs_diff(&p, &id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_x_eigenvalues() {
        let a = ndarray::array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let (w, _) = eigh(&a).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvectors_satisfy_eigen_equation() {
        let n = 5;
        let a = Array2::from_shape_fn((n, n), |(i, j)| match i.cmp(&j) {
            std::cmp::Ordering::Equal => C64::new(i as f64, 0.0),
            std::cmp::Ordering::Less => C64::new(0.3 * (i + j) as f64, 0.7),
            std::cmp::Ordering::Greater => C64::new(0.3 * (i + j) as f64, -0.7),
        });
        for m in [a.clone(), a.t().to_owned().reversed_axes()] {
            let (w, v) = eigh(&m).unwrap();
            let r = a.dot(&v) - &v * &w.mapv(|x| C64::new(x, 0.0));
            assert!(r.iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn unitary_exp_of_pauli_z() {
        let a = ndarray::array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
        ];
        let u = unitary_exp(&a, 0.7).unwrap();
        assert!((u[(0, 0)] - C64::from_polar(1.0, -0.7)).norm() < 1e-14);
        assert!((u[(1, 1)] - C64::from_polar(1.0, 0.7)).norm() < 1e-14);
        assert!(unitarity_defect(&u) < 1e-14);
    }
}
