//! Matrix elements of cos²θ between rotor states `|J, M⟩`.
//!
//! cos²θ couples only `ΔJ = 0, ±2` at fixed `M`. The closed forms below are
//! the production path. [`quadrature_element`] evaluates the same integrals
//! numerically from associated Legendre functions and serves as an
//! independent check on them.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, normalized_legendre};

fn check_domain(j: u32, m: i32) -> Result<()> {
    if m.unsigned_abs() > j {
        return Err(Error::Domain(format!("|M| = {} exceeds J = {j}", m.unsigned_abs())));
    }
    Ok(())
}

/// `⟨J M|cos²θ|J M⟩ = 1/3 + (2/3)·[J(J+1) − 3M²] / [(2J−1)(2J+3)]`.
pub fn cos2_diag(j: u32, m: i32) -> Result<f64> {
    check_domain(j, m)?;
    let jf = j as f64;
    let m2 = (m as f64).powi(2);
    Ok(1.0 / 3.0 + 2.0 / 3.0 * (jf * (jf + 1.0) - 3.0 * m2) / ((2.0 * jf - 1.0) * (2.0 * jf + 3.0)))
}

/// `⟨J+2 M|cos²θ|J M⟩`, symmetric in the two states.
pub fn cos2_couple(j: u32, m: i32) -> Result<f64> {
    check_domain(j, m)?;
    let jf = j as f64;
    let m2 = (m as f64).powi(2);
    let num = ((jf + 1.0).powi(2) - m2) * ((jf + 2.0).powi(2) - m2);
    let den = (2.0 * jf + 1.0) * (2.0 * jf + 5.0);
    Ok((num / den).sqrt() / (2.0 * jf + 3.0))
}

/// Default node count for [`quadrature_element`].
pub fn default_nodes(j1: u32, j2: u32) -> usize {
    2 * (j1 + j2) as usize + 16
}

/// `∫₀^π Θ_{J1 M} cos²θ Θ_{J2 M} sinθ dθ` by Gauss–Legendre quadrature in `cos θ`.
pub fn quadrature_element(j1: u32, j2: u32, m: i32, nodes: usize) -> Result<f64> {
    check_domain(j1, m)?;
    check_domain(j2, m)?;
    let required = (j1 + j2) as usize + 3;
    if nodes < required {
        return Err(Error::InsufficientNodes { required, given: nodes });
    }
    let am = m.unsigned_abs();
    let top = j1.max(j2);
    let (xs, ws) = gauss_legendre(nodes);
    let i1 = (j1 - am) as usize;
    let i2 = (j2 - am) as usize;
    Ok(xs
        .iter()
        .zip(&ws)
        .map(|(&x, &w)| {
            let p = normalized_legendre(am, top, x);
            w * p[i1] * x * x * p[i2]
        })
        .sum())
}

/// Banded cos²θ operator for one `M` over `J = |M| ..= j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cos2Band {
    m: i32,
    j_max: u32,
    diag: Vec<f64>,
    couple: Vec<f64>,
}

impl Cos2Band {
    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn j_min(&self) -> u32 {
        self.m.unsigned_abs()
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    /// Diagonal entries, `diag()[k]` for `J = |M| + k`.
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// `couple()[k]` is `⟨J+2|cos²θ|J⟩` for `J = |M| + k`.
    pub fn couple(&self) -> &[f64] {
        &self.couple
    }

    pub fn diag_at(&self, j: u32) -> Option<f64> {
        j.checked_sub(self.j_min())
            .and_then(|k| self.diag.get(k as usize).copied())
    }

    pub fn couple_at(&self, j: u32) -> Option<f64> {
        j.checked_sub(self.j_min())
            .and_then(|k| self.couple.get(k as usize).copied())
    }
}

pub fn cos2_band(m: i32, j_max: u32) -> Result<Cos2Band> {
    check_domain(j_max, m)?;
    let j_min = m.unsigned_abs();
    let diag = (j_min..=j_max).map(|j| cos2_diag(j, m)).collect::<Result<Vec<_>>>()?;
    let couple = if j_max >= j_min + 2 {
        (j_min..=j_max - 2)
            .map(|j| cos2_couple(j, m))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(Cos2Band { m, j_max, diag, couple })
}
