//! Rédei-polynomial data for affine point sets: size and coordinate sums, the
//! nucleus (A/s, B/s), renitent-line detection by direct counting, and the
//! leading coefficient polynomials of H(U,V) = ∏(U + a_iV − b_i).

use crate::gf::{Fe, FieldCtx};
use crate::plane::Slope;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RedeiError {
    #[error("affine set is empty")]
    EmptySet,
    #[error("set size is divisible by the characteristic")]
    SizeDivisibleByP,
    #[error("field order must exceed 2")]
    OrderTooSmall,
    #[error("coefficient bound exceeds the set size")]
    BoundTooLarge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RedeiSummary {
    pub s: u64,
    /// Sum of the first coordinates.
    pub a_sum: Fe,
    /// Sum of the second coordinates.
    pub b_sum: Fe,
    /// (A/s, B/s); None when p divides s.
    pub nucleus: Option<(Fe, Fe)>,
}

/// A direction whose lines all share one intersection residue except for a
/// single line with a different one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenitentLine {
    pub direction: Slope,
    /// Intercept: the line is Y = dX + intercept, or X = intercept when vertical.
    pub intercept: Fe,
    /// Residue (mod p) of the q − 1 agreeing lines.
    pub mu: u32,
    /// Residue of this line.
    pub tau: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RenitentVerdict {
    Verified { nucleus: (Fe, Fe), lines: Vec<RenitentLine> },
    Counterexample { nucleus: (Fe, Fe), line: RenitentLine },
}

fn dedupe(pts: &[(Fe, Fe)]) -> Vec<(Fe, Fe)> {
    let set: BTreeSet<(Fe, Fe)> = pts.iter().copied().collect();
    set.into_iter().collect()
}

pub fn redei_summary(f: &FieldCtx, pts: &[(Fe, Fe)]) -> Result<RedeiSummary, RedeiError> {
    let pts = dedupe(pts);
    if pts.is_empty() {
        return Err(RedeiError::EmptySet);
    }
    let a_sum = pts.iter().fold(Fe(0), |acc, &(a, _)| f.add(acc, a));
    let b_sum = pts.iter().fold(Fe(0), |acc, &(_, b)| f.add(acc, b));
    let s = pts.len() as u64;
    let s_fe = f.from_int(s);
    let nucleus = (s_fe != Fe(0)).then(|| {
        let inv = f.inv(s_fe).expect("nonzero");
        (f.mul(a_sum, inv), f.mul(b_sum, inv))
    });
    Ok(RedeiSummary { s, a_sum, b_sum, nucleus })
}

/// Renitent candidates among the slope-d intercept counts: residue patterns
/// where exactly one of the q lines disagrees with the other q − 1.
fn detect(f: &FieldCtx, pts: &[(Fe, Fe)], d: Fe) -> Vec<(Fe, u32, u32)> {
    let p = f.p();
    let q = f.order();
    let mut counts = vec![0u32; q as usize];
    for &(a, b) in pts {
        let k = f.sub(b, f.mul(d, a));
        counts[k.0 as usize] += 1;
    }
    let mut by_residue = vec![0u32; p as usize];
    for &c in &counts {
        by_residue[(c % p) as usize] += 1;
    }
    let mut out = Vec::new();
    for tau in 0..p {
        if by_residue[tau as usize] != 1 {
            continue;
        }
        for mu in 0..p {
            if mu != tau && by_residue[mu as usize] == q - 1 {
                let k = (0..q).find(|&k| counts[k as usize] % p == tau).unwrap();
                out.push((Fe(k), mu, tau));
            }
        }
    }
    out
}

/// All renitent lines of T, every direction including the vertical one, which
/// is handled by swapping the two coordinates.
pub fn find_renitent_lines(f: &FieldCtx, pts: &[(Fe, Fe)]) -> Vec<RenitentLine> {
    let pts = dedupe(pts);
    if pts.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for d in f.elements() {
        for (intercept, mu, tau) in detect(f, &pts, d) {
            out.push(RenitentLine { direction: Slope::Finite(d), intercept, mu, tau });
        }
    }
    let swapped: Vec<(Fe, Fe)> = pts.iter().map(|&(a, b)| (b, a)).collect();
    for (intercept, mu, tau) in detect(f, &swapped, Fe(0)) {
        out.push(RenitentLine { direction: Slope::Vertical, intercept, mu, tau });
    }
    out
}

/// Check that every renitent line passes through the nucleus, by incidence and
/// independently by the intercept formula (B − Ad)/s resp. A/s.
pub fn verify_renitent_lemma(f: &FieldCtx, pts: &[(Fe, Fe)]) -> Result<RenitentVerdict, RedeiError> {
    if f.order() <= 2 {
        return Err(RedeiError::OrderTooSmall);
    }
    let summary = redei_summary(f, pts)?;
    let (na, nb) = summary.nucleus.ok_or(RedeiError::SizeDivisibleByP)?;
    let s_inv = f.inv(f.from_int(summary.s)).expect("s invertible");
    for line in find_renitent_lines(f, pts) {
        let (incident, formula) = match line.direction {
            Slope::Finite(d) => (
                nb == f.add(f.mul(d, na), line.intercept),
                line.intercept == f.mul(f.sub(summary.b_sum, f.mul(summary.a_sum, d)), s_inv),
            ),
            Slope::Vertical => (
                na == line.intercept,
                line.intercept == f.mul(summary.a_sum, s_inv),
            ),
        };
        debug_assert_eq!(incident, formula);
        if !incident || !formula {
            return Ok(RenitentVerdict::Counterexample { nucleus: (na, nb), line });
        }
    }
    Ok(RenitentVerdict::Verified { nucleus: (na, nb), lines: find_renitent_lines(f, pts) })
}

/// Coefficient polynomials h_0..h_bound of H(U,V) = Σ h_j(V)·U^(s−j), as
/// ascending coefficient vectors in V. deg h_j ≤ j.
pub fn redei_coefficients(
    f: &FieldCtx,
    pts: &[(Fe, Fe)],
    bound: usize,
) -> Result<Vec<Vec<Fe>>, RedeiError> {
    let pts = dedupe(pts);
    if pts.is_empty() {
        return Err(RedeiError::EmptySet);
    }
    if bound > pts.len() {
        return Err(RedeiError::BoundTooLarge);
    }
    let mut h: Vec<Vec<Fe>> = vec![Vec::new(); bound + 1];
    h[0] = vec![f.from_int(1)];
    for &(a, b) in &pts {
        // Multiply the truncated expansion by (U + aV − b): descending j so
        // each h_{j−1} is still the previous round's value.
        for j in (1..=bound).rev() {
            let shifted = mul_linear(f, &h[j - 1], a, f.neg(b));
            h[j] = poly_add(f, &h[j], &shifted);
        }
    }
    for (j, hj) in h.iter().enumerate() {
        assert!(hj.len() <= j + 1, "deg h_{j} must be at most {j}");
    }
    Ok(h)
}

fn poly_add(f: &FieldCtx, x: &[Fe], y: &[Fe]) -> Vec<Fe> {
    let mut out = vec![Fe(0); x.len().max(y.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let xv = x.get(i).copied().unwrap_or(Fe(0));
        let yv = y.get(i).copied().unwrap_or(Fe(0));
        *o = f.add(xv, yv);
    }
    while out.last() == Some(&Fe(0)) {
        out.pop();
    }
    out
}

/// Multiply a polynomial in V by the linear form cV + e.
fn mul_linear(f: &FieldCtx, x: &[Fe], c: Fe, e: Fe) -> Vec<Fe> {
    let mut out = vec![Fe(0); x.len() + 1];
    for (i, &xi) in x.iter().enumerate() {
        out[i] = f.add(out[i], f.mul(xi, e));
        out[i + 1] = f.add(out[i + 1], f.mul(xi, c));
    }
    while out.last() == Some(&Fe(0)) {
        out.pop();
    }
    out
}

/// Evaluate an ascending coefficient vector at a point.
pub fn poly_eval(f: &FieldCtx, coeffs: &[Fe], x: Fe) -> Fe {
    coeffs
        .iter()
        .rev()
        .fold(Fe(0), |acc, &c| f.add(f.mul(acc, x), c))
}
