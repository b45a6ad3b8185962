//! Closed-form singular points for `B = 0`, and lines through a singular point.

use serde::{Deserialize, Serialize};

use super::SurfaceS2;
use crate::error::{Error, Result};
use crate::ff::{poly, Elem, FieldTower};

/// Singular points of `X₀X₁X₂ = A X₀² + A^q X₁² + A^{q²} X₂² + D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BZeroPoints {
    pub points: Vec<[Elem; 3]>,
    /// `D = -4 N(A)`; otherwise `points` is empty.
    pub consistent: bool,
    /// `N(A)` is a square in `F_q`, so the sign patterns use `γ` itself
    /// rather than `-γ`.
    pub literal_signs: bool,
    pub explanation: Option<String>,
}

/// For odd `q`, `A ≠ 0` and `D = -4 N(A)`: the four points
/// `(ε₀γ, ε₁γ^q, ε₂γ^{q²})` with `γ = ±2A^{(q²+q)/2}` and an even number of
/// minus signs. The sign of `γ` is `+` exactly when `N(A)` is a square in
/// `F_q`, since the sign product must equal the quadratic character of `N(A)`.
pub fn b_zero_singularities(tower: &FieldTower, a: Elem, d: Elem) -> Result<BZeroPoints> {
    if tower.r() != 3 {
        return Err(Error::RequiresCubicExtension(tower.r()));
    }
    if tower.p() == 2 {
        return Err(Error::Precondition("the B = 0 construction needs odd q".into()));
    }
    let (fq, f3) = (tower.fq(), tower.fq3());
    f3.check(a)?;
    fq.check(d)?;
    if a.is_zero() {
        return Err(Error::Precondition("A must be nonzero".into()));
    }
    let q = tower.q() as u64;
    let n = tower.norm_in(f3, a);
    let square = fq.is_square(n);
    if d != fq.scale(-4, n) {
        let explanation = if d.is_zero() {
            "D = 0: the origin is the only singular point".to_string()
        } else {
            "D differs from -4 N(A): no singular points".to_string()
        };
        return Ok(BZeroPoints {
            points: Vec::new(),
            consistent: false,
            literal_signs: square,
            explanation: Some(explanation),
        });
    }
    let mut gamma = f3.scale(2, f3.pow(a, (q * q + q) / 2));
    if !square {
        gamma = f3.neg(gamma);
    }
    let g1 = tower.frobenius(f3, gamma);
    let g2 = tower.frobenius(f3, g1);
    let m = |x| f3.neg(x);
    let points = vec![
        [gamma, g1, g2],
        [gamma, m(g1), m(g2)],
        [m(gamma), g1, m(g2)],
        [m(gamma), m(g1), g2],
    ];
    Ok(BZeroPoints { points, consistent: true, literal_signs: square, explanation: None })
}

/// Outcome of substituting `X = P + t (b, b^q, b^{q²})` into the surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCheck {
    pub directions: usize,
    /// `b = 0` gives the point itself rather than a line.
    pub degenerate: usize,
    pub p3_nonzero: usize,
    /// Closed-form `p₃, p₂, p₁` equal the coefficients of the expanded substitution.
    pub formula_agrees: bool,
    /// Directions whose line lies entirely in the surface.
    pub lines: usize,
}

/// Counts lines of the family through `point = (a, a^q, a^{q²})` that lie on
/// a quadratic `S₂`, over the given directions `b`.
pub fn check_lines_through_singularity(
    tower: &FieldTower,
    s2: &SurfaceS2,
    point: [Elem; 3],
    directions: &[Elem],
) -> Result<LineCheck> {
    if s2.degree() != 2 {
        return Err(Error::Precondition("line check expects the quadratic model".into()));
    }
    let f3 = tower.fq3();
    let frob = |x| tower.frobenius(f3, x);
    if point[1] != frob(point[0]) || point[2] != frob(point[1]) {
        return Err(Error::Precondition("point is not of the form (a, a^q, a^{q²})".into()));
    }
    let (big_a, big_b) = (s2.coeffs[0], s2.coeffs[1]);
    let tr3 = |x: Elem| tower.trace_in(f3, x);
    let [a0, a1, a2] = point;
    let mut check = LineCheck {
        directions: directions.len(),
        degenerate: 0,
        p3_nonzero: 0,
        formula_agrees: true,
        lines: 0,
    };
    for &b in directions {
        f3.check(b)?;
        if b.is_zero() {
            check.degenerate += 1;
            continue;
        }
        let (b1, b2) = (frob(b), frob(frob(b)));
        let mul3 = |x, y, z| f3.mul(f3.mul(x, y), z);
        let p3 = mul3(b, b1, b2);
        let ab2 = f3.mul(big_a, f3.square(b));
        let p2 = f3.add(
            f3.neg(tr3(ab2)),
            f3.add(f3.add(mul3(b, b1, a2), mul3(b2, b, a1)), mul3(b2, b1, a0)),
        );
        let aab = mul3(big_a, a0, b);
        let p1 = f3.add(
            f3.neg(f3.add(f3.scale(2, tr3(aab)), tr3(f3.mul(big_b, b)))),
            f3.add(f3.add(mul3(b, a1, a2), mul3(b1, a2, a0)), mul3(b2, a0, a1)),
        );
        let expanded = expand_substitution(tower, s2, point, [b, b1, b2]);
        let coeff = |i: usize| expanded.get(i).copied().unwrap_or_default();
        check.formula_agrees &= [p1, p2, p3] == [coeff(1), coeff(2), coeff(3)];
        if !p3.is_zero() {
            check.p3_nonzero += 1;
        }
        if expanded.is_empty() {
            check.lines += 1;
        }
    }
    Ok(check)
}

/// `X₀X₁X₂ - (right-hand side)` along the line, as a polynomial in `t`.
fn expand_substitution(tower: &FieldTower, s2: &SurfaceS2, p: [Elem; 3], v: [Elem; 3]) -> Vec<Elem> {
    let f3 = tower.fq3();
    let q = tower.q() as u64;
    let lin: Vec<Vec<Elem>> = (0..3).map(|i| vec![p[i], v[i]]).collect();
    let mut acc = poly::mul(f3, &poly::mul(f3, &lin[0], &lin[1]), &lin[2]);
    for (i, l) in lin.iter().enumerate() {
        let conj = |c: Elem| f3.pow(c, q.pow(i as u32));
        let sq = poly::mul(f3, l, l);
        let quad: Vec<Elem> = sq.iter().map(|&c| f3.mul(conj(s2.coeffs[0]), c)).collect();
        let linear: Vec<Elem> = l.iter().map(|&c| f3.mul(conj(s2.coeffs[1]), c)).collect();
        acc = poly::sub(f3, &acc, &quad);
        acc = poly::sub(f3, &acc, &linear);
    }
    acc = poly::sub(f3, &acc, &[s2.constant]);
    poly::trim(&mut acc);
    acc
}
