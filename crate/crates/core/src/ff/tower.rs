use std::sync::Arc;

use super::{linalg, Elem, Field};
use crate::error::{Error, Result};

/// Largest supported base-field order `q = p^m`; keeps `q^3` inside a `u32`.
pub const MAX_Q: u32 = 1 << 10;

/// `F_{q^4}` is only built when it fits the table limit.
pub const FQ4_MAX_Q: u32 = 32;

/// The tower `F_p ⊂ F_q ⊂ {F_{q^2} ⊂ F_{q^4}, F_{q^3}}`.
///
/// `F_{q^2}` and `F_{q^3}` are extensions of `F_q` by the least monic
/// irreducible quadratic and cubic; `F_{q^4}` is a quadratic extension of
/// `F_{q^2}`, so `F_{q^2}` sits inside it index-for-index.
#[derive(Debug)]
pub struct FieldTower {
    p: u32,
    m: u32,
    q: u32,
    r: u32,
    fp: Arc<Field>,
    fq: Arc<Field>,
    fq2: Arc<Field>,
    fq3: Arc<Field>,
    fq4: Option<Arc<Field>>,
}

impl FieldTower {
    pub fn build(p: u32, m: u32, r: u32) -> Result<FieldTower> {
        if m == 0 {
            return Err(Error::ZeroExponent);
        }
        if !(2..=3).contains(&r) {
            return Err(Error::UnsupportedDegree(r));
        }
        if !super::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let q = (p as u64)
            .checked_pow(m)
            .filter(|&q| q <= MAX_Q as u64)
            .ok_or(Error::FieldTooLarge { order: (p as u64).saturating_pow(m), cap: MAX_Q as u64 })?
            as u32;
        let fp = Field::prime(p)?;
        let fq = if m == 1 { Arc::clone(&fp) } else { Field::extension(&fp, m)? };
        let fq2 = Field::extension(&fq, 2)?;
        let fq3 = Field::extension(&fq, 3)?;
        let fq4 = if q <= FQ4_MAX_Q { Some(Field::extension(&fq2, 2)?) } else { None };
        Ok(FieldTower { p, m, q, r, fp, fq, fq2, fq3, fq4 })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn fp(&self) -> &Arc<Field> {
        &self.fp
    }

    pub fn fq(&self) -> &Arc<Field> {
        &self.fq
    }

    pub fn fq2(&self) -> &Arc<Field> {
        &self.fq2
    }

    pub fn fq3(&self) -> &Arc<Field> {
        &self.fq3
    }

    pub fn fq4(&self) -> Option<&Arc<Field>> {
        self.fq4.as_ref()
    }

    /// `F_{q^r}`, the field the curve lives over.
    pub fn ext(&self) -> &Arc<Field> {
        if self.r == 2 {
            &self.fq2
        } else {
            &self.fq3
        }
    }

    /// Degree of `field` over `F_q`.
    pub fn degree_over_q(&self, field: &Field) -> u32 {
        field.degree() / self.m
    }

    /// Relative Frobenius `x ↦ x^q`.
    #[inline]
    pub fn frobenius(&self, field: &Field, x: Elem) -> Elem {
        field.pow(x, self.q as u64)
    }

    /// Norm from `field` down to `F_q`: `x^{(|field| - 1)/(q - 1)}`.
    pub fn norm_in(&self, field: &Field, x: Elem) -> Elem {
        let e = (field.order() as u64 - 1) / (self.q as u64 - 1);
        field.pow(x, e)
    }

    /// Trace from `field` down to `F_q`: `x + x^q + ... + x^{q^{k-1}}`.
    pub fn trace_in(&self, field: &Field, x: Elem) -> Elem {
        let mut acc = Elem::ZERO;
        let mut conj = x;
        for _ in 0..self.degree_over_q(field) {
            acc = field.add(acc, conj);
            conj = self.frobenius(field, conj);
        }
        acc
    }

    /// Norm `F_{q^r} → F_q`.
    pub fn norm(&self, x: Elem) -> Elem {
        self.norm_in(self.ext(), x)
    }

    /// Trace `F_{q^r} → F_q`.
    pub fn trace(&self, x: Elem) -> Elem {
        self.trace_in(self.ext(), x)
    }

    /// The first element of `F_{q^3}`, in index order, whose conjugates
    /// `α, α^q, α^{q^2}` are linearly independent over `F_q`.
    pub fn find_normal_basis(&self) -> NormalBasis {
        let f3 = &self.fq3;
        f3.nonzero_elements()
            .find_map(|a| NormalBasis::try_new(self, a))
            .expect("every finite extension has a normal basis")
    }
}

/// A normal basis `{α, α^q, α^{q^2}}` of `F_{q^3}` over `F_q`, together with
/// the coordinate map `Φ_B` and its inverse.
#[derive(Debug, Clone)]
pub struct NormalBasis {
    fq: Arc<Field>,
    fq3: Arc<Field>,
    alpha: Elem,
    conjugates: [Elem; 3],
    /// Inverse of the matrix whose column `i` holds the `F_q`-coordinates of `α^{q^i}`.
    to_basis: Vec<Vec<Elem>>,
}

impl NormalBasis {
    /// `None` if `alpha` is not a normal element.
    pub fn try_new(tower: &FieldTower, alpha: Elem) -> Option<NormalBasis> {
        let f3 = tower.fq3();
        let a1 = tower.frobenius(f3, alpha);
        let a2 = tower.frobenius(f3, a1);
        let conjugates = [alpha, a1, a2];
        let cols: Vec<Vec<Elem>> = conjugates.iter().map(|&w| f3.coeffs(w)).collect();
        let m: Vec<Vec<Elem>> = (0..3).map(|j| (0..3).map(|i| cols[i][j]).collect()).collect();
        let to_basis = linalg::invert(tower.fq(), &m)?;
        Some(NormalBasis {
            fq: Arc::clone(tower.fq()),
            fq3: Arc::clone(f3),
            alpha,
            conjugates,
            to_basis,
        })
    }

    pub fn alpha(&self) -> Elem {
        self.alpha
    }

    pub fn conjugates(&self) -> [Elem; 3] {
        self.conjugates
    }

    /// `Φ_B(s) = s_0 α + s_1 α^q + s_2 α^{q^2}`.
    pub fn phi(&self, s: [Elem; 3]) -> Elem {
        let f = &self.fq3;
        s.iter()
            .zip(self.conjugates)
            .fold(Elem::ZERO, |acc, (&si, w)| f.add(acc, f.mul(si, w)))
    }

    /// `Φ_B^{-1}`.
    pub fn phi_inv(&self, x: Elem) -> [Elem; 3] {
        let c = self.fq3.coeffs(x);
        let s = linalg::apply(&self.fq, &self.to_basis, &c);
        [s[0], s[1], s[2]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_orders() {
        let t = FieldTower::build(2, 1, 3).unwrap();
        assert_eq!((t.fq().order(), t.fq3().order()), (2, 8));
        let t = FieldTower::build(2, 2, 3).unwrap();
        assert_eq!((t.fq().order(), t.fq2().order(), t.fq3().order()), (4, 16, 64));
        assert_eq!(t.fq4().unwrap().order(), 256);
        assert_eq!(t.ext().order(), 64);
        let t2 = FieldTower::build(2, 1, 2).unwrap();
        assert_eq!(t2.ext().order(), 4);
    }

    #[test]
    fn build_errors() {
        assert_eq!(FieldTower::build(4, 1, 3).unwrap_err(), Error::NotPrime(4));
        assert_eq!(FieldTower::build(2, 0, 3).unwrap_err(), Error::ZeroExponent);
        assert_eq!(FieldTower::build(2, 1, 4).unwrap_err(), Error::UnsupportedDegree(4));
        assert!(matches!(FieldTower::build(2, 11, 3), Err(Error::FieldTooLarge { .. })));
    }

    #[test]
    fn base_field_is_frobenius_fixed() {
        let t = FieldTower::build(3, 1, 3).unwrap();
        for a in t.fq().elements() {
            assert_eq!(t.frobenius(t.fq3(), a), a);
        }
        let t = FieldTower::build(2, 2, 3).unwrap();
        for a in t.fq().elements() {
            assert_eq!(t.fq3().pow(a, 4), a);
        }
        // exactly q elements of F_{q^3} are fixed
        let fixed = t.fq3().elements().filter(|&x| t.frobenius(t.fq3(), x) == x).count();
        assert_eq!(fixed, 4);
    }

    #[test]
    fn frobenius_matches_repeated_multiplication() {
        let t = FieldTower::build(3, 1, 3).unwrap();
        let f = t.fq3();
        for x in f.elements() {
            assert_eq!(t.frobenius(f, x), f.mul(f.mul(x, x), x));
        }
    }

    #[test]
    fn norm_and_trace_small_values() {
        let t = FieldTower::build(2, 1, 3).unwrap();
        assert_eq!(t.norm(Elem::ZERO), Elem::ZERO);
        assert_eq!(t.norm(Elem::ONE), Elem::ONE);
        assert_eq!(t.trace(Elem::ZERO), Elem::ZERO);
        assert_eq!(t.trace(Elem::ONE), Elem::ONE);
        assert_eq!(t.fq3().elements().filter(|&x| t.norm(x) == Elem::ONE).count(), 7);
        assert_eq!(t.fq3().elements().filter(|&x| t.trace(x).is_zero()).count(), 4);
        let t3 = FieldTower::build(3, 1, 3).unwrap();
        assert_eq!(t3.trace(Elem::ONE), Elem::ZERO);
    }

    #[test]
    fn normal_basis_q2() {
        let t = FieldTower::build(2, 1, 3).unwrap();
        let nb = t.find_normal_basis();
        let [a, a1, a2] = nb.conjugates();
        assert_eq!(a1, t.fq3().pow(a, 2));
        assert_eq!(a2, t.fq3().pow(a, 4));
        let normal = t.fq3().elements().filter(|&x| NormalBasis::try_new(&t, x).is_some()).count();
        assert!(normal > 0);
        // α is the first normal element in index order
        assert!(t.fq3().elements().take_while(|&x| x != a).all(|x| NormalBasis::try_new(&t, x).is_none()));
    }

    #[test]
    fn phi_basics_q3() {
        let t = FieldTower::build(3, 1, 3).unwrap();
        let nb = t.find_normal_basis();
        let (z, o) = (Elem::ZERO, Elem::ONE);
        assert_eq!(nb.phi([z, z, z]), z);
        assert_eq!(nb.phi([o, z, z]), nb.conjugates()[0]);
        assert_eq!(nb.phi([z, o, z]), nb.conjugates()[1]);
        assert_eq!(nb.phi([z, z, o]), nb.conjugates()[2]);
        let tr = nb.phi([o, o, o]);
        assert_eq!(tr, t.trace(nb.alpha()));
        assert!(t.fq().contains(tr));
        for x in t.fq().elements() {
            for y in t.fq().elements() {
                for w in t.fq().elements() {
                    assert_eq!(nb.phi_inv(nb.phi([x, y, w])), [x, y, w]);
                }
            }
        }
    }
}
