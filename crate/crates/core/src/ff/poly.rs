//! Dense univariate polynomials over a [`Field`], lowest coefficient first.

use super::{Elem, Field};

pub fn trim(p: &mut Vec<Elem>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub fn degree(p: &[Elem]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(f: &Field, p: &[Elem], x: Elem) -> Elem {
    p.iter().rev().fold(Elem::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
}

/// Formal derivative.
pub fn derivative(f: &Field, p: &[Elem]) -> Vec<Elem> {
    let mut out: Vec<Elem> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| f.scale(i as i64, c))
        .collect();
    trim(&mut out);
    out
}

pub fn sub(f: &Field, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let n = a.len().max(b.len());
    let mut out: Vec<Elem> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or_default();
            let y = b.get(i).copied().unwrap_or_default();
            f.sub(x, y)
        })
        .collect();
    trim(&mut out);
    out
}

pub fn mul(f: &Field, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Elem::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` modulo a nonzero `m`.
pub fn rem(f: &Field, a: &[Elem], m: &[Elem]) -> Vec<Elem> {
    let dm = degree(m).expect("division by the zero polynomial");
    let lead_inv = f.inv(m[dm]);
    let mut r = a.to_vec();
    trim(&mut r);
    while let Some(dr) = degree(&r) {
        if dr < dm {
            break;
        }
        let c = f.mul(r[dr], lead_inv);
        let shift = dr - dm;
        for i in 0..=dm {
            r[shift + i] = f.sub(r[shift + i], f.mul(c, m[i]));
        }
        trim(&mut r);
    }
    r
}

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(f: &Field, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    if let Some(d) = degree(&x) {
        let inv = f.inv(x[d]);
        for c in x.iter_mut() {
            *c = f.mul(*c, inv);
        }
    }
    x
}

fn mulmod(f: &Field, a: &[Elem], b: &[Elem], m: &[Elem]) -> Vec<Elem> {
    rem(f, &mul(f, a, b), m)
}

/// `a^e mod m`.
pub fn powmod(f: &Field, a: &[Elem], mut e: u64, m: &[Elem]) -> Vec<Elem> {
    let mut result = rem(f, &[Elem::ONE], m);
    let mut base = rem(f, a, m);
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(f, &result, &base, m);
        }
        base = mulmod(f, &base, &base, m);
        e >>= 1;
    }
    result
}

/// Rabin-style irreducibility test: a polynomial of degree `d` over `F_Q`
/// is irreducible iff `gcd(x^{Q^i} - x, f) = 1` for `1 <= i <= d/2`.
pub fn is_irreducible(f: &Field, p: &[Elem]) -> bool {
    let d = match degree(p) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    let x = vec![Elem::ZERO, Elem::ONE];
    let mut h = rem(f, &x, p);
    for _ in 0..d / 2 {
        h = powmod(f, &h, f.order() as u64, p);
        let g = gcd(f, &sub(f, &h, &x), p);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Roots in the field itself, by exhaustive search, in index order.
pub fn roots(f: &Field, p: &[Elem]) -> Vec<Elem> {
    f.elements().filter(|&x| eval(f, p, x).is_zero()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibles_over_f2() {
        let f2 = Field::prime(2).unwrap();
        let e = |v: &[u32]| v.iter().map(|&c| Elem::from_raw(c)).collect::<Vec<_>>();
        assert!(is_irreducible(&f2, &e(&[1, 1, 1])));
        assert!(!is_irreducible(&f2, &e(&[1, 0, 1])));
        assert!(is_irreducible(&f2, &e(&[1, 1, 0, 1])));
        // (x^2 + x + 1)^2 has no roots but is reducible
        assert!(!is_irreducible(&f2, &e(&[1, 0, 1, 0, 1])));
        assert!(is_irreducible(&f2, &e(&[1, 1, 0, 0, 1])));
    }

    #[test]
    fn count_irreducible_quadratics_over_f9() {
        // (Q^2 - Q) / 2 monic irreducible quadratics over F_Q
        let f3 = Field::prime(3).unwrap();
        let f9 = Field::extension(&f3, 2).unwrap();
        let mut n = 0;
        for c0 in f9.elements() {
            for c1 in f9.elements() {
                if is_irreducible(&f9, &[c0, c1, Elem::ONE]) {
                    n += 1;
                }
            }
        }
        assert_eq!(n, (81 - 9) / 2);
    }

    #[test]
    fn gcd_with_derivative_detects_square() {
        let f5 = Field::prime(5).unwrap();
        let e = |v: &[u32]| v.iter().map(|&c| Elem::from_raw(c)).collect::<Vec<_>>();
        // (x - 2)^2 = x^2 - 4x + 4 = x^2 + x + 4
        let p = e(&[4, 1, 1]);
        let g = gcd(&f5, &p, &derivative(&f5, &p));
        assert_eq!(g, e(&[3, 1]));
        assert_eq!(roots(&f5, &p), e(&[2]));
    }
}
