use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use normtrace_lab::agcode::{Code, FunctionWord};
use normtrace_lab::ff::{Elem, Field, FieldTower};
use normtrace_lab::intersect::{count_intersections, PolyGraphCurve};
use normtrace_lab::normtrace::NormTraceCurve;
use normtrace_lab::surface::{build_s1, build_s2, rational_points_s1, SingularityScanner};

/// `(p, m)` of the towers the properties draw from.
const TOWERS: [(u32, u32); 8] = [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2), (2, 4), (3, 3)];

fn curve(p: u32, m: u32) -> Arc<NormTraceCurve> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<NormTraceCurve>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap();
    map.entry((p, m))
        .or_insert_with(|| {
            let t = Arc::new(FieldTower::build(p, m, 3).unwrap());
            Arc::new(NormTraceCurve::new(t).unwrap())
        })
        .clone()
}

fn code(p: u32, m: u32) -> Arc<Code> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<Code>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap();
    map.entry((p, m)).or_insert_with(|| Arc::new(Code::new(curve(p, m)).unwrap())).clone()
}

fn el(f: &Field, raw: u32) -> Elem {
    Elem::from_raw(raw % f.order())
}

fn nonzero(f: &Field, raw: u32) -> Elem {
    Elem::from_raw(1 + raw % (f.order() - 1))
}

fn any_tower() -> impl Strategy<Value = (u32, u32)> {
    prop::sample::select(TOWERS.to_vec())
}

fn parabola(f: &Field, raw: [u32; 3]) -> PolyGraphCurve {
    PolyGraphCurve::parabola(f, nonzero(f, raw[0]), el(f, raw[1]), el(f, raw[2])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms((p, m) in any_tower(), which in 0usize..4, raw in any::<[u32; 3]>()) {
        let c = curve(p, m);
        let t = c.tower();
        let f: &Field = [t.fp(), t.fq(), t.fq2(), t.fq3()][which];
        let [x, y, z] = raw.map(|r| el(f, r));
        prop_assert_eq!(f.add(f.add(x, y), z), f.add(x, f.add(y, z)));
        prop_assert_eq!(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
        prop_assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
        prop_assert_eq!(f.add(x, y), f.add(y, x));
        prop_assert_eq!(f.mul(x, y), f.mul(y, x));
        prop_assert_eq!(f.sub(f.add(x, y), y), x);
        if !y.is_zero() {
            prop_assert_eq!(f.mul(f.div(x, y), y), x);
            prop_assert_eq!(f.mul(y, f.inv(y)), Elem::ONE);
        }
        prop_assert_eq!(f.pow(x, f.order() as u64), x);
    }

    #[test]
    fn frobenius_is_an_automorphism((p, m) in any_tower(), raw in any::<[u32; 2]>()) {
        let c = curve(p, m);
        let t = c.tower();
        let f = t.fq3();
        let [x, y] = raw.map(|r| el(f, r));
        let fr = |v| t.frobenius(f, v);
        prop_assert_eq!(fr(f.add(x, y)), f.add(fr(x), fr(y)));
        prop_assert_eq!(fr(f.mul(x, y)), f.mul(fr(x), fr(y)));
        prop_assert_eq!(fr(fr(fr(x))), x);
        prop_assert_eq!(fr(x), f.pow(x, t.q() as u64));
    }

    #[test]
    fn norm_multiplicative_trace_linear((p, m) in any_tower(), raw in any::<[u32; 4]>()) {
        let c = curve(p, m);
        let t = c.tower();
        let (fq, f3) = (t.fq(), t.fq3());
        let [x, y] = [el(f3, raw[0]), el(f3, raw[1])];
        let [l, mu] = [el(fq, raw[2]), el(fq, raw[3])];
        prop_assert_eq!(t.norm(f3.mul(x, y)), fq.mul(t.norm(x), t.norm(y)));
        let lhs = t.trace(f3.add(f3.mul(l, x), f3.mul(mu, y)));
        prop_assert_eq!(lhs, fq.add(fq.mul(l, t.trace(x)), fq.mul(mu, t.trace(y))));
        prop_assert!(fq.contains(t.norm(x)) && fq.contains(t.trace(x)));
    }

    #[test]
    fn phi_round_trips((p, m) in any_tower(), raw in any::<[u32; 4]>()) {
        let c = curve(p, m);
        let t = c.tower();
        let basis = t.find_normal_basis();
        let x = el(t.fq3(), raw[0]);
        prop_assert_eq!(basis.phi(basis.phi_inv(x)), x);
        let s = [raw[1], raw[2], raw[3]].map(|r| el(t.fq(), r));
        prop_assert_eq!(basis.phi_inv(basis.phi(s)), s);
    }

    #[test]
    fn fibers_partition_the_curve((p, m) in prop::sample::select(vec![(2, 1), (3, 1), (2, 2), (5, 1)]), raw in any::<u32>()) {
        let c = curve(p, m);
        let f = c.field();
        let q = c.q() as usize;
        let x = el(f, raw);
        let fiber = c.fiber_over_x(x).unwrap();
        prop_assert_eq!(fiber.len(), q * q);
        for pt in &fiber {
            prop_assert_eq!(pt.x, x);
            prop_assert!(c.is_on_curve(*pt).unwrap());
        }
        let ys: BTreeSet<Elem> = fiber.iter().map(|pt| pt.y).collect();
        prop_assert_eq!(ys.len(), fiber.len());
    }

    #[test]
    fn count_is_independent_of_evaluation_order((p, m) in any_tower(), raw in any::<[u32; 3]>(), seed in any::<u64>()) {
        let c = curve(p, m);
        let f = c.field();
        let g = parabola(f, raw);
        let mut xs: Vec<Elem> = f.elements().collect();
        xs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let brute = xs.iter().filter(|&&x| c.norm(x) == c.trace(g.eval(f, x))).count() as u64;
        let got = count_intersections(&c, &g).unwrap();
        prop_assert_eq!(got.n_points, brute);
        let q = c.q();
        prop_assert!(got.residue < q);
        prop_assert_eq!(got.n_points as i64, (q * q) as i64 + got.eta * q as i64 + got.residue as i64);
        prop_assert!(got.n_points <= 2 * (q * q + q + 1));
    }

    #[test]
    fn surface_count_matches_intersections((p, m) in prop::sample::select(vec![(3, 1), (2, 2)]), raw in any::<[u32; 3]>()) {
        let c = curve(p, m);
        let t = c.tower();
        let g = parabola(c.field(), raw);
        let s1 = build_s1(t, &g, &t.find_normal_basis()).unwrap();
        prop_assert_eq!(rational_points_s1(t, &s1), count_intersections(&c, &g).unwrap().n_points);
    }

    #[test]
    fn weight_routes_agree_at_q3(raw in any::<[u32; 4]>()) {
        let code = code(3, 1);
        let f = code.field();
        let fw = FunctionWord::new(el(f, raw[0]), el(f, raw[1]), el(f, raw[2]), el(f, raw[3]));
        prop_assert_eq!(code.weight_of(&fw), code.hamming_weight(&fw));
    }

    #[test]
    fn weight_is_scale_invariant_and_classified((p, m) in prop::sample::select(vec![(3, 1), (2, 2), (5, 1)]), raw in any::<[u32; 5]>()) {
        let code = code(p, m);
        let f = code.field();
        let fw = FunctionWord::new(el(f, raw[0]), el(f, raw[1]), el(f, raw[2]), el(f, raw[3]));
        let w = code.weight_of(&fw);
        prop_assert_eq!(code.weight_of(&fw.scaled(f, nonzero(f, raw[4]))), w);
        prop_assert!(code.classify_weight(&fw).derived.admits(w));
        let q = code.params().q;
        prop_assert!(w <= q.pow(5));
        if fw != FunctionWord::default() {
            prop_assert!(w >= q.pow(5) - 2 * (q * q + q + 1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugate_points_correspond((p, m) in prop::sample::select(vec![(2, 1), (3, 1)]), raw in any::<[u32; 3]>()) {
        let c = curve(p, m);
        let t = c.tower();
        let basis = t.find_normal_basis();
        let g = parabola(c.field(), raw);
        let s1 = build_s1(t, &g, &basis).unwrap();
        let s2 = build_s2(t, &g).unwrap();
        for beta in t.fq3().elements() {
            let on_s1 = s1.eval(t.fq(), basis.phi_inv(beta)).is_zero();
            prop_assert_eq!(s2.contains_conjugate_point(t, beta), on_s1);
        }
    }

    #[test]
    fn singular_locus_is_frobenius_closed(raw in any::<[u32; 3]>()) {
        let c = curve(3, 1);
        let t = c.tower();
        let basis = t.find_normal_basis();
        let scanner = SingularityScanner::new(t, &basis).unwrap();
        let s1 = build_s1(t, &parabola(c.field(), raw), &basis).unwrap();
        let rep = scanner.find_singular_points(&s1);
        prop_assert!(rep.conjugate_closed);
        prop_assert!(rep.delta <= 4);
        prop_assert_eq!(rep.at_infinity, 0);
        let set: BTreeSet<_> = rep.points.iter().map(|pt| (pt.field_degree, pt.coords)).collect();
        for pt in &rep.points {
            let f: &Field = match pt.field_degree {
                1 => t.fq(),
                2 => t.fq2(),
                3 => t.fq3(),
                _ => t.fq4().unwrap(),
            };
            prop_assert!(s1.is_singular_at(f, pt.coords));
            let image = pt.coords.map(|x| t.frobenius(f, x));
            prop_assert!(set.contains(&(pt.field_degree, image)));
        }
    }
}
