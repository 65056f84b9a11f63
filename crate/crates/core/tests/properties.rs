use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hyperrho::charkit::{
    all_characteristics, char_of_partition, gamma_action, partition_of_char, Characteristic, IndexSet,
    SymplecticElement,
};
use hyperrho::rho::{elem_sym, vandermonde, RootSystem};
use hyperrho::theta::{parity_residual, random_tau, ThetaEvaluator};

fn characteristic(g: usize) -> impl Strategy<Value = Characteristic> {
    (0usize..1 << (2 * g)).prop_map(move |i| Characteristic::from_index(g, i).unwrap())
}

fn word(g: usize) -> impl Strategy<Value = SymplecticElement> {
    let gens = SymplecticElement::generators(g).unwrap();
    let n = gens.len();
    prop::collection::vec((0..n, any::<bool>()), 0..5).prop_map(move |w| {
        w.into_iter().fold(SymplecticElement::identity(g).unwrap(), |acc, (k, inv)| {
            let s = if inv { gens[k].1.inverse() } else { gens[k].1.clone() };
            acc.mul(&s).unwrap()
        })
    })
}

fn even(c: &Characteristic) -> u8 {
    if c.is_even() {
        0
    } else {
        1
    }
}

proptest! {
    #[test]
    fn pairing_is_bilinear_and_symmetric(
        (a, b, c) in (1usize..=4).prop_flat_map(|g| (characteristic(g), characteristic(g), characteristic(g)))
    ) {
        prop_assert_eq!(a.pairing(&b).unwrap(), b.pairing(&a).unwrap());
        prop_assert_eq!((a + b).pairing(&c).unwrap(), a.pairing(&c).unwrap() ^ b.pairing(&c).unwrap());
        prop_assert_eq!(a.pairing(&a).unwrap(), 0);
    }

    #[test]
    fn parity_is_a_quadratic_form(a in characteristic(3), b in characteristic(3)) {
        prop_assert_eq!(even(&(a + b)), even(&a) ^ even(&b) ^ a.pairing(&b).unwrap());
    }

    #[test]
    fn partition_round_trip(g in 1usize..=4, i in 0usize..256) {
        let c = Characteristic::from_index(g, i % (1 << (2 * g))).unwrap();
        let p = partition_of_char(&c).unwrap();
        prop_assert_eq!(char_of_partition(&p).unwrap(), c);
        prop_assert_eq!(c.is_even(), p.multiplicity().is_multiple_of(2));
        prop_assert!(p.indices().len() <= g + 1);
    }

    #[test]
    fn symplectic_action_preserves_parity_and_composes(x in word(3), y in word(3), c in characteristic(3)) {
        let xc = gamma_action(&x, &c).unwrap();
        prop_assert_eq!(xc.is_even(), c.is_even());
        let xy = x.mul(&y).unwrap();
        prop_assert_eq!(gamma_action(&xy, &c).unwrap(), gamma_action(&x, &gamma_action(&y, &c).unwrap()).unwrap());
        prop_assert_eq!(gamma_action(&x.inverse(), &xc).unwrap(), c);
    }

    #[test]
    fn symplectic_action_preserves_syzygy_of_triples(x in word(3), a in characteristic(3), b in characteristic(3), c in characteristic(3)) {
        let t = |p: &Characteristic, q: &Characteristic, r: &Characteristic| hyperrho::charkit::triple_relation(p, q, r).unwrap();
        let (xa, xb, xc) = (gamma_action(&x, &a).unwrap(), gamma_action(&x, &b).unwrap(), gamma_action(&x, &c).unwrap());
        prop_assert_eq!(t(&xa, &xb, &xc), t(&a, &b, &c));
    }

    #[test]
    fn index_set_complement_is_involutive(bits in 0u64..1 << 10) {
        let s = IndexSet(bits);
        prop_assert_eq!(s.complement(10).complement(10), s);
        prop_assert_eq!(s.len() + s.complement(10).len(), 10);
    }

    #[test]
    fn vandermonde_sign_and_symmetric_functions(vals in prop::collection::btree_set(-60i64..60, 6)) {
        let v: Vec<i64> = vals.into_iter().collect();
        let r = RootSystem::from_integers(&v).unwrap();
        let all = IndexSet((1 << 6) - 1);
        let swapped = r.permuted(0, 1);
        prop_assert_eq!(vandermonde(all, &swapped), -vandermonde(all, &r));
        // ∏(x − e_i) evaluated at e_0 vanishes
        let x = r.roots()[0].clone();
        let mut acc = BigRational::from_integer(BigInt::from(0));
        for k in 0..=6i64 {
            let term = elem_sym(k, all, &r) * num_traits::pow(x.clone(), (6 - k) as usize);
            if k % 2 == 0 { acc += term } else { acc -= term }
        }
        prop_assert_eq!(acc, BigRational::from_integer(BigInt::from(0)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn theta_parity_on_random_tau(seed in any::<u64>(), idx in 0usize..16, v0 in -0.5f64..0.5, v1 in -0.5f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = random_tau(2, 0.6, &mut rng);
        let ev = ThetaEvaluator::new(&tau, 1e-14).unwrap();
        let c = Characteristic::from_index(2, idx).unwrap();
        let v = [Complex64::new(v0, 0.1 * v1), Complex64::new(v1, -0.1 * v0)];
        prop_assert!(parity_residual(&ev, &c, &v).unwrap() < 1e-11);
    }

    #[test]
    fn jacobi_relation_genus_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = random_tau(1, 0.4, &mut rng);
        let ev = ThetaEvaluator::new(&tau, 1e-15).unwrap();
        let th: Vec<Complex64> = all_characteristics(1).unwrap().map(|c| ev.jet0(&c).unwrap().value).collect();
        // θ00⁴ = θ01⁴ + θ10⁴; index order 00, 10, 01, 11
        prop_assert!((th[0].powu(4) - th[2].powu(4) - th[1].powu(4)).norm() < 1e-11 * th[0].norm().powi(4).max(1.0));
    }
}
