use mpm_core::dynamics::{Hamiltonian, Invariant, Lagrangian};
use mpm_core::sl2c::{
    e3_heavytop, group_actions, k_algebra, sl2c_derived, KElement, Mat2C, SU2Element,
};
use mpm_core::{AlgebraVector, Convention, DoubleVector, DualPoint, DualVector, LieAlgebra};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 3)
}

fn vec6() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 6)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// `Σ ξ_i e_i + Σ η_a f_a` in the matrix embedding.
fn embed(x: &[f64]) -> Mat2C {
    let (x1, x2, x3, y1, y2, y3) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    Mat2C::new(
        Complex64::new(y3 / 2.0, -x3 / 2.0),
        Complex64::new(-x2 / 2.0, -x1 / 2.0),
        Complex64::new(x2 / 2.0 + y1, -x1 / 2.0 + y2),
        Complex64::new(-y3 / 2.0, x3 / 2.0),
    )
}

/// Inverse of [`embed`] on traceless matrices, written out by hand.
fn unembed(m: &Mat2C) -> Vec<f64> {
    let (m11, m12, m21) = (m.entry(0, 0), m.entry(0, 1), m.entry(1, 0));
    let x1 = -2.0 * m12.im;
    let x2 = -2.0 * m12.re;
    let x3 = -2.0 * m11.im;
    vec![
        x1,
        x2,
        x3,
        m21.re - x2 / 2.0,
        m21.im + x1 / 2.0,
        2.0 * m11.re,
    ]
}

fn commutator_oracle(x: &[f64], y: &[f64]) -> Vec<f64> {
    unembed(&embed(x).commutator(&embed(y)))
}

fn e3_bracket_oracle(x: &[f64], y: &[f64]) -> Vec<f64> {
    // [(ξ1, η1), (ξ2, η2)] = (ξ1 × ξ2, η1 × ξ2 − η2 × ξ1)
    let g = cross(&x[..3], &y[..3]);
    let a = cross(&x[3..], &y[..3]);
    let b = cross(&y[3..], &x[..3]);
    g.into_iter().chain((0..3).map(|i| a[i] - b[i])).collect()
}

/// `ad*_x p` from `⟨ad*_x p, E_J⟩ = −⟨p, [x, E_J]⟩` with an oracle bracket.
fn ad_star_oracle(bracket: fn(&[f64], &[f64]) -> Vec<f64>, x: &[f64], p: &[f64]) -> Vec<f64> {
    (0..6)
        .map(|j| {
            let mut e = vec![0.0; 6];
            e[j] = 1.0;
            -dot(p, &bracket(x, &e))
        })
        .collect()
}

fn random_sym(seed: u64, d: usize) -> DMatrix<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(d, d, |_, _| {
        rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
    });
    (&a + a.transpose()) * 0.5
}

fn random_spd(seed: u64, d: usize) -> DMatrix<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a: DMatrix<f64> = DMatrix::from_fn(d, d, |_, _| {
        rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
    });
    &a * a.transpose() + DMatrix::identity(d, d)
}

fn su2(seed: u64) -> SU2Element {
    SU2Element::random(&mut mpm_core::rng::seeded(seed))
}

fn kel(seed: u64) -> KElement {
    KElement::random(&mut mpm_core::rng::seeded(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn double_bracket_is_antisymmetric(x in vec6(), y in vec6()) {
        let d = sl2c_derived().build_double().unwrap();
        let xy = d.bracket(&DoubleVector::from_flat(&x, 3), &DoubleVector::from_flat(&y, 3)).unwrap();
        let yx = d.bracket(&DoubleVector::from_flat(&y, 3), &DoubleVector::from_flat(&x, 3)).unwrap();
        prop_assert!(close(&xy.to_flat(), &yx.to_flat().iter().map(|v| -v).collect::<Vec<_>>(), 1e-12));
    }

    #[test]
    fn sl2c_double_matches_matrix_commutator(x in vec6(), y in vec6()) {
        let d = sl2c_derived().build_double().unwrap();
        let b = d.bracket(&DoubleVector::from_flat(&x, 3), &DoubleVector::from_flat(&y, 3)).unwrap();
        prop_assert!(close(&b.to_flat(), &commutator_oracle(&x, &y), 1e-11));
    }

    #[test]
    fn e3_double_matches_semidirect_bracket(x in vec6(), y in vec6()) {
        let d = e3_heavytop().build_double().unwrap();
        let b = d.bracket(&DoubleVector::from_flat(&x, 3), &DoubleVector::from_flat(&y, 3)).unwrap();
        prop_assert!(close(&b.to_flat(), &e3_bracket_oracle(&x, &y), 1e-12));
    }

    #[test]
    fn ad_star_duality(x in vec6(), y in vec6(), p in vec6()) {
        let d = sl2c_derived().build_double().unwrap();
        let xv = DoubleVector::from_flat(&x, 3);
        let yv = DoubleVector::from_flat(&y, 3);
        let pv = DualPoint::from_flat(&p, 3);
        let lhs = d.ad_star(&xv, &pv).unwrap().pair(&yv);
        let rhs = -pv.pair(&d.bracket(&xv, &yv).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn lp_rhs_matches_oracles(x in vec6(), p in vec6()) {
        let xv = DoubleVector::from_flat(&x, 3);
        let pv = DualPoint::from_flat(&p, 3);
        let sl = sl2c_derived().build_double().unwrap();
        let r = sl.lp_rhs(&pv, &xv, Convention::Right).unwrap();
        prop_assert!(close(&r.to_flat(), &ad_star_oracle(commutator_oracle, &x, &p), 1e-10));
        let e3 = e3_heavytop().build_double().unwrap();
        let r = e3.lp_rhs(&pv, &xv, Convention::Right).unwrap();
        prop_assert!(close(&r.to_flat(), &ad_star_oracle(e3_bracket_oracle, &x, &p), 1e-12));
        let l = e3.lp_rhs(&pv, &xv, Convention::Left).unwrap();
        prop_assert!(close(&l.to_flat(), &r.scaled(-1.0).to_flat(), 0.0));
    }

    #[test]
    fn su2_and_k_coadjoint_closed_forms(x in vec3(), mu in vec3()) {
        let s = LieAlgebra::su2().ad_star(&AlgebraVector(x.clone()), &DualVector(mu.clone())).unwrap();
        prop_assert!(close(s.as_slice(), &cross(&x, &mu), 1e-12));
        let k = [0.0, 0.0, 1.0];
        let expected: Vec<f64> = (0..3).map(|i| dot(&k, &x) * mu[i] - dot(&mu, &x) * k[i]).collect();
        let kk = k_algebra().ad_star(&AlgebraVector(x.clone()), &DualVector(mu.clone())).unwrap();
        prop_assert!(close(kk.as_slice(), &expected, 1e-12));
    }

    #[test]
    fn dual_maps_satisfy_pairing_identities(xi in vec3(), eta in vec3(), mu in vec3(), nu in vec3()) {
        for mp in [sl2c_derived(), e3_heavytop()] {
            let (xi, eta) = (AlgebraVector(xi.clone()), AlgebraVector(eta.clone()));
            let (mu, nu) = (DualVector(mu.clone()), DualVector(nu.clone()));
            let left = mp.left_act(&eta, &xi).unwrap();
            let right = mp.right_act(&eta, &xi).unwrap();
            prop_assert!((mp.co_left_act(&mu, &eta).unwrap().pair(&xi) - mu.pair(&left)).abs() <= 1e-10);
            prop_assert!((mp.b_star(&xi, &mu).unwrap().pair(&eta) - mu.pair(&left)).abs() <= 1e-10);
            prop_assert!((mp.co_right_act(&xi, &nu).unwrap().pair(&eta) - nu.pair(&right)).abs() <= 1e-10);
            prop_assert!((mp.a_star(&eta, &nu).unwrap().pair(&xi) - nu.pair(&right)).abs() <= 1e-10);
        }
    }

    #[test]
    fn lp_flow_conserves_energy_and_casimirs(p in vec6(), seed in 0u64..1000) {
        let d = sl2c_derived().build_double().unwrap();
        let h = Hamiltonian::quadratic(random_sym(seed, 6), DVector::from_fn(6, |i, _| i as f64 * 0.1)).unwrap();
        let grad = DoubleVector::from_flat(&h.gradient(&p).unwrap(), 3);
        let pv = DualPoint::from_flat(&p, 3);
        let r = d.lp_rhs(&pv, &grad, Convention::Right).unwrap();
        prop_assert!(r.pair(&grad).abs() <= 1e-9 * (1.0 + grad.to_flat().iter().map(|v| v * v).sum::<f64>()));
        // cobracket kernel directions are Casimir gradients
        let killing = Invariant::killing(&d).unwrap();
        let eps = 1e-6;
        let dc: Vec<f64> = (0..6).map(|i| {
            let mut a = p.clone();
            let mut b = p.clone();
            a[i] += eps;
            b[i] -= eps;
            (killing.eval(&DualPoint::from_flat(&a, 3)) - killing.eval(&DualPoint::from_flat(&b, 3))) / (2.0 * eps)
        }).collect();
        prop_assert!(dot(&dc, &r.to_flat()).abs() <= 1e-5 * (1.0 + r.max_abs()) * (1.0 + p.iter().map(|v| v.abs()).fold(0.0, f64::max)));
    }

    #[test]
    fn ep_identity_metric_is_minus_right_lp(x in vec6()) {
        for mp in [sl2c_derived(), e3_heavytop()] {
            let d = mp.build_double().unwrap();
            let xv = DoubleVector::from_flat(&x, 3);
            let ep = mp.euler_poincare_rhs(&xv.xi, &xv.eta, &Lagrangian::identity(3, 3)).unwrap();
            let lp = d.lp_rhs(&DualPoint::from_flat(&x, 3), &xv, Convention::Right).unwrap();
            prop_assert!(close(&ep.rates.to_flat(), &lp.scaled(-1.0).to_flat(), 1e-12));
        }
    }

    #[test]
    fn ep_conserves_energy(x in vec6(), seed in 0u64..1000) {
        let lag = Lagrangian::new(random_spd(seed, 3), random_spd(seed + 7, 3)).unwrap();
        let mp = sl2c_derived();
        let xv = DoubleVector::from_flat(&x, 3);
        let ep = mp.euler_poincare_rhs(&xv.xi, &xv.eta, &lag).unwrap();
        let scale = 1.0 + ep.momenta.max_abs() * ep.velocities.to_flat().iter().map(|v| v.abs()).fold(0.0, f64::max);
        prop_assert!(ep.rates.pair(&ep.velocities).abs() <= 1e-10 * scale * scale);
    }

    #[test]
    fn legendre_round_trip(x in vec6(), seed in 0u64..1000) {
        let lag = Lagrangian::new(random_spd(seed, 3), random_spd(seed + 1, 3)).unwrap();
        let xv = DoubleVector::from_flat(&x, 3);
        let p = lag.momenta(&xv.xi, &xv.eta).unwrap();
        let back = lag.velocities(&p).unwrap();
        prop_assert!(close(&back.to_flat(), &x, 1e-9));
        let h = lag.legendre();
        let e = lag.value(&xv.xi, &xv.eta).unwrap();
        prop_assert!((h.value(&p.to_flat()).unwrap() - e).abs() <= 1e-9 * (1.0 + e.abs()));
    }

    #[test]
    fn k_group_laws(s1 in 0u64..10_000, s2 in 0u64..10_000, s3 in 0u64..10_000) {
        let (a, b, c) = (kel(s1), kel(s2 + 10_000), kel(s3 + 20_000));
        let lhs = a.multiply(&b).multiply(&c);
        let rhs = a.multiply(&b.multiply(&c));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * (1.0 + lhs.a.abs() + lhs.b.abs() + lhs.c.abs()));
        let m = a.multiply(&b).to_matrix();
        prop_assert!(m.max_abs_diff(&a.to_matrix().mul(&b.to_matrix())) <= 1e-10 * (1.0 + lhs.a.abs() + lhs.b.abs() + lhs.c.abs()));
    }

    #[test]
    fn group_action_laws(s1 in 0u64..10_000, s2 in 0u64..10_000) {
        let (h1, h2) = (kel(s1), kel(s2 + 10_000));
        let (g1, g2) = (su2(s1 + 20_000), su2(s2 + 30_000));
        let tol = 1e-9;

        // (h1 h2) ▷ g = h1 ▷ (h2 ▷ g), (h1 h2) ◁ g = (h1 ◁ (h2 ▷ g)) (h2 ◁ g)
        let (l, r) = group_actions(&h1.multiply(&h2), &g1).unwrap();
        let (l2, r2) = group_actions(&h2, &g1).unwrap();
        let (l12, r12) = group_actions(&h1, &l2).unwrap();
        prop_assert!(l.matrix().max_abs_diff(l12.matrix()) <= tol);
        prop_assert!(r.max_abs_diff(&r12.multiply(&r2)) <= tol * (1.0 + r.a.abs() + r.b.abs() + r.c.abs()));

        // h ▷ (g1 g2) = (h ▷ g1)((h ◁ g1) ▷ g2), h ◁ (g1 g2) = (h ◁ g1) ◁ g2
        let (l, r) = group_actions(&h1, &g1.mul(&g2)).unwrap();
        let (a1, b1) = group_actions(&h1, &g1).unwrap();
        let (a2, b2) = group_actions(&b1, &g2).unwrap();
        prop_assert!(l.matrix().max_abs_diff(a1.mul(&a2).matrix()) <= tol);
        prop_assert!(r.max_abs_diff(&b2) <= tol * (1.0 + r.a.abs() + r.b.abs() + r.c.abs()));
        prop_assert!(SU2Element::new(*l.matrix()).is_ok());
    }
}

#[test]
fn sl2c_cobracket_has_two_dimensional_kernel() {
    let d = sl2c_derived().build_double().unwrap();
    let mut rng = mpm_core::rng::seeded(17);
    for _ in 0..50 {
        let p = DualPoint::from_flat(&mpm_core::rng::normal_vec(&mut rng, 6), 3);
        let sv = d.cobracket(&p).unwrap().singular_values();
        let max = sv.max();
        let zeros = sv.iter().filter(|s| **s <= 1e-10 * max).count();
        assert_eq!(zeros, 2, "{sv}");
    }
}

#[test]
fn group_actions_differentiate_to_algebra_actions() {
    // the mixed second-order terms of exp(tY) ▷ exp(tX) and exp(tY) ◁ exp(tX) are Y ▷ X and Y ◁ X
    let mp = sl2c_derived();
    let t = 1e-5;
    let y = [0.3, -0.7, 0.5];
    let x = [0.2, 0.4, -0.9];
    let expm = |m: &Mat2C, s: f64| -> Mat2C {
        // exp of a traceless matrix: cosh(λ) I + sinh(λ)/λ A, λ² = −det A
        let a = Mat2C(m.0 * Complex64::new(s, 0.0));
        let lam = (-a.det()).sqrt();
        let (ch, sh) = if lam.norm() < 1e-12 {
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
        } else {
            (lam.cosh(), lam.sinh() / lam)
        };
        Mat2C(nalgebra::Matrix2::identity() * ch + a.0 * sh)
    };
    let ym = embed(&[0.0, 0.0, 0.0, y[0], y[1], y[2]]);
    let xm = embed(&[x[0], x[1], x[2], 0.0, 0.0, 0.0]);
    let g = SU2Element::new(expm(&xm, t)).unwrap();
    let (_, kmat) = mpm_core::sl2c::iwasawa_factor(&expm(&ym, t)).unwrap();
    let (lg, rk) = group_actions(&kmat, &g).unwrap();
    // second-order mixed term of h g: h g ≈ g' h' with the commutator t²[Y, X]
    let gm = lg.matrix().mul(&g.matrix().inverse().unwrap());
    let gen_g = unembed(&Mat2C(gm.0 - nalgebra::Matrix2::identity()));
    let kdiff = rk.to_matrix().mul(&kmat.to_matrix().inverse().unwrap());
    let gen_h = unembed(&Mat2C(kdiff.0 - nalgebra::Matrix2::identity()));
    let left = mp
        .left_act(&AlgebraVector(y.to_vec()), &AlgebraVector(x.to_vec()))
        .unwrap();
    let right = mp
        .right_act(&AlgebraVector(y.to_vec()), &AlgebraVector(x.to_vec()))
        .unwrap();
    for i in 0..3 {
        assert!(
            (gen_g[i] / (t * t) - left.0[i]).abs() <= 1e-3,
            "{gen_g:?} vs {left:?}"
        );
        assert!(
            (gen_h[3 + i] / (t * t) - right.0[i]).abs() <= 1e-3,
            "{gen_h:?} vs {right:?}"
        );
    }
}
