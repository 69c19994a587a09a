//! Parallel-form expansion checked against independent computations of the
//! same transfer function: a state-space impulse response integrated with
//! RK4, and recombination of the sections over a common denominator.

use num_complex::Complex;
use nusrc::{butterworth_lowpass, partial_fractions, RationalTF, Section};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

/// Real coefficients (ascending powers) of `Π (s - r)`.
fn poly_from_roots(roots: &[C]) -> Vec<f64> {
    let mut p = vec![C::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![C::new(0.0, 0.0); p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        p = next;
    }
    p.iter().map(|c| c.re).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(acc: &mut Vec<f64>, p: &[f64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += b;
    }
}

/// Removes the first root within `1e-9` relative of each of `remove`.
fn without(roots: &[C], remove: &[C]) -> Vec<C> {
    let mut left = roots.to_vec();
    for r in remove {
        let i = left
            .iter()
            .position(|x| (x - r).norm() <= 1e-9 * r.norm().max(1.0))
            .expect("section pole among transfer-function poles");
        left.remove(i);
    }
    left
}

/// Numerator of the sum of the section transforms over the denominator `Π (s - p)`.
fn recombine(sections: &[Section<f64>], poles: &[C]) -> Vec<f64> {
    let mut acc = vec![0.0];
    for s in sections {
        let (num, removed): (Vec<f64>, Vec<C>) = match *s {
            Section::FirstOrder { a, alpha } => (vec![a], vec![C::new(-alpha, 0.0)]),
            Section::SecondOrder {
                a,
                alpha,
                omega,
                phi,
            } => (
                vec![a * (alpha * phi.sin() + omega * phi.cos()), a * phi.sin()],
                vec![C::new(-alpha, omega), C::new(-alpha, -omega)],
            ),
            Section::RepeatedRealPole { a, alpha, degree } => {
                let fact: f64 = (1..=degree).map(f64::from).product();
                (
                    vec![a * fact],
                    vec![C::new(-alpha, 0.0); degree as usize + 1],
                )
            }
        };
        poly_add(
            &mut acc,
            &poly_mul(&num, &poly_from_roots(&without(poles, &removed))),
        );
    }
    acc
}

/// `h(t) = c·e^{At}·b` in controllable canonical form, integrated by RK4 at
/// sorted instants.
fn state_space_impulse(tf: &RationalTF<f64>, times: &[f64], dt: f64) -> Vec<f64> {
    let den = poly_from_roots(tf.poles());
    let n = den.len() - 1;
    let mut num = poly_from_roots(tf.zeros());
    num.iter_mut().for_each(|c| *c *= tf.gain());
    num.resize(n, 0.0);

    let deriv = |x: &[f64]| -> Vec<f64> {
        let mut d = vec![0.0; n];
        d[..n - 1].copy_from_slice(&x[1..n]);
        d[n - 1] = -(0..n).map(|i| den[i] * x[i]).sum::<f64>();
        d
    };
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };

    let mut x = vec![0.0; n];
    x[n - 1] = 1.0;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let h = dt.min(target - t);
            let k1 = deriv(&x);
            let k2 = deriv(&axpy(&x, &k1, h / 2.0));
            let k3 = deriv(&axpy(&x, &k2, h / 2.0));
            let k4 = deriv(&axpy(&x, &k3, h));
            for i in 0..n {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
        out.push((0..n).map(|i| num[i] * x[i]).sum());
    }
    out
}

fn random_poles(rng: &mut ChaCha8Rng, order: usize) -> Vec<C> {
    let mut poles: Vec<C> = Vec::new();
    let separated = |p: C, ps: &[C]| ps.iter().all(|q| (p - q).norm() > 0.3);
    while poles.len() < order {
        if order - poles.len() >= 2 && rng.gen_bool(0.5) {
            let p = C::new(-rng.gen_range(0.2..3.0), rng.gen_range(0.3..4.0));
            if separated(p, &poles) && separated(p.conj(), &poles) {
                poles.push(p);
                poles.push(p.conj());
            }
        } else {
            let p = C::new(-rng.gen_range(0.2..4.0), 0.0);
            if separated(p, &poles) {
                poles.push(p);
            }
        }
    }
    poles
}

fn random_zeros(rng: &mut ChaCha8Rng, count: usize) -> Vec<C> {
    let mut zeros = Vec::new();
    while zeros.len() < count {
        if count - zeros.len() >= 2 && rng.gen_bool(0.4) {
            let z = C::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..3.0));
            zeros.push(z);
            zeros.push(z.conj());
        } else {
            zeros.push(C::new(rng.gen_range(-3.0..3.0), 0.0));
        }
    }
    zeros
}

fn assert_matches_state_space(tf: &RationalTF<f64>, rng: &mut ChaCha8Rng) {
    let form = partial_fractions(tf).unwrap();
    let horizon = 10.0 / form.slowest_decay();
    let mut times: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..horizon)).collect();
    times.sort_by(f64::total_cmp);
    let reference = state_space_impulse(tf, &times, horizon / 2e5);
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (&t, &r) in times.iter().zip(&reference) {
        let h = form.eval_impulse(t);
        assert!(
            (h - r).abs() <= 1e-9 * scale,
            "t={t}: sections {h}, state space {r}, scale {scale}"
        );
    }
}

#[test]
fn butterworth_sections_match_state_space_impulse() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for order in 1..=6 {
        let tf = butterworth_lowpass(order, 1.0 / std::f64::consts::TAU).unwrap();
        assert_matches_state_space(&tf, &mut rng);
    }
}

#[test]
fn random_tf_sections_match_state_space_impulse() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..12 {
        let order = 1 + case % 6;
        let poles = random_poles(&mut rng, order);
        let nz = rng.gen_range(0..order);
        let zeros = random_zeros(&mut rng, nz);
        let tf = RationalTF::new(rng.gen_range(0.5..3.0), zeros, poles).unwrap();
        assert_matches_state_space(&tf, &mut rng);
    }
}

#[test]
fn double_pole_matches_state_space_impulse() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = C::new(-1.5, 0.0);
    let tf = RationalTF::new(2.0, vec![C::new(-0.5, 0.0)], vec![p, p, C::new(-0.4, 0.0)]).unwrap();
    assert_matches_state_space(&tf, &mut rng);
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn recombination_reproduces_coefficients(seed in any::<u64>(), order in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poles = random_poles(&mut rng, order);
        let nz = rng.gen_range(0..order);
        let zeros = random_zeros(&mut rng, nz);
        let gain = rng.gen_range(0.5..3.0);
        let tf = RationalTF::new(gain, zeros.clone(), poles.clone()).unwrap();
        let form = partial_fractions(&tf).unwrap();

        let mut expect = poly_from_roots(&zeros);
        expect.iter_mut().for_each(|c| *c *= gain);
        let mut got = recombine(form.sections(), &poles);
        got.resize(order, 0.0);
        expect.resize(order, 0.0);
        let scale = expect.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for (k, (g, e)) in got.iter().zip(&expect).enumerate() {
            prop_assert!((g - e).abs() <= 1e-9 * scale, "coef {}: {} vs {}", k, g, e);
        }
    }
}

#[test]
fn recombination_with_repeated_real_pole() {
    let p = C::new(-2.0, 0.0);
    let poles = vec![p, p, p, C::new(-1.0, 1.0), C::new(-1.0, -1.0)];
    let zeros = vec![C::new(0.5, 0.0)];
    let tf = RationalTF::new(3.0, zeros.clone(), poles.clone()).unwrap();
    let form = partial_fractions(&tf).unwrap();
    let mut got = recombine(form.sections(), &poles);
    got.resize(5, 0.0);
    let mut expect = poly_from_roots(&zeros);
    expect.iter_mut().for_each(|c| *c *= 3.0);
    expect.resize(5, 0.0);
    for (g, e) in got.iter().zip(&expect) {
        assert!((g - e).abs() <= 1e-9 * 3.0);
    }
}
