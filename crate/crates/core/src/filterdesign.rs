//! Continuous-time filters and their parallel exponential form.
//!
//! A strictly proper, stable [`RationalTF`] is expanded by partial fractions
//! into a [`ParallelForm`]: a sum of sections whose impulse responses are
//! damped exponentials, damped sinusoids, or `t^N`-weighted exponentials.
//! Every such impulse response factors as `h(t - τ) = h1(t)·h2(τ)` for
//! `t ≥ τ`, which is what the conversion engines exploit.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative distance under which two poles are treated as one repeated pole.
pub const MULTIPLICITY_TOLERANCE: f64 = 1e-9;

/// `H(s) = A·∏(s - z_k) / ∏(s - p_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalTF<T> {
    gain: T,
    zeros: Vec<Complex<T>>,
    poles: Vec<Complex<T>>,
}

fn check_conjugate_pairs<T: Real>(roots: &[Complex<T>], what: &'static str) -> Result<()> {
    for (i, r) in roots.iter().enumerate() {
        if r.im == T::zero() {
            continue;
        }
        let same = roots.iter().filter(|&&q| q == *r).count();
        let conj = roots.iter().filter(|&&q| q == r.conj()).count();
        if same != conj {
            return Err(Error::UnpairedRoot { what, index: i });
        }
    }
    Ok(())
}

impl<T: Real> RationalTF<T> {
    pub fn new(gain: T, zeros: Vec<Complex<T>>, poles: Vec<Complex<T>>) -> Result<Self> {
        if poles.len() <= zeros.len() {
            return Err(Error::NotStrictlyProper {
                poles: poles.len(),
                zeros: zeros.len(),
            });
        }
        if let Some((index, p)) = poles
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.re < T::zero()) || !p.im.is_finite())
        {
            return Err(Error::UnstablePole {
                index,
                re: p.re.as_f64(),
            });
        }
        if !gain.is_finite() || zeros.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidSection(
                "gain and zeros must be finite".into(),
            ));
        }
        check_conjugate_pairs(&poles, "pole")?;
        check_conjugate_pairs(&zeros, "zero")?;
        Ok(RationalTF { gain, zeros, poles })
    }

    pub fn gain(&self) -> T {
        self.gain
    }

    pub fn zeros(&self) -> &[Complex<T>] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Complex<T>] {
        &self.poles
    }

    /// `H(jω)`.
    pub fn frequency_response(&self, omega: T) -> Complex<T> {
        let s = Complex::new(T::zero(), omega);
        let num = self
            .zeros
            .iter()
            .fold(Complex::new(self.gain, T::zero()), |acc, &z| acc * (s - z));
        let den = self
            .poles
            .iter()
            .fold(Complex::new(T::one(), T::zero()), |acc, &p| acc * (s - p));
        num / den
    }

    /// `|H(j·2πf)|²`.
    pub fn magnitude_squared(&self, freq_hz: T) -> T {
        self.frequency_response(T::TAU() * freq_hz).norm_sqr()
    }
}

/// All-pole Butterworth lowpass with unity DC gain.
///
/// Poles sit on the left half of the circle of radius `ω_c = 2π·cutoff`.
/// For odd orders the real pole comes first; each complex pair is listed
/// upper pole first, then its exact conjugate.
pub fn butterworth_lowpass<T: Real>(order: usize, cutoff_hz: T) -> Result<RationalTF<T>> {
    if order == 0 {
        return Err(Error::InvalidOrder);
    }
    if !(cutoff_hz > T::zero()) || !cutoff_hz.is_finite() {
        return Err(Error::InvalidCutoff(cutoff_hz.as_f64()));
    }
    let wc = T::TAU() * cutoff_hz;
    let n = T::from_index(order);
    let mut poles = Vec::with_capacity(order);
    if order % 2 == 1 {
        poles.push(Complex::new(-wc, T::zero()));
    }
    for k in 0..order / 2 {
        let theta = T::FRAC_PI_2() + T::from_index(2 * k + 1) * T::PI() / (T::lit(2.0) * n);
        let p = Complex::new(wc * theta.cos(), wc * theta.sin());
        poles.push(p);
        poles.push(p.conj());
    }
    RationalTF::new(wc.powi(order as i32), Vec::new(), poles)
}

/// One parallel branch of the impulse response. All variants vanish for
/// `t < 0` and are evaluated with `u(0) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Section<T> {
    /// `a·e^{-αt}`.
    FirstOrder { a: T, alpha: T },
    /// `a·e^{-αt}·sin(ωt + φ)`.
    SecondOrder { a: T, alpha: T, omega: T, phi: T },
    /// `a·t^N·e^{-αt}` with `N ≥ 1`.
    RepeatedRealPole { a: T, alpha: T, degree: u32 },
}

impl<T: Real> Section<T> {
    pub fn alpha(&self) -> T {
        match *self {
            Section::FirstOrder { alpha, .. }
            | Section::SecondOrder { alpha, .. }
            | Section::RepeatedRealPole { alpha, .. } => alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match *self {
            Section::FirstOrder { a, alpha } => a.is_finite() && alpha.is_finite(),
            Section::SecondOrder {
                a,
                alpha,
                omega,
                phi,
            } => a.is_finite() && alpha.is_finite() && omega.is_finite() && phi.is_finite(),
            Section::RepeatedRealPole { a, alpha, degree } => {
                if degree == 0 {
                    return Err(Error::InvalidSection(
                        "repeated-pole degree 0 must be a first-order section".into(),
                    ));
                }
                a.is_finite() && alpha.is_finite()
            }
        };
        if !finite {
            return Err(Error::InvalidSection("non-finite parameter".into()));
        }
        if !(self.alpha() > T::zero()) {
            return Err(Error::InvalidSection(format!(
                "decay rate must be positive, got {}",
                self.alpha()
            )));
        }
        Ok(())
    }

    /// Closed-form impulse response.
    pub fn impulse(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        match *self {
            Section::FirstOrder { a, alpha } => a * (-alpha * t).exp(),
            Section::SecondOrder {
                a,
                alpha,
                omega,
                phi,
            } => a * (-alpha * t).exp() * (omega * t + phi).sin(),
            Section::RepeatedRealPole { a, alpha, degree } => {
                a * t.powi(degree as i32) * (-alpha * t).exp()
            }
        }
    }

    /// `h(t - τ)` for `t ≥ τ` computed through the separated product
    /// `h1(t)·h2(τ)` the engines rely on: output-instant factor times
    /// input-instant factor.
    pub fn separated_kernel(&self, t: T, tau: T) -> T {
        if t < tau {
            return T::zero();
        }
        match *self {
            Section::FirstOrder { a, alpha } => (a * (-alpha * t).exp()) * (alpha * tau).exp(),
            Section::SecondOrder {
                a,
                alpha,
                omega,
                phi,
            } => {
                let out = Complex::from_polar(a, phi) * Complex::new(-alpha * t, omega * t).exp();
                let inp = Complex::new(alpha * tau, -omega * tau).exp();
                (out * inp).im
            }
            Section::RepeatedRealPole { a, alpha, degree } => {
                let n = degree as i32;
                let sum: T = (0..=degree)
                    .map(|k| {
                        binomial::<T>(degree, k) * t.powi(n - k as i32) * (-tau).powi(k as i32)
                    })
                    .sum();
                (a * (-alpha * t).exp()) * (alpha * tau).exp() * sum
            }
        }
    }
}

/// `C(n, k)` as a scalar.
pub fn binomial<T: Real>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    T::from_u128(acc).expect("binomial coefficient representable")
}

/// Sum of sections; the impulse response of the whole filter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParallelForm<T> {
    sections: Vec<Section<T>>,
}

impl<T: Real> ParallelForm<T> {
    pub fn new(sections: Vec<Section<T>>) -> Result<Self> {
        if sections.is_empty() {
            return Err(Error::EmptyForm);
        }
        for s in &sections {
            s.validate()?;
        }
        Ok(ParallelForm { sections })
    }

    pub fn sections(&self) -> &[Section<T>] {
        &self.sections
    }

    /// Smallest decay rate over all sections.
    pub fn slowest_decay(&self) -> T {
        self.sections
            .iter()
            .map(Section::alpha)
            .fold(T::infinity(), T::min)
    }

    /// `h(t)`; zero for `t < 0`.
    pub fn eval_impulse(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        self.sections.iter().map(|s| s.impulse(t)).sum()
    }
}

/// Truncated power series in `(s - p)`.
fn series_mul<T: Real>(a: &[Complex<T>], b: &[Complex<T>], len: usize) -> Vec<Complex<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); len];
    for (i, &x) in a.iter().enumerate().take(len) {
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn series_div<T: Real>(num: &[Complex<T>], den: &[Complex<T>], len: usize) -> Vec<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; len];
    for k in 0..len {
        let mut acc = num.get(k).copied().unwrap_or(zero);
        for i in 1..=k {
            acc -= den.get(i).copied().unwrap_or(zero) * out[k - i];
        }
        out[k] = acc / den[0];
    }
    out
}

struct PoleGroup<T> {
    pole: Complex<T>,
    multiplicity: usize,
}

fn group_poles<T: Real>(poles: &[Complex<T>]) -> Vec<PoleGroup<T>> {
    let tol = T::lit(MULTIPLICITY_TOLERANCE);
    let mut groups: Vec<PoleGroup<T>> = Vec::new();
    for &p in poles {
        match groups
            .iter_mut()
            .find(|g| (g.pole - p).norm() <= tol * g.pole.norm().max(p.norm()))
        {
            Some(g) => g.multiplicity += 1,
            None => groups.push(PoleGroup {
                pole: p,
                multiplicity: 1,
            }),
        }
    }
    groups
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_index(k))
}

fn wrap_phase<T: Real>(phi: T) -> T {
    let tau = T::TAU();
    let mut p = phi % tau;
    if p > T::PI() {
        p -= tau;
    } else if p <= -T::PI() {
        p += tau;
    }
    p
}

/// Expands `tf` into its parallel exponential form.
///
/// Residues come from the Laurent coefficients at each pole: the numerator
/// and the remaining denominator factors are expanded as power series in
/// `(s - p)` and divided. A real pole of multiplicity `μ` yields one
/// first-order section and `μ - 1` repeated-pole sections; a conjugate pair
/// with residue `r` at the upper pole yields
/// `2|r|·e^{-αt}·sin(ωt + arg r + π/2)`.
pub fn partial_fractions<T: Real>(tf: &RationalTF<T>) -> Result<ParallelForm<T>> {
    let groups = group_poles(tf.poles());
    let one = Complex::new(T::one(), T::zero());
    let mut sections = Vec::new();

    for (gi, group) in groups.iter().enumerate() {
        let p = group.pole;
        let mu = group.multiplicity;
        if p.im != T::zero() && mu > 1 {
            return Err(Error::RepeatedComplexPole {
                re: p.re.as_f64(),
                im: p.im.as_f64(),
            });
        }
        if p.im < T::zero() {
            // handled together with its upper partner
            continue;
        }

        let mut num = vec![Complex::new(tf.gain(), T::zero())];
        for &z in tf.zeros() {
            num = series_mul(&num, &[p - z, one], mu);
        }
        let mut den = vec![one];
        for (gj, other) in groups.iter().enumerate() {
            if gj == gi {
                continue;
            }
            for _ in 0..other.multiplicity {
                den = series_mul(&den, &[p - other.pole, one], mu);
            }
        }
        let laurent = series_div(&num, &den, mu);

        let alpha = -p.re;
        if p.im == T::zero() {
            // laurent[k] multiplies (s - p)^{-(mu - k)}
            for (k, c) in laurent.iter().enumerate() {
                let power = mu - k;
                if c.re == T::zero() {
                    continue;
                }
                if power == 1 {
                    sections.push(Section::FirstOrder { a: c.re, alpha });
                } else {
                    sections.push(Section::RepeatedRealPole {
                        a: c.re / factorial::<T>(power - 1),
                        alpha,
                        degree: (power - 1) as u32,
                    });
                }
            }
        } else {
            let r = laurent[0];
            sections.push(Section::SecondOrder {
                a: T::lit(2.0) * r.norm(),
                alpha,
                omega: p.im,
                phi: wrap_phase(r.arg() + T::FRAC_PI_2()),
            });
        }
    }
    ParallelForm::new(sections)
}
