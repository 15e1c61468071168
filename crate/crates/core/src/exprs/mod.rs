//! Closed-form scalar fields over spacetime coordinates.
//!
//! The algebra is small on purpose: constants, coordinate monomials
//! `(x^mu)^n` with `n <= 3`, sinusoids `sin/cos(k_mu x^mu + phi)`, and finite
//! sums and products of those. It is closed under partial differentiation, so
//! derivatives are exact trees rather than finite differences.

mod expand;
mod text;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use expand::{Expanded, Term, Trig, TrigKind};
pub use text::{parse, parse_with};

use crate::error::{Error, Result};
use crate::minkowski::MAX_DIM;

pub const MAX_POWER: u32 = 3;

/// Constant covector and phase of a sinusoid argument `k_mu x^mu + phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub k: [f64; MAX_DIM],
    pub phase: f64,
}

impl Phase {
    pub fn new(k: &[f64], phase: f64) -> Self {
        assert!(k.len() <= MAX_DIM, "wave covector longer than {MAX_DIM}");
        let mut kk = [0.0; MAX_DIM];
        kk[..k.len()].copy_from_slice(k);
        Self { k: kk, phase }
    }

    #[inline]
    pub fn arg(&self, x: &[f64]) -> f64 {
        let mut s = self.phase;
        for (k, x) in self.k.iter().zip(x) {
            s += k * x;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    /// `(x^axis)^power` with `1 <= power <= 3`.
    Coord { axis: usize, power: u32 },
    Sin(Phase),
    Cos(Phase),
    Sum(Vec<ScalarExpr>),
    Prod(Vec<ScalarExpr>),
}

impl Default for ScalarExpr {
    fn default() -> Self {
        ScalarExpr::Const(0.0)
    }
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr::Const(0.0)
    }

    pub fn constant(c: f64) -> Self {
        ScalarExpr::Const(c)
    }

    pub fn coord(axis: usize) -> Self {
        assert!(axis < MAX_DIM, "axis {axis} out of range");
        ScalarExpr::Coord { axis, power: 1 }
    }

    pub fn coord_pow(axis: usize, power: u32) -> Result<Self> {
        if axis >= MAX_DIM {
            return Err(Error::IndexOutOfRange { index: axis, dim: MAX_DIM });
        }
        match power {
            0 => Ok(ScalarExpr::Const(1.0)),
            p if p <= MAX_POWER => Ok(ScalarExpr::Coord { axis, power: p }),
            p => Err(Error::PowerTooLarge(p)),
        }
    }

    pub fn sin(k: &[f64], phase: f64) -> Self {
        ScalarExpr::Sin(Phase::new(k, phase))
    }

    pub fn cos(k: &[f64], phase: f64) -> Self {
        ScalarExpr::Cos(Phase::new(k, phase))
    }

    /// Sum with flattening, constant folding and zero elimination.
    pub fn sum(items: impl IntoIterator<Item = ScalarExpr>) -> Self {
        let mut out = Vec::new();
        let mut c = 0.0;
        let mut stack: Vec<ScalarExpr> = items.into_iter().collect();
        stack.reverse();
        while let Some(e) = stack.pop() {
            match e {
                ScalarExpr::Const(v) => c += v,
                ScalarExpr::Sum(inner) => stack.extend(inner.into_iter().rev()),
                other => out.push(other),
            }
        }
        if c != 0.0 {
            out.push(ScalarExpr::Const(c));
        }
        match out.len() {
            0 => ScalarExpr::Const(0.0),
            1 => out.pop().unwrap(),
            _ => ScalarExpr::Sum(out),
        }
    }

    /// Product with flattening and constant folding; any zero factor yields zero.
    pub fn product(items: impl IntoIterator<Item = ScalarExpr>) -> Self {
        let mut out = Vec::new();
        let mut c = 1.0;
        let mut stack: Vec<ScalarExpr> = items.into_iter().collect();
        stack.reverse();
        while let Some(e) = stack.pop() {
            match e {
                ScalarExpr::Const(v) => c *= v,
                ScalarExpr::Prod(inner) => stack.extend(inner.into_iter().rev()),
                other => out.push(other),
            }
        }
        if c == 0.0 {
            return ScalarExpr::Const(0.0);
        }
        if out.is_empty() {
            return ScalarExpr::Const(c);
        }
        if c != 1.0 {
            out.insert(0, ScalarExpr::Const(c));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            ScalarExpr::Prod(out)
        }
    }

    pub fn scale(self, c: f64) -> Self {
        ScalarExpr::product([ScalarExpr::Const(c), self])
    }

    /// Structural zero test. Use [`ScalarExpr::is_zero`] for cancellation-aware checks.
    pub fn is_trivially_zero(&self) -> bool {
        matches!(self, ScalarExpr::Const(c) if *c == 0.0)
    }

    /// True when the expression cancels to zero after full expansion.
    pub fn is_zero(&self) -> bool {
        self.is_trivially_zero() || self.expand().is_zero()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarExpr::Const(c) => *c,
            ScalarExpr::Coord { axis, power } => {
                let v = x.get(*axis).copied().unwrap_or(0.0);
                match power {
                    1 => v,
                    2 => v * v,
                    3 => v * v * v,
                    p => v.powi(*p as i32),
                }
            }
            ScalarExpr::Sin(p) => p.arg(x).sin(),
            ScalarExpr::Cos(p) => p.arg(x).cos(),
            ScalarExpr::Sum(items) => items.iter().map(|e| e.eval(x)).sum(),
            ScalarExpr::Prod(items) => items.iter().map(|e| e.eval(x)).product(),
        }
    }

    /// Exact partial derivative with respect to `x^mu`.
    pub fn partial(&self, mu: usize) -> ScalarExpr {
        match self {
            ScalarExpr::Const(_) => ScalarExpr::zero(),
            ScalarExpr::Coord { axis, power } => {
                if *axis != mu {
                    return ScalarExpr::zero();
                }
                let lower = if *power == 1 {
                    ScalarExpr::Const(1.0)
                } else {
                    ScalarExpr::Coord { axis: *axis, power: power - 1 }
                };
                lower.scale(*power as f64)
            }
            ScalarExpr::Sin(p) => {
                let k = p.k.get(mu).copied().unwrap_or(0.0);
                if k == 0.0 {
                    ScalarExpr::zero()
                } else {
                    ScalarExpr::Cos(*p).scale(k)
                }
            }
            ScalarExpr::Cos(p) => {
                let k = p.k.get(mu).copied().unwrap_or(0.0);
                if k == 0.0 {
                    ScalarExpr::zero()
                } else {
                    ScalarExpr::Sin(*p).scale(-k)
                }
            }
            ScalarExpr::Sum(items) => ScalarExpr::sum(items.iter().map(|e| e.partial(mu))),
            ScalarExpr::Prod(items) => {
                let mut terms = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    let d = item.partial(mu);
                    if d.is_trivially_zero() {
                        continue;
                    }
                    let mut factors = items.clone();
                    factors[i] = d;
                    terms.push(ScalarExpr::product(factors));
                }
                ScalarExpr::sum(terms)
            }
        }
    }

    /// True when the expression does not reference `x^mu` at all.
    pub fn independent_of(&self, mu: usize) -> bool {
        match self {
            ScalarExpr::Const(_) => true,
            ScalarExpr::Coord { axis, .. } => *axis != mu,
            ScalarExpr::Sin(p) | ScalarExpr::Cos(p) => p.k.get(mu).is_none_or(|k| *k == 0.0),
            ScalarExpr::Sum(items) | ScalarExpr::Prod(items) => {
                items.iter().all(|e| e.independent_of(mu))
            }
        }
    }

    /// Highest coordinate axis referenced, if any.
    pub fn max_axis(&self) -> Option<usize> {
        match self {
            ScalarExpr::Const(_) => None,
            ScalarExpr::Coord { axis, .. } => Some(*axis),
            ScalarExpr::Sin(p) | ScalarExpr::Cos(p) => p.k.iter().rposition(|k| *k != 0.0),
            ScalarExpr::Sum(items) | ScalarExpr::Prod(items) => {
                items.iter().filter_map(|e| e.max_axis()).max()
            }
        }
    }

    /// Antiderivative `G` in `x^0` with `partial(G, 0) = self` and `G = 0` at `x^0 = 0`.
    ///
    /// Supported integrands are sums of terms that are polynomial in `x^0`
    /// times `x^0`-independent factors, and sinusoids (or products of
    /// sinusoids) whose combined frequency in `x^0` is nonzero and which
    /// carry no polynomial `x^0` factor.
    pub fn time_antiderivative(&self) -> Result<ScalarExpr> {
        Ok(self.expand().time_antiderivative()?.to_expr())
    }

    /// True when the expression is periodic with period `length` along every
    /// spatial axis `1..dim`.
    pub fn is_spatially_periodic(&self, dim: usize, length: f64) -> bool {
        self.expand().is_spatially_periodic(dim, length)
    }

    pub fn expand(&self) -> Expanded {
        Expanded::from_expr(self)
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::write_expr(self, f)
    }
}

impl std::str::FromStr for ScalarExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl From<f64> for ScalarExpr {
    fn from(c: f64) -> Self {
        ScalarExpr::Const(c)
    }
}

impl Add for ScalarExpr {
    type Output = ScalarExpr;

    fn add(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::sum([self, rhs])
    }
}

impl Sub for ScalarExpr {
    type Output = ScalarExpr;

    fn sub(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::sum([self, -rhs])
    }
}

impl Mul for ScalarExpr {
    type Output = ScalarExpr;

    fn mul(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::product([self, rhs])
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;

    fn neg(self) -> ScalarExpr {
        match self {
            ScalarExpr::Const(c) => ScalarExpr::Const(-c),
            other => other.scale(-1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn central_fd(e: &ScalarExpr, x: &[f64], mu: usize, h: f64) -> f64 {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[mu] += h;
        xm[mu] -= h;
        (e.eval(&xp) - e.eval(&xm)) / (2.0 * h)
    }

    fn sample_expr() -> ScalarExpr {
        // 0.7 (x0)^2 x1 + cos(1.3 x1 - 0.9 x0 + 0.2) sin(0.5 x2) + 2 (x3)^3 - x2
        let a = ScalarExpr::product([
            ScalarExpr::Const(0.7),
            ScalarExpr::coord_pow(0, 2).unwrap(),
            ScalarExpr::coord(1),
        ]);
        let b = ScalarExpr::cos(&[-0.9, 1.3], 0.2) * ScalarExpr::sin(&[0.0, 0.0, 0.5], 0.0);
        let c = ScalarExpr::coord_pow(3, 3).unwrap().scale(2.0);
        a + b + c - ScalarExpr::coord(2)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ScalarExpr::constant(3.5).eval(&[1.0, 2.0, 3.0, 4.0]), 3.5);
        assert_eq!(ScalarExpr::coord_pow(0, 2).unwrap().eval(&[2.0]), 4.0);
        let k = 1.0;
        let wave = ScalarExpr::cos(&[-k, k], 0.0);
        assert_eq!(wave.eval(&[0.37, 0.37, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn partial_examples() {
        assert!(ScalarExpr::constant(2.0).partial(0).is_trivially_zero());

        let k = 1.7;
        let wave = ScalarExpr::cos(&[-k, k], 0.0);
        let d = wave.partial(1);
        let x = [0.3, 1.1, 0.0, 0.0];
        let expected = -k * (k * (x[1] - x[0])).sin();
        assert!((d.eval(&x) - expected).abs() < 1e-15);

        let cube = ScalarExpr::coord_pow(0, 3).unwrap();
        assert_eq!(cube.partial(0).eval(&[2.0]), 12.0);
    }

    #[test]
    fn power_limit() {
        assert!(matches!(ScalarExpr::coord_pow(1, 4), Err(Error::PowerTooLarge(4))));
    }

    #[test]
    fn antiderivative_examples() {
        let c = 2.5;
        let g = ScalarExpr::constant(c).time_antiderivative().unwrap();
        for t in [0.0, 0.3, -1.2] {
            assert!((g.eval(&[t, 9.0]) - c * t).abs() < 1e-15);
        }

        let g = ScalarExpr::coord(0).time_antiderivative().unwrap();
        assert!((g.eval(&[3.0]) - 4.5).abs() < 1e-15);

        let w = 1.9;
        let g = ScalarExpr::sin(&[w], 0.0).time_antiderivative().unwrap();
        for t in [0.0, 0.4, 2.2] {
            let expected = (1.0 - (w * t).cos()) / w;
            assert!((g.eval(&[t]) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn antiderivative_rejects_polynomial_times_oscillation() {
        let e = ScalarExpr::coord(0) * ScalarExpr::sin(&[1.0, 0.5], 0.0);
        assert!(matches!(e.time_antiderivative(), Err(Error::UnsupportedIntegrand(_))));
    }

    #[test]
    fn antiderivative_of_squared_wave() {
        // sin^2(k(x1 - x0)) integrates through the product-to-sum expansion.
        let s = ScalarExpr::sin(&[-2.0, 2.0], 0.3);
        let e = s.clone() * s;
        let g = e.time_antiderivative().unwrap();
        let dg = g.partial(0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            assert!((dg.eval(&x) - e.eval(&x)).abs() < 1e-12);
            assert!(g.eval(&[0.0, x[1]]).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_finite_differences_at_second_order() {
        let e = sample_expr();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-2;
        let mut orders = Vec::new();
        for _ in 0..100 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.5..1.5)).collect();
            for mu in 0..4 {
                let exact = e.partial(mu).eval(&x);
                let e1 = (central_fd(&e, &x, mu, h) - exact).abs();
                let e2 = (central_fd(&e, &x, mu, h / 2.0) - exact).abs();
                assert!(e1 <= 50.0 * h * h, "error {e1} too large");
                // only measure where the truncation error dominates rounding
                if e1 > 1e-9 {
                    orders.push((e1 / e2).log2());
                }
            }
        }
        assert!(!orders.is_empty());
        for p in orders {
            assert!((1.8..=2.2).contains(&p), "measured order {p}");
        }
    }

    #[test]
    fn zero_detection_sees_cancellation() {
        let s = ScalarExpr::sin(&[-1.0, 1.0], 0.0);
        let c = ScalarExpr::cos(&[-1.0, 1.0], 0.0);
        let one = s.clone() * s + c.clone() * c - ScalarExpr::Const(1.0);
        assert!(one.is_zero());
        assert!(!ScalarExpr::coord(1).is_zero());
    }

    #[test]
    fn periodicity() {
        let l = 1.6;
        let k = 2.0 * std::f64::consts::PI / l;
        let wave = ScalarExpr::cos(&[-k, k], 0.0);
        assert!(wave.is_spatially_periodic(4, l));
        let ramp = ScalarExpr::coord(1).scale(3.0);
        assert!(!ramp.is_spatially_periodic(4, l));
        let time_ramp = ScalarExpr::coord(0);
        assert!(time_ramp.is_spatially_periodic(4, l));
        let off = ScalarExpr::sin(&[0.0, 1.1 * k], 0.0);
        assert!(!off.is_spatially_periodic(4, l));
    }

    fn leaf() -> impl Strategy<Value = ScalarExpr> {
        prop_oneof![
            (-3.0f64..3.0).prop_map(ScalarExpr::Const),
            (0usize..4, 1u32..=3).prop_map(|(a, p)| ScalarExpr::coord_pow(a, p).unwrap()),
            (prop::collection::vec(-2.0f64..2.0, 4), -1.0f64..1.0)
                .prop_map(|(k, ph)| ScalarExpr::sin(&k, ph)),
            (prop::collection::vec(-2.0f64..2.0, 4), -1.0f64..1.0)
                .prop_map(|(k, ph)| ScalarExpr::cos(&k, ph)),
        ]
    }

    fn tree() -> impl Strategy<Value = ScalarExpr> {
        leaf().prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..4).prop_map(ScalarExpr::Sum),
                prop::collection::vec(inner, 1..3).prop_map(ScalarExpr::Prod),
            ]
        })
    }

    proptest! {
        #[test]
        fn expansion_preserves_values(e in tree(), x in prop::collection::vec(-1.0f64..1.0, 4)) {
            let a = e.eval(&x);
            let b = e.expand().to_expr().eval(&x);
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }

        #[test]
        fn text_round_trip(e in tree(), x in prop::collection::vec(-1.0f64..1.0, 4)) {
            let text = e.to_string();
            let back: ScalarExpr = text.parse().unwrap();
            let a = e.eval(&x);
            prop_assert!((a - back.eval(&x)).abs() <= 1e-12 * (1.0 + a.abs()), "{}", text);
        }

        #[test]
        fn antiderivative_inverts_time_partial(
            e in tree().prop_filter("x0-free or supported", |e| e.time_antiderivative().is_ok()),
            x in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let g = e.time_antiderivative().unwrap();
            let a = e.eval(&x);
            prop_assert!((g.partial(0).eval(&x) - a).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
