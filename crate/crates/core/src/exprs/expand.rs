//! Expanded normal form: a sum of `coef * prod_mu (x^mu)^{n_mu} * trig`
//! terms with at most one sinusoid per term.
//!
//! Products of sinusoids are reduced with the product-to-sum identities, and
//! like terms are merged. A merged coefficient that is pure rounding noise
//! relative to the contributions that produced it is dropped, so that
//! symbolically vanishing combinations (such as the invariant of a null
//! field) expand to exactly zero.

use std::collections::HashMap;

use super::{Phase, ScalarExpr, MAX_POWER};
use crate::error::{Error, Result};
use crate::minkowski::MAX_DIM;

const CANCEL_ULPS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrigKind {
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trig {
    pub kind: TrigKind,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub powers: [u32; MAX_DIM],
    pub trig: Option<Trig>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expanded {
    pub terms: Vec<Term>,
}

#[derive(PartialEq, Eq, Hash)]
struct Key {
    powers: [u32; MAX_DIM],
    trig: Option<(TrigKind, [u64; MAX_DIM], u64)>,
}

fn bits(v: f64) -> u64 {
    // -0.0 and 0.0 must share a key
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

impl Term {
    fn key(&self) -> Key {
        Key {
            powers: self.powers,
            trig: self.trig.map(|t| {
                let mut k = [0u64; MAX_DIM];
                for (dst, src) in k.iter_mut().zip(t.phase.k) {
                    *dst = bits(src);
                }
                (t.kind, k, bits(t.phase.phase))
            }),
        }
    }

    /// Builds a term with a single normalized sinusoid, folding it into the
    /// coefficient when the covector vanishes.
    fn with_trig(coef: f64, powers: [u32; MAX_DIM], kind: TrigKind, phase: Phase) -> Option<Term> {
        let (coef, trig) = normalize_trig(coef, kind, phase);
        if coef == 0.0 {
            return None;
        }
        Some(Term { coef, powers, trig })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.coef;
        for (axis, &p) in self.powers.iter().enumerate() {
            if p > 0 {
                v *= x.get(axis).copied().unwrap_or(0.0).powi(p as i32);
            }
        }
        if let Some(t) = self.trig {
            let a = t.phase.arg(x);
            v *= match t.kind {
                TrigKind::Sin => a.sin(),
                TrigKind::Cos => a.cos(),
            };
        }
        v
    }
}

fn normalize_trig(coef: f64, kind: TrigKind, mut phase: Phase) -> (f64, Option<Trig>) {
    for k in phase.k.iter_mut() {
        if *k == 0.0 {
            *k = 0.0;
        }
    }
    match phase.k.iter().position(|k| *k != 0.0) {
        None => {
            let v = match kind {
                TrigKind::Sin => phase.phase.sin(),
                TrigKind::Cos => phase.phase.cos(),
            };
            (coef * v, None)
        }
        Some(first) => {
            let mut coef = coef;
            if phase.k[first] < 0.0 {
                for k in phase.k.iter_mut() {
                    *k = -*k;
                }
                phase.phase = -phase.phase;
                if kind == TrigKind::Sin {
                    coef = -coef;
                }
            }
            if phase.phase == 0.0 {
                phase.phase = 0.0;
            }
            (coef, Some(Trig { kind, phase }))
        }
    }
}

fn combine(a: &Phase, b: &Phase, sign: f64) -> Phase {
    let mut k = [0.0; MAX_DIM];
    for i in 0..MAX_DIM {
        k[i] = a.k[i] + sign * b.k[i];
    }
    Phase {
        k,
        phase: a.phase + sign * b.phase,
    }
}

fn mul_terms(a: &Term, b: &Term, out: &mut Vec<Term>) {
    let coef = a.coef * b.coef;
    let mut powers = a.powers;
    for (p, q) in powers.iter_mut().zip(b.powers) {
        *p += q;
    }
    match (a.trig, b.trig) {
        (None, None) => out.push(Term { coef, powers, trig: None }),
        (Some(t), None) | (None, Some(t)) => out.push(Term { coef, powers, trig: Some(t) }),
        (Some(ta), Some(tb)) => {
            let diff = combine(&ta.phase, &tb.phase, -1.0);
            let sum = combine(&ta.phase, &tb.phase, 1.0);
            let half = 0.5 * coef;
            use TrigKind::*;
            // product-to-sum identities
            let pieces: [(f64, TrigKind, Phase); 2] = match (ta.kind, tb.kind) {
                (Sin, Sin) => [(half, Cos, diff), (-half, Cos, sum)],
                (Cos, Cos) => [(half, Cos, diff), (half, Cos, sum)],
                (Sin, Cos) => [(half, Sin, sum), (half, Sin, diff)],
                (Cos, Sin) => [(half, Sin, sum), (-half, Sin, diff)],
            };
            for (c, kind, phase) in pieces {
                if let Some(t) = Term::with_trig(c, powers, kind, phase) {
                    out.push(t);
                }
            }
        }
    }
}

impl Expanded {
    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut e = Expanded { terms };
        e.merge();
        e
    }

    pub fn from_expr(e: &ScalarExpr) -> Self {
        match e {
            ScalarExpr::Const(c) => {
                if *c == 0.0 {
                    Expanded::default()
                } else {
                    Expanded {
                        terms: vec![Term { coef: *c, powers: [0; MAX_DIM], trig: None }],
                    }
                }
            }
            ScalarExpr::Coord { axis, power } => {
                let mut powers = [0; MAX_DIM];
                powers[*axis] = *power;
                Expanded {
                    terms: vec![Term { coef: 1.0, powers, trig: None }],
                }
            }
            ScalarExpr::Sin(p) => Expanded {
                terms: Term::with_trig(1.0, [0; MAX_DIM], TrigKind::Sin, *p).into_iter().collect(),
            },
            ScalarExpr::Cos(p) => Expanded {
                terms: Term::with_trig(1.0, [0; MAX_DIM], TrigKind::Cos, *p).into_iter().collect(),
            },
            ScalarExpr::Sum(items) => {
                Expanded::from_terms(items.iter().flat_map(|i| Expanded::from_expr(i).terms).collect())
            }
            ScalarExpr::Prod(items) => {
                let mut acc = Expanded {
                    terms: vec![Term { coef: 1.0, powers: [0; MAX_DIM], trig: None }],
                };
                for item in items {
                    acc = acc.mul(&Expanded::from_expr(item));
                    if acc.terms.is_empty() {
                        break;
                    }
                }
                acc
            }
        }
    }

    pub fn mul(&self, other: &Expanded) -> Expanded {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len() * 2);
        for a in &self.terms {
            for b in &other.terms {
                mul_terms(a, b, &mut out);
            }
        }
        Expanded::from_terms(out)
    }

    pub fn add(&self, other: &Expanded) -> Expanded {
        Expanded::from_terms(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    fn merge(&mut self) {
        let mut index: HashMap<Key, usize> = HashMap::new();
        let mut merged: Vec<(Term, f64)> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match index.get(&t.key()) {
                Some(&i) => {
                    merged[i].0.coef += t.coef;
                    merged[i].1 += t.coef.abs();
                }
                None => {
                    index.insert(t.key(), merged.len());
                    let a = t.coef.abs();
                    merged.push((t, a));
                }
            }
        }
        self.terms = merged
            .into_iter()
            .filter(|(t, mag)| t.coef != 0.0 && t.coef.abs() > CANCEL_ULPS * f64::EPSILON * mag)
            .map(|(t, _)| t)
            .collect();
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn to_expr(&self) -> ScalarExpr {
        ScalarExpr::sum(self.terms.iter().map(|t| {
            let mut factors = vec![ScalarExpr::Const(t.coef)];
            for (axis, &p) in t.powers.iter().enumerate() {
                let mut left = p;
                while left > 0 {
                    let chunk = left.min(MAX_POWER);
                    factors.push(ScalarExpr::Coord { axis, power: chunk });
                    left -= chunk;
                }
            }
            if let Some(tr) = t.trig {
                factors.push(match tr.kind {
                    TrigKind::Sin => ScalarExpr::Sin(tr.phase),
                    TrigKind::Cos => ScalarExpr::Cos(tr.phase),
                });
            }
            ScalarExpr::product(factors)
        }))
    }

    pub fn time_antiderivative(&self) -> Result<Expanded> {
        let mut out = Vec::with_capacity(self.terms.len() * 2);
        for t in &self.terms {
            let n0 = t.powers[0];
            match t.trig {
                Some(tr) if tr.phase.k[0] != 0.0 => {
                    if n0 > 0 {
                        return Err(Error::UnsupportedIntegrand(format!(
                            "polynomial (x0)^{n0} multiplies a sinusoid oscillating in x0"
                        )));
                    }
                    let w = tr.phase.k[0];
                    let mut frozen = tr.phase;
                    frozen.k[0] = 0.0;
                    // G(x0) - G(0) so that the result vanishes at x0 = 0
                    let (kind, sign) = match tr.kind {
                        TrigKind::Sin => (TrigKind::Cos, -1.0),
                        TrigKind::Cos => (TrigKind::Sin, 1.0),
                    };
                    let c = sign * t.coef / w;
                    out.extend(Term::with_trig(c, t.powers, kind, tr.phase));
                    out.extend(Term::with_trig(-c, t.powers, kind, frozen));
                }
                _ => {
                    let mut powers = t.powers;
                    powers[0] += 1;
                    out.push(Term {
                        coef: t.coef / (n0 + 1) as f64,
                        powers,
                        trig: t.trig,
                    });
                }
            }
        }
        Ok(Expanded::from_terms(out))
    }

    pub fn is_spatially_periodic(&self, dim: usize, length: f64) -> bool {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.terms.iter().all(|t| {
            (1..dim.min(MAX_DIM)).all(|i| {
                if t.powers[i] != 0 {
                    return false;
                }
                match t.trig {
                    None => true,
                    Some(tr) => {
                        let cycles = tr.phase.k[i] * length / two_pi;
                        (cycles - cycles.round()).abs() <= 1e-9 * cycles.abs().max(1.0)
                    }
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoid_sign_is_canonical() {
        let a = Expanded::from_expr(&ScalarExpr::sin(&[-1.0, 2.0], 0.5));
        let b = Expanded::from_expr(&ScalarExpr::sin(&[1.0, -2.0], -0.5));
        assert!(a.add(&b).is_zero());
    }

    #[test]
    fn zero_frequency_folds_to_constant() {
        let e = Expanded::from_expr(&ScalarExpr::cos(&[0.0, 0.0], 0.0));
        assert_eq!(e.terms.len(), 1);
        assert!(e.terms[0].trig.is_none());
        assert_eq!(e.terms[0].coef, 1.0);
    }

    #[test]
    fn high_powers_split_into_leaves() {
        let c = ScalarExpr::coord_pow(0, 3).unwrap();
        let e = (c.clone() * c).expand().to_expr();
        assert_eq!(e.eval(&[2.0]), 64.0);
    }
}
