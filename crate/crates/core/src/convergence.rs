//! Observed convergence orders under `h -> h/2` refinement.

use serde::Serialize;

/// Accepted band for second-order schemes.
pub const ORDER_BOUNDS: (f64, f64) = (1.8, 2.2);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub label: String,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log2(e_k / e_{k+1})`, `null` for pairs where the finer error is
    /// already below the floor.
    pub orders: Vec<Option<f64>>,
    pub floor: f64,
    pub below_floor: bool,
    pub passed: bool,
}

impl ConvergenceStudy {
    /// Builds the study and decides it. A refinement pair passes when its
    /// finer error is at or below `floor` or its order lies in `bounds`;
    /// the study passes when every pair does.
    pub fn new(label: &str, h: Vec<f64>, errors: Vec<f64>, floor: f64, bounds: (f64, f64)) -> Self {
        assert_eq!(h.len(), errors.len(), "one error per level");
        let mut orders = Vec::new();
        let mut passed = errors.len() >= 2 && errors.iter().all(|e| e.is_finite());
        for k in 0..errors.len().saturating_sub(1) {
            if errors[k + 1] <= floor {
                orders.push(None);
                continue;
            }
            // per halving of h, so uneven refinements compare fairly
            let p = (errors[k] / errors[k + 1]).log2() / (h[k] / h[k + 1]).log2();
            orders.push(Some(p));
            if !(bounds.0..=bounds.1).contains(&p) {
                passed = false;
            }
        }
        let below_floor = errors.iter().all(|e| *e <= floor);
        Self { label: label.to_string(), h, errors, orders, floor, below_floor, passed }
    }

    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().flatten().copied().reduce(f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_sequence_passes() {
        let h = vec![0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
        let s = ConvergenceStudy::new("quad", h, e, 1e-14, ORDER_BOUNDS);
        assert!(s.passed);
        assert!((s.min_order().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_fails() {
        let h = vec![0.1, 0.05, 0.025];
        let e = h.clone();
        assert!(!ConvergenceStudy::new("lin", h, e, 1e-14, ORDER_BOUNDS).passed);
    }

    #[test]
    fn floor_rule() {
        let h = vec![0.1, 0.05, 0.025];
        let s = ConvergenceStudy::new("zero", h.clone(), vec![1e-16, 0.0, 2e-16], 1e-13, ORDER_BOUNDS);
        assert!(s.passed && s.below_floor);
        assert!(s.orders.iter().all(Option::is_none));
        // reaching the floor on the finest level is fine
        let s = ConvergenceStudy::new("drop", h.clone(), vec![4e-4, 1e-4, 1e-20], 1e-13, ORDER_BOUNDS);
        assert!(s.passed && !s.below_floor);
        // growing out of the floor is not
        let s = ConvergenceStudy::new("grow", h, vec![1e-16, 1e-3, 1e-4], 1e-13, ORDER_BOUNDS);
        assert!(!s.passed);
    }

    #[test]
    fn uneven_spacing_ratio() {
        let h = vec![0.3, 0.1];
        let e = vec![0.09, 0.01];
        let s = ConvergenceStudy::new("triple", h, e, 0.0, ORDER_BOUNDS);
        assert!((s.orders[0].unwrap() - 2.0).abs() < 1e-12);
    }
}
