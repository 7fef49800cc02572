//! Gauss-Legendre rules.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

/// Nodes and weights of the `order`-point rule on `[-1, 1]`, cached.
pub fn legendre_rule(order: usize) -> Arc<Vec<(f64, f64)>> {
    static RULES: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(order).expect("order >= 2");
            let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

/// Nodes and weights mapped to `[a, b]`.
pub fn legendre_on(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    legendre_rule(order)
        .iter()
        .map(|&(x, w)| (m + h * x, h * w))
        .collect()
}

/// Composite rule: `panels` equal panels of `order` points each.
pub fn composite<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, order: usize, f: F) -> f64 {
    let rule = legendre_rule(order);
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * w;
        let mid = lo + 0.5 * w;
        let mut s = 0.0;
        for &(x, wt) in rule.iter() {
            s += wt * f(mid + 0.5 * w * x);
        }
        total += 0.5 * w * s;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_and_oscillations() {
        let r = legendre_on(8, 0.0, 2.0);
        let s: f64 = r.iter().map(|(x, w)| w * x.powi(15)).sum();
        assert!((s - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let osc = composite(0.0, 10.0, 20, 12, |x| (3.0 * x).cos());
        assert!((osc - (30f64).sin() / 3.0).abs() < 1e-13);
    }
}
