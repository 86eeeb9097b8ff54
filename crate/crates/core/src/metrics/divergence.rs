use std::collections::{BTreeMap, BTreeSet};

fn kl_to_mixture(p: f64, m: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (p / m).log2()
    }
}

/// Jensen-Shannon divergence in bits between two probability vectors over
/// the same support.
pub fn js_divergence_vec(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions need the same support");
    let mut js = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        js += 0.5 * kl_to_mixture(a, m) + 0.5 * kl_to_mixture(b, m);
    }
    js.max(0.0)
}

/// Jensen-Shannon divergence of two keyed distributions; missing keys have
/// probability zero.
pub fn js_divergence_maps(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let keys: BTreeSet<&String> = p.keys().chain(q.keys()).collect();
    let pv: Vec<f64> = keys.iter().map(|k| p.get(*k).copied().unwrap_or(0.0)).collect();
    let qv: Vec<f64> = keys.iter().map(|k| q.get(*k).copied().unwrap_or(0.0)).collect();
    js_divergence_vec(&pv, &qv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(js_divergence_vec(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert!((js_divergence_vec(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
        // M = (0.75, 0.25)
        let expect = 0.5 * (0.5 * (0.5f64 / 0.75).log2() + 0.5 * (0.5f64 / 0.25).log2())
            + 0.5 * (1.0f64 / 0.75).log2();
        assert!((js_divergence_vec(&[0.5, 0.5], &[1.0, 0.0]) - expect).abs() < 1e-12);
    }

    #[test]
    fn maps_union_support() {
        let p = BTreeMap::from([("a".to_string(), 1.0)]);
        let q = BTreeMap::from([("b".to_string(), 1.0)]);
        assert!((js_divergence_maps(&p, &q) - 1.0).abs() < 1e-15);
        assert!((js_divergence_maps(&p, &q) - js_divergence_maps(&q, &p)).abs() < 1e-15);
    }
}
